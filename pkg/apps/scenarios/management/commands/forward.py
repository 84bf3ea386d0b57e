from apps.scenarios.command_base import ScenarioCommand
from apps.scenarios.runners import run_forward


class Command(ScenarioCommand):
    help = "Solve the forward shallow-water problem of a scenario"

    def run(self, config):
        run = run_forward(config)
        drift = max(abs(row.mass_drift) for row in run.diagnostics)
        return (
            f"Forward run finished: {run.trajectory.n_steps} steps to T={run.trajectory.T:g}, "
            f"max mass drift {drift:.3e}, output in {run.directory}"
        )
