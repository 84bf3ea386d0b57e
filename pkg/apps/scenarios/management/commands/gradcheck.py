from apps.scenarios.command_base import ScenarioCommand
from apps.scenarios.runners import run_gradcheck


class Command(ScenarioCommand):
    help = "Check the shape derivative of a scenario against central differences"

    def run(self, config):
        run = run_gradcheck(config)
        return (
            f"Gradient check finished: {len(run.rows)} rows, max relative error "
            f"{run.max_relative_error:.3e}, output in {run.directory}"
        )
