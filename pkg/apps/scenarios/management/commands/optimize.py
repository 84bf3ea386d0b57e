from apps.scenarios.command_base import ScenarioCommand
from apps.scenarios.runners import run_optimize


class Command(ScenarioCommand):
    help = "Optimize the obstacle shape of a scenario"

    def run(self, config):
        run = run_optimize(config)
        result = run.result
        totals = result.history.totals
        status = "converged" if result.converged else "stopped"
        if result.line_search_failed:
            status = "stopped without an admissible step"
        return (
            f"Optimization {status} after {result.iterations} iterations: "
            f"J {totals[0]:.6e} -> {totals[-1]:.6e}, output in {run.directory}"
        )
