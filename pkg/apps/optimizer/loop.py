"""
Outer shape optimization loop.

Every iterate is evaluated (distance, forward solve, objective), then the
adjoint, the assembled shape derivative and its elasticity representative W
are computed. The loop stops once sqrt(DJ[W]) drops to eps_stop; otherwise
the obstacle moves along -W with a backtracking line search.
"""

import logging
from dataclasses import dataclass

import numpy as np

from apps.geometry_reg.penalties import obstacle_curvature
from apps.mesh_core.deformation import validate_deformed
from apps.optimizer.history import IterationRecord, OptHistory
from apps.optimizer.line_search import line_search
from apps.optimizer.params import LineSearchParams, OptimizerParams
from apps.shape_gradient.elasticity import gradient_norm, lame_field, solve_elasticity

logger = logging.getLogger(__name__)


@dataclass
class OptimizationResult:
    mesh: object
    history: OptHistory
    converged: bool = False
    line_search_failed: bool = False

    @property
    def iterations(self):
        return len(self.history) - 1


def optimize(mesh, problem, params=None, line_search_params=None, observer=None):
    """
    Run the optimization from ``mesh``. ``observer(iteration, mesh, field)`` is
    called on every iterate with its elasticity deformation field.

    A failed line search ends the run and returns the last accepted mesh.
    """
    params = OptimizerParams() if params is None else params
    line_search_params = LineSearchParams() if line_search_params is None else line_search_params
    problem.check_mesh(mesh)
    elasticity = problem.elasticity
    history = OptHistory()
    result = OptimizationResult(mesh=mesh, history=history)

    evaluation = problem.evaluate(mesh)
    for iteration in range(int(params.max_iterations) + 1):
        assembly = problem.derivative(evaluation)
        mu = lame_field(mesh, elasticity.mu_min, elasticity.mu_max)
        field = solve_elasticity(mesh, assembly, mu, elasticity.lambda_elas)
        norm = gradient_norm(assembly, field.W)
        if observer is not None:
            observer(iteration, mesh, field)

        report = validate_deformed(mesh)
        stop = norm <= params.eps_stop or iteration == params.max_iterations
        search = None
        if not stop:
            search = line_search(
                mesh, -field.W, evaluation.total, problem.evaluate, line_search_params
            )
        step = search.step if search is not None and search.accepted else 0.0
        history.append(
            IterationRecord(
                iteration=iteration,
                grad_norm=norm,
                step=step,
                valid=report.valid,
                min_area=report.min_area,
                max_curvature=_max_curvature(mesh),
                **evaluation.values,
            )
        )
        logger.info(
            "Iteration %d: J=%.6e (J1=%.3e J2=%.3e J3=%.3e J4=%.3e) |grad|=%.3e step=%.3e",
            iteration,
            evaluation.total,
            evaluation.J1,
            evaluation.J2,
            evaluation.J3,
            evaluation.J4,
            norm,
            step,
        )

        if norm <= params.eps_stop:
            result.converged = True
            break
        if search is None:
            break
        if not search.accepted:
            logger.warning("Stopping at iteration %d: no admissible step", iteration)
            result.line_search_failed = True
            break
        mesh, evaluation = search.mesh, search.evaluation
        result.mesh = mesh

    logger.info(
        "Optimization finished after %d iterations, J=%.6e, converged=%s",
        result.iterations,
        history.records[-1].J_total,
        result.converged,
    )
    return result


def _max_curvature(mesh):
    _, kappa = obstacle_curvature(mesh)
    return float(np.abs(kappa).max()) if len(kappa) else 0.0
