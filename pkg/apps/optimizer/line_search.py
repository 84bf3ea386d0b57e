"""Backtracking line search that keeps the mesh valid and the objective decreasing."""

import logging
from dataclasses import dataclass

import numpy as np

from apps.mesh_core.deformation import apply_deformation, validate_deformed
from apps.optimizer.params import LineSearchParams
from apps.swe_forward.exceptions import SWEError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSearchResult:
    accepted: bool
    step: float = 0.0
    mesh: object = None
    evaluation: object = None
    trials: int = 0


def line_search(mesh, direction, current, evaluate, params=None):
    """
    Try mesh + rho * direction for rho = rho0, rho0 * shrink, ... and accept the
    first trial whose mesh is valid and whose objective is strictly below
    ``current``. ``evaluate(mesh)`` returns an object with a ``total``.
    A failed search comes back with ``accepted=False``.
    """
    params = LineSearchParams() if params is None else params
    direction = np.asarray(direction, dtype=float)
    if not np.all(np.isfinite(direction)):
        logger.info("Line search skipped: direction is not finite")
        return LineSearchResult(accepted=False)

    for trial, step in enumerate(params.steps, start=1):
        moved = apply_deformation(mesh, direction, step)
        report = validate_deformed(moved)
        if not report:
            logger.info(
                "Line search trial %d at step %.3e rejected: %d inverted cells, "
                "%d obstacle crossings",
                trial,
                step,
                len(report.inverted_cells),
                len(report.intersecting_segments),
            )
            continue
        try:
            evaluation = evaluate(moved)
        except SWEError as error:
            logger.info("Line search trial %d at step %.3e rejected: %s", trial, step, error)
            continue
        if evaluation.total < current:
            logger.debug(
                "Line search accepted step %.3e after %d trials: %.6e -> %.6e",
                step,
                trial,
                current,
                evaluation.total,
            )
            return LineSearchResult(
                accepted=True, step=step, mesh=moved, evaluation=evaluation, trials=trial
            )
        logger.info(
            "Line search trial %d at step %.3e rejected: objective %.6e not below %.6e",
            trial,
            step,
            evaluation.total,
            current,
        )

    logger.info("Line search exhausted after %d trials", len(params.steps))
    return LineSearchResult(accepted=False, trials=len(params.steps))
