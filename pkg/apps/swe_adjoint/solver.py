"""Backward-in-time march of the adjoint over a stored forward trajectory."""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.swe_adjoint.exceptions import AdjointError
from apps.swe_adjoint.residual import AdjointOperator
from apps.swe_forward.params import TimeScheme

logger = logging.getLogger(__name__)


@dataclass
class AdjointTrajectory:
    """Adjoint states on the forward time levels; ``states[-1]`` is the zero terminal state."""

    space: object
    times: list
    states: list = field(default_factory=list)

    @property
    def initial(self):
        return self.states[0]


def solve_adjoint(forward, params, bathymetry, weights, observer=None):
    """
    March P from P(T) = 0 back to t = 0 over the forward step sequence.

    Each backward step from t[n+1] to t[n] uses the viscosity frozen on the
    forward step and the stored forward states at both ends, with the time
    scheme of the forward solve. ``observer(step, time, P)`` is called after
    each backward step.
    """
    space = forward.space
    if forward.n_steps < 1:
        raise AdjointError("forward trajectory has no time steps")
    if len(forward.eps_v) != forward.n_steps:
        raise AdjointError("forward trajectory is missing frozen viscosities")
    if bathymetry.space.n_cells != space.n_cells:
        raise AdjointError(
            f"bathymetry has {bathymetry.space.n_cells} cells, trajectory {space.n_cells}"
        )

    operator = AdjointOperator(space, params, bathymetry, weights)
    scheme = TimeScheme(forward.scheme)
    times = list(forward.times)
    P = space.zeros(3)
    states = [None] * len(times)
    states[-1] = P
    logger.info("Adjoint solve over %d steps with %s", forward.n_steps, scheme.label)

    for n in reversed(range(forward.n_steps)):
        t_high, t_low = times[n + 1], times[n]
        dt = t_high - t_low
        eps_v = forward.eps_v[n]
        stage = P + dt * operator.rate(P, forward.states[n + 1], eps_v, t_high)
        if scheme == TimeScheme.SSPRK2:
            stage = 0.5 * P + 0.5 * (
                stage + dt * operator.rate(stage, forward.states[n], eps_v, t_low)
            )
        if not stage.is_finite():
            raise AdjointError(f"non-finite adjoint state at t={t_low:.6g}")
        P = stage
        states[n] = P
        step = forward.n_steps - n
        logger.debug("Adjoint step %d: t=%.6g max|P|=%.3e", step, t_low, np.abs(P.coeffs).max())
        if observer is not None:
            observer(step, t_low, P)

    logger.info("Adjoint solve finished, max |P(0)| = %.3e", float(np.abs(P.coeffs).max()))
    return AdjointTrajectory(space=space, times=times, states=states)
