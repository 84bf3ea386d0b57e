"""Explicit time marching of the forward problem."""

import logging
from dataclasses import dataclass, field

import numpy as np

from apps.swe_forward.exceptions import NonFiniteStateError, SWEError
from apps.swe_forward.params import TimeScheme
from apps.swe_forward.physics import max_speed
from apps.swe_forward.residual import ForwardOperator, check_positive

logger = logging.getLogger(__name__)

# Relative slack used to land exactly on the final time.
TIME_TOLERANCE = 1e-12

# Fraction of the explicit SIPG stability limit h_F^2 / (C_IP p^4 eps) used per step.
DIFFUSIVE_CFL = 0.1


@dataclass
class Trajectory:
    """Every time level of a forward solve.

    ``eps_v[n]`` is the artificial viscosity frozen over the step from
    ``times[n]`` to ``times[n + 1]``.
    """

    space: object
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    eps_v: list = field(default_factory=list)
    scheme: str = TimeScheme.SSPRK2

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def dts(self):
        return np.diff(self.times)

    @property
    def final(self):
        return self.states[-1]

    @property
    def T(self):
        return self.times[-1]


def stable_dt(U, space, params, eps_v=None, remaining=None):
    """
    Largest admissible step for U: the smaller of the Courant bound
    cfl * h_i / (max wave speed), with the longest edge as h_i, and the explicit
    SIPG bound, capped by dt_max and the remaining time.

    The SIPG bound follows the penalty C_IP p^2 eps / h_F of each face, so small
    penalty lengths next to a refined obstacle limit the step.
    """
    geometry = space.mesh.geometry
    volume = np.moveaxis(space.evaluate(U), 1, 0)
    vertices = np.moveaxis(U.vertex_values, 1, 0)
    speed = np.maximum(
        max_speed(volume, params.g).max(axis=1), max_speed(vertices, params.g).max(axis=1)
    )
    dt = params.cfl * float(np.min(np.asarray(geometry.diameters) / speed))
    eps = np.full(space.n_cells, max(params.eps_f))
    if eps_v is not None:
        eps = np.maximum(eps, eps_v)
    diffusive = eps > 0.0
    if np.any(diffusive):
        face_h = np.asarray(geometry.cell_face_h)[diffusive]
        # the penalty and the trace inverse estimate each scale with p^2
        stiffness = params.C_IP * params.order**4 * eps[diffusive]
        dt = min(dt, DIFFUSIVE_CFL * float(np.min(face_h**2 / stiffness)))
    dt = min(dt, params.dt_max)
    if remaining is not None:
        dt = min(dt, remaining)
    return dt


def _check_finite(U, time):
    if not U.is_finite():
        raise NonFiniteStateError(f"non-finite state at t={time:.6g}", time=time)


def solve_forward(
    U0, space, params, bathymetry, T, scheme=TimeScheme.SSPRK2, observer=None, times=None
):
    """
    March U0 from t = 0 to T and keep every time level.

    ``times`` pins the time levels (starting at 0 and ending at T) instead of
    choosing steps from the stability bound, so that solves on nearby meshes
    share one time grid. ``observer(step, time, U, eps_v)`` is called after
    each accepted step.
    """
    scheme = TimeScheme(scheme)
    if not T > 0:
        raise SWEError(f"final time must be positive, got {T}")
    if times is not None:
        times = np.asarray(times, dtype=float)
        increasing = np.all(np.diff(times) > 0.0)
        if times[0] != 0.0 or not increasing or abs(times[-1] - T) > TIME_TOLERANCE * T:
            raise SWEError("pinned time levels must increase from 0 to the final time")
    operator = ForwardOperator(space, params, bathymetry)
    U = U0.copy()
    _check_finite(U, 0.0)
    cells = np.arange(space.n_cells)
    check_positive(space.evaluate(U)[:, 0], cells, 0.0)
    trajectory = Trajectory(space=space, times=[0.0], states=[U], scheme=scheme)
    logger.info("Forward solve on %d cells to T=%g with %s", space.n_cells, T, scheme.label)

    t = 0.0
    step = 0
    while T - t > TIME_TOLERANCE * T:
        eps_v = operator.shock_viscosity(U)
        if times is not None:
            t_next = float(times[step + 1])
        else:
            t_next = t + stable_dt(U, space, params, eps_v, remaining=T - t)
        if T - t_next <= TIME_TOLERANCE * T:
            t_next = T
        dt = t_next - t

        stage = U + dt * operator.rate(U, eps_v, t)
        if scheme == TimeScheme.SSPRK2:
            _check_finite(stage, t_next)
            stage = 0.5 * U + 0.5 * (stage + dt * operator.rate(stage, eps_v, t_next))
        _check_finite(stage, t_next)
        check_positive(space.evaluate(stage)[:, 0], cells, t_next)

        U = stage
        t = t_next
        step += 1
        trajectory.times.append(t)
        trajectory.states.append(U)
        trajectory.eps_v.append(eps_v)
        logger.debug("Forward step %d: t=%.6g dt=%.3e max eps_v=%.3e", step, t, dt, eps_v.max())
        if observer is not None:
            observer(step, t, U, eps_v)

    logger.info("Forward solve finished after %d steps", step)
    return trajectory
