"""Weights and targets of the shore mismatch objective."""

from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from apps.swe_adjoint.exceptions import AdjointError


@dataclass(frozen=True)
class ObjectiveWeights:
    """
    Diagonal weights C = diag(C11, C22, C33) and target U~ = (H~, Q~1, Q~2) of the
    mismatch between U_hat = (H + z, Q) and the target on the shore.

    ``target`` is a constant triple, a callable ``f(t, x, y)`` returning three
    arrays, or an object with a ``trace(t, space, faces)`` method such as
    TraceTarget.
    """

    C: tuple = (1.0, 1.0, 1.0)
    target: object = (1.0, 0.0, 0.0)

    def __post_init__(self):
        errors = {}
        try:
            C = tuple(float(c) for c in self.C)
        except (TypeError, ValueError):
            C = ()
        if len(C) != 3 or not np.all(np.isfinite(C)) or min(C) < 0:
            errors["C"] = "must be three finite non-negative weights"
        else:
            object.__setattr__(self, "C", C)

        if not hasattr(self.target, "trace") and not callable(self.target):
            try:
                target = np.asarray(self.target, dtype=float)
            except (TypeError, ValueError):
                target = np.array([np.nan])
            if target.shape != (3,) or not np.all(np.isfinite(target)):
                errors["target"] = "must be three finite values, a function or a trace target"
            else:
                object.__setattr__(self, "target", tuple(target.tolist()))
        if errors:
            raise ValidationError(errors)

    @property
    def squared(self):
        return np.square(self.C)

    @property
    def is_zero(self):
        return not any(self.C)

    def target_trace(self, t, space, faces):
        """Target at the face quadrature points, shape (n_faces, 3, nqe)."""
        if hasattr(self.target, "trace"):
            return self.target.trace(t, space, faces)
        points = space.face_points[faces]
        if callable(self.target):
            x, y = points[..., 0], points[..., 1]
            components = self.target(t, x, y)
            values = np.stack(
                [np.broadcast_to(np.asarray(v, dtype=float), x.shape) for v in components], axis=1
            )
        else:
            shape = (len(faces), 3, points.shape[1])
            values = np.broadcast_to(np.asarray(self.target)[None, :, None], shape)
        if not np.all(np.isfinite(values)):
            raise AdjointError(f"objective target is not finite at t={t:.6g}")
        return values


def shore_state(U, space, bathymetry, faces):
    """U_hat = (H + z, Q) traced on boundary faces, shape (n_faces, 3, nqe)."""
    trace = space.face_trace(U, 0, faces).copy()
    trace[:, 0] += bathymetry.face_values(0, faces)
    return trace


class TraceTarget:
    """
    Shore target read off a solved forward trajectory, linear in time between
    stored levels. Used to build scenarios whose mismatch vanishes on the
    reference geometry.
    """

    def __init__(self, trajectory, bathymetry):
        self.trajectory = trajectory
        self.bathymetry = bathymetry
        self.times = np.asarray(trajectory.times, dtype=float)

    def _level(self, index, faces):
        space = self.trajectory.space
        return shore_state(self.trajectory.states[index], space, self.bathymetry, faces)

    def trace(self, t, space, faces):
        reference = self.trajectory.space
        if space.n_cells != reference.n_cells or len(space.face_cells) != len(
            reference.face_cells
        ):
            raise AdjointError("trace target was recorded on a different mesh topology")
        if len(self.times) == 1:
            return self._level(0, faces)
        t = min(max(float(t), self.times[0]), self.times[-1])
        upper = int(np.clip(np.searchsorted(self.times, t), 1, len(self.times) - 1))
        lower = upper - 1
        theta = (t - self.times[lower]) / (self.times[upper] - self.times[lower])
        return (1.0 - theta) * self._level(lower, faces) + theta * self._level(upper, faces)
