"""Shore mismatch objective and the time rule shared with the shape derivative."""

import logging

import numpy as np
from django.db import models

from apps.mesh_core.mesh import BoundaryTag
from apps.swe_adjoint.weights import shore_state

logger = logging.getLogger(__name__)


class TimeRule(models.TextChoices):
    TRAPEZOID = "trapezoid", "Trapezoid"
    LEFT = "left", "Left rectangle"


def level_weights(times, rule=TimeRule.TRAPEZOID):
    """Quadrature weight of every stored time level."""
    times = np.asarray(times, dtype=float)
    dts = np.diff(times)
    weights = np.zeros(len(times))
    if TimeRule(rule) == TimeRule.LEFT:
        weights[:-1] = dts
    else:
        weights[:-1] += 0.5 * dts
        weights[1:] += 0.5 * dts
    return weights


def shore_mismatch(U, time, space, bathymetry, weights, faces=None):
    """1/2 int_Gamma1 |C (U_hat - U~)|^2 ds at one time level."""
    if faces is None:
        faces = space.mesh.topology.faces_with_tag(BoundaryTag.SHORE)
    if len(faces) == 0:
        return 0.0
    difference = shore_state(U, space, bathymetry, faces) - weights.target_trace(
        time, space, faces
    )
    weighted = weights.squared[None, :, None] * difference**2
    return 0.5 * float(np.einsum("fq,fcq->", space.face_weights[faces], weighted))


def objective_J1(forward, bathymetry, weights, rule=TimeRule.TRAPEZOID):
    """Time integral of the shore mismatch over a forward trajectory."""
    space = forward.space
    faces = space.mesh.topology.faces_with_tag(BoundaryTag.SHORE)
    if weights.is_zero or len(faces) == 0:
        return 0.0
    level = level_weights(forward.times, rule)
    total = 0.0
    for weight, time, U in zip(level, forward.times, forward.states):
        if weight:
            total += weight * shore_mismatch(U, time, space, bathymetry, weights, faces)
    return total
