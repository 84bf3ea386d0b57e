"""
Analytic bathymetries and initial conditions selectable from a scenario file.

Each entry is a fixed formula with numeric parameters. The initial state is
given through its free surface H + z with zero discharge.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from django.db import models

from apps.scenarios.scatter import ingest_bathymetry
from apps.swe_forward.bathymetry import Bathymetry

logger = logging.getLogger(__name__)


class BedKind(models.TextChoices):
    FLAT = "flat", "Flat bed"
    LINEAR = "linear", "Linear slope"
    GAUSSIAN_BUMP = "gaussian_bump", "Gaussian bump"
    SCATTER = "scatter", "Scattered samples"


class InitialKind(models.TextChoices):
    LAKE_AT_REST = "lake_at_rest", "Lake at rest"
    GAUSSIAN = "gaussian", "Gaussian surface hump"


BED_DEFAULTS = {
    BedKind.FLAT: {"level": 0.0},
    BedKind.LINEAR: {"z0": 0.5, "sx": 0.0, "sy": -0.25},
    BedKind.GAUSSIAN_BUMP: {"base": 0.0, "amplitude": 1.0, "width": 6.0, "x0": 0.4, "y0": 0.2},
    BedKind.SCATTER: {"path": ""},
}

INITIAL_DEFAULTS = {
    InitialKind.LAKE_AT_REST: {"level": 1.0},
    InitialKind.GAUSSIAN: {"level": 1.0, "amplitude": 1.0, "width": 15.0, "x0": 0.0, "y0": 1.0},
}


def gaussian(x, y, amplitude, width, x0, y0):
    return amplitude * np.exp(-width * ((x - x0) ** 2 + (y - y0) ** 2))


def bed_function(kind, params):
    """z(x, y) of an analytic bed."""
    kind = BedKind(kind)
    if kind == BedKind.FLAT:
        return lambda x, y: np.full_like(x, params["level"], dtype=float)
    if kind == BedKind.LINEAR:
        return lambda x, y: params["z0"] + params["sx"] * x + params["sy"] * y
    if kind == BedKind.GAUSSIAN_BUMP:
        return lambda x, y: params["base"] + gaussian(
            x, y, params["amplitude"], params["width"], params["x0"], params["y0"]
        )
    raise ValueError(f"{kind.label} has no analytic formula")


def surface_function(kind, params):
    """Free surface H + z of an initial condition."""
    kind = InitialKind(kind)
    if kind == InitialKind.LAKE_AT_REST:
        return lambda x, y: np.full_like(x, params["level"], dtype=float)
    return lambda x, y: params["level"] + gaussian(
        x, y, params["amplitude"], params["width"], params["x0"], params["y0"]
    )


@dataclass(frozen=True)
class BedSpec:
    """Bathymetry entry; calling it with a DG space returns the Bathymetry."""

    kind: str = BedKind.LINEAR
    params: dict = field(default_factory=dict)
    scatter: object = field(default=None, compare=False, repr=False)

    def __call__(self, space):
        if BedKind(self.kind) == BedKind.SCATTER:
            return ingest_bathymetry(space, self.scatter)
        return Bathymetry.from_function(space, bed_function(self.kind, self.params))


@dataclass(frozen=True)
class InitialSpec:
    """Initial condition entry; calling it returns U0 = (surface - z, 0, 0)."""

    kind: str = InitialKind.GAUSSIAN
    params: dict = field(default_factory=dict)

    def __call__(self, space, bathymetry):
        surface = surface_function(self.kind, self.params)
        U0 = space.project(lambda x, y: (surface(x, y), 0.0, 0.0))
        U0.coeffs[:, 0] -= bathymetry.z.coeffs[:, 0]
        return U0
