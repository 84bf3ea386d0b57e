"""Physical and numerical parameters of the shallow-water solver."""

from dataclasses import dataclass, field, replace

from django.core.exceptions import ValidationError
from django.db import models


class FluxKind(models.TextChoices):
    LLF = "llf", "Local Lax-Friedrichs"
    HLLE = "hlle", "HLLE"


class TimeScheme(models.TextChoices):
    FORWARD_EULER = "forward_euler", "Forward Euler"
    SSPRK2 = "ssprk2", "SSP Runge-Kutta 2"


@dataclass(frozen=True)
class ShockSensor:
    """Smooth ramp from the modal-decay sensor value to the artificial viscosity."""

    s0: float = -2.0
    kappa: float = 1.0
    eps_max: float = 0.05

    def __post_init__(self):
        errors = {}
        if not self.kappa > 0:
            errors["kappa"] = "must be positive"
        if not self.eps_max >= 0:
            errors["eps_max"] = "must be non-negative"
        if errors:
            raise ValidationError(errors)


@dataclass(frozen=True)
class SWEParams:
    g: float = 9.81
    c_f: float = 0.049
    eps_f: tuple = (0.01, 0.01)
    sensor: ShockSensor = field(default_factory=ShockSensor)
    C_IP: float = 20.0
    cfl: float = 0.3
    flux_kind: str = FluxKind.HLLE
    well_balanced: bool = True
    dt_max: float = 5e-3
    H1: float = 1.0
    order: int = 1
    # Accepted for compatibility with implicit setups; explicit stepping ignores them.
    newton_abs_tol: float = 1e-6
    newton_rel_tol: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "eps_f", tuple(float(e) for e in self.eps_f))
        object.__setattr__(self, "flux_kind", FluxKind(self.flux_kind))
        errors = {}
        if not self.g > 0:
            errors["g"] = "must be positive"
        if not self.c_f >= 0:
            errors["c_f"] = "must be non-negative"
        if len(self.eps_f) != 2 or min(self.eps_f) < 0:
            errors["eps_f"] = "must be two non-negative diffusivities"
        if not self.C_IP > 0:
            errors["C_IP"] = "must be positive"
        if not 0 < self.cfl <= 1:
            errors["cfl"] = "must lie in (0, 1]"
        if not self.dt_max > 0:
            errors["dt_max"] = "must be positive"
        if not self.H1 > 0:
            errors["H1"] = "must be positive"
        if self.order < 1:
            errors["order"] = "must be at least 1"
        if errors:
            raise ValidationError(errors)

    def replace(self, **changes):
        return replace(self, **changes)
