from dataclasses import dataclass

from django.core.exceptions import ValidationError


@dataclass(frozen=True)
class LineSearchParams:
    """Backtracking over the steps rho0 * shrink**k for k = 0..max_halvings."""

    rho0: float = 1.0
    shrink: float = 0.5
    max_halvings: int = 20

    def __post_init__(self):
        errors = {}
        if not self.rho0 > 0:
            errors["rho0"] = "must be positive"
        if not 0 < self.shrink < 1:
            errors["shrink"] = "must lie in (0, 1)"
        if int(self.max_halvings) < 0:
            errors["max_halvings"] = "must be non-negative"
        if errors:
            raise ValidationError(errors)

    @property
    def steps(self):
        return [self.rho0 * self.shrink**k for k in range(int(self.max_halvings) + 1)]


@dataclass(frozen=True)
class OptimizerParams:
    eps_stop: float = 1e-4
    max_iterations: int = 200

    def __post_init__(self):
        errors = {}
        if not self.eps_stop >= 0:
            errors["eps_stop"] = "must be non-negative"
        if int(self.max_iterations) < 0:
            errors["max_iterations"] = "must be non-negative"
        if errors:
            raise ValidationError(errors)
