from apps.mesh_core.exceptions import ShoreOptError


class GradientError(ShoreOptError):
    """Forward and adjoint data do not fit together, or the gradient is inconsistent."""


class ElasticityError(ShoreOptError):
    """The Lame or elasticity system could not be solved."""
