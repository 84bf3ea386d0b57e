from apps.mesh_core.exceptions import ShoreOptError


class QuadratureError(ShoreOptError):
    """No quadrature rule exists for the requested degree."""


class SingularMassError(ShoreOptError):
    """A cell mass block cannot be inverted."""


class FieldShapeError(ShoreOptError):
    """DG coefficients do not match the space they are used with."""
