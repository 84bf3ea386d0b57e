from apps.mesh_core.exceptions import ShoreOptError


class AdjointError(ShoreOptError):
    """The adjoint solve cannot be set up or produced non-finite values."""
