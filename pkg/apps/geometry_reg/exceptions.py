from apps.mesh_core.exceptions import ShoreOptError


class EikonalError(ShoreOptError):
    """The stabilized Eikonal iteration did not converge."""
