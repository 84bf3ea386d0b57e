from apps.mesh_core.exceptions import ShoreOptError


class OptimizerError(ShoreOptError):
    """The shape optimization problem cannot be set up on the given mesh."""
