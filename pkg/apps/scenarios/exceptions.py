from apps.mesh_core.exceptions import ShoreOptError


class ScenarioError(ShoreOptError):
    """A scenario input is missing, unreadable or inconsistent."""
