from apps.mesh_core.exceptions import ShoreOptError


class SWEError(ShoreOptError):
    """The shallow-water solve cannot continue."""


class PositivityError(SWEError):
    """The water height dropped below the positivity threshold."""

    def __init__(self, message, time=None, cell=None):
        super().__init__(message)
        self.time = time
        self.cell = cell


class NonFiniteStateError(SWEError):
    """The state picked up NaN or infinite values."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
