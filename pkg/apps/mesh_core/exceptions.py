class ShoreOptError(Exception):
    """Base class for every error raised by the shoreopt apps."""


class MeshError(ShoreOptError):
    """The triangulation violates a mesh invariant."""


class MeshFormatError(MeshError):
    """A mesh file could not be parsed or carries unknown boundary tags."""


class MeshWriteError(MeshError):
    """A mesh or field file could not be written."""
