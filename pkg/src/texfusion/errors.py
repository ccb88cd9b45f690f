"""Exception types raised by the texfusion package."""


class TexfusionError(Exception):
    """Base class for all texfusion errors."""


class MeshFormatError(TexfusionError):
    """Mesh file could not be parsed.

    Carries the 1-based line number of the offending record when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingUVError(MeshFormatError):
    """Mesh has no texture-atlas coordinates; we refuse to invent one."""


class DegenerateMeshError(TexfusionError):
    """All mesh vertices coincide (no usable geometry)."""


class SequenceError(TexfusionError):
    """Frame sequence on disk is inconsistent (counts, sizes, poses)."""


class EmptyImageError(TexfusionError):
    """An operation received an image with zero pixels."""


class BehindCameraError(TexfusionError):
    """Object lies entirely behind the camera."""


class ObjectNotVisibleError(TexfusionError):
    """Object projects to zero pixels in the requested view."""


class SceneSpecError(TexfusionError):
    """Synthetic scene description is invalid (unknown primitive, texture...)."""
