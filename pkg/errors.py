"""Exception types raised by the background initialization pipeline."""


class SPMDError(Exception):
    """Base class for all pipeline errors."""


class InvalidInputError(SPMDError, ValueError):
    """Input data or parameters violate a documented precondition."""


class DimensionMismatchError(InvalidInputError):
    """Two frames (or a frame and a mask/labeling) differ in size."""


class EmptySequenceError(InvalidInputError):
    """A sequence with no frames was supplied."""


class InvalidSceneError(InvalidInputError):
    """A synthetic scene script cannot be rendered."""


class FrameDecodeError(SPMDError):
    """An image file could not be decoded."""


class FallbackRequiredError(SPMDError):
    """No density cluster exists at a position; a fallback must decide."""
