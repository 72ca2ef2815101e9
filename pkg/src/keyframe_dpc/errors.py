"""Exception hierarchy shared by the toolkit."""


class KeyframeError(ValueError):
    """Base class for all errors raised by keyframe_dpc."""


class MalformedInputError(KeyframeError):
    """An input file or array does not satisfy its declared format."""


class DimensionMismatchError(KeyframeError):
    """Array shapes disagree with each other or with a parameter set."""


class DegenerateInputError(KeyframeError):
    """The input has too few distinct points for the requested computation."""
