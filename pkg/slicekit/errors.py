# slicekit/errors.py
"""Exception types raised across the package."""


class SlicekitError(Exception):
    """Base class for every error raised by slicekit."""


class InvalidArgumentError(SlicekitError, ValueError):
    """An argument violates an operation's precondition."""


class InvalidStateError(SlicekitError):
    """An object was used in a state that does not allow the call."""


class DegenerateGradientError(SlicekitError):
    """The SW_2 gradient is undefined because the distance is (numerically) zero."""


class IllConditionedError(SlicekitError):
    """A kernel matrix could not be factorized even at the largest jitter."""


class ProblemTooLargeError(SlicekitError):
    """The exact solver was asked for more points than its guard allows."""


class FormatError(SlicekitError):
    """An input file (point cloud, image, config) could not be parsed."""


class SlicekitInternalError(SlicekitError):
    """Something that should be impossible happened."""
