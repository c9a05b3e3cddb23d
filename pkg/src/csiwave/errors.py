"""Exception types shared across the package.

Every error raised by csiwave derives from :class:`CsiWaveError`, so callers
can catch one base class at pipeline boundaries while tests assert the
specific subtype.
"""


class CsiWaveError(Exception):
    """Base class for all csiwave errors."""


class InvalidValue(CsiWaveError, ValueError):
    """An argument violates a documented precondition (non-finite, negative,
    out of range, wrong count)."""


class FormatError(CsiWaveError):
    """A file does not conform to one of the csiwave interchange formats.

    Carries human-readable context (line/column for text, byte counts for
    binary) in the message.
    """


class ShapeError(CsiWaveError):
    """Array shapes are incompatible for the requested operation."""


class NumericalError(CsiWaveError):
    """A numerical routine failed to converge or produced non-finite values."""


class NoActivity(CsiWaveError):
    """Segmentation found no activity: the motion profile is identically zero."""


class SegmentationFailed(CsiWaveError):
    """No threshold scale produced a segment within the configured length
    bounds. ``best_p`` / ``best_t`` record the closest attempt."""

    def __init__(self, message: str, best_p: float, best_t: float):
        super().__init__(message)
        self.best_p = best_p
        self.best_t = best_t
