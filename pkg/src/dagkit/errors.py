"""Exception types shared across modules."""


class DegreeError(ValueError):
    """A declared differential or map does not respect degrees."""


class UndecidableError(RuntimeError):
    """The requested property cannot be decided by the implemented routes."""


class NotSquareZeroError(ValueError):
    """The kernel of a surjection does not square to zero."""


class PrecisionError(ValueError):
    """A truncation parameter is too small for the requested output."""
