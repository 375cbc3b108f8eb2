"""Exception types raised across the package."""


class TooLargeError(ValueError):
    """The requested size exceeds what an exact method supports."""


class ValidityRangeError(ValueError):
    """A closed-form evaluation was requested outside the range where it holds."""


class InvariantError(RuntimeError):
    """An internal invariant failed; this indicates a bug, not bad input."""
