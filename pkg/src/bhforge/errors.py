"""Exception types shared across the package."""


class BhForgeError(Exception):
    """Base class for all package-specific errors."""


class PrecisionCapExceeded(BhForgeError):
    """Precision escalation passed the configured hard cap without deciding."""

    def __init__(self, message, bits=None):
        super().__init__(message)
        self.bits = bits


class Undecided(PrecisionCapExceeded):
    """A certified comparison could not be decided at cap precision.

    Subclass of PrecisionCapExceeded: caller exhausted the escalation budget.
    """


class ShellTooSmall(BhForgeError):
    """Shell index K below the admissible minimum h+1."""


class MalformedEncoding(BhForgeError):
    """Big integer does not follow the marker/block/filler bit layout."""


class SearchBudgetExceeded(BhForgeError):
    """Collision enumeration would exceed the configured budget.

    `partial` carries any partial results; they are flagged invalid and
    must not be interpreted as a complete search.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InsufficientData(BhForgeError):
    """Not enough data points for the requested estimate."""


class RadiusTooLarge(BhForgeError):
    """Lattice enumeration radius above the desk-scale guard."""
