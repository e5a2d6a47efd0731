"""Exception types shared by every module."""


class BeattyPSError(Exception):
    """Base class for library errors."""


class InvalidInput(BeattyPSError, ValueError):
    pass


class PrecisionExhausted(BeattyPSError, ArithmeticError):
    """A comparison or floor could not be certified within the precision budget."""


class IndexOutOfRange(BeattyPSError, IndexError):
    pass


class WindowTooLarge(BeattyPSError, ValueError):
    pass


class TermBudgetExceeded(BeattyPSError, ValueError):
    pass


class HypothesisViolated(BeattyPSError, ValueError):
    """Parameters fall outside the range in which a bound is claimed."""
