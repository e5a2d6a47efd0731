"""Primes in Beatty and Piatetski-Shapiro sequences: exact membership, counting and verification tools."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BeattyPSError,
    HypothesisViolated,
    IndexOutOfRange,
    InvalidInput,
    PrecisionExhausted,
    TermBudgetExceeded,
    WindowTooLarge,
)
from .reals import RealSpec, precision_budget  # noqa: E402
from .sequences import BeattyParams, PSParams  # noqa: E402
