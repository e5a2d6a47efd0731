"""Beatty and Piatetski-Shapiro sequences: terms and exact membership tests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import gmpy2
import numpy as np

from .errors import InvalidInput, PrecisionExhausted
from .reals import (
    Quad,
    Real,
    RealSpec,
    as_real,
    as_spec,
    certified_ceil,
    certified_floor,
    certified_sign,
    iroot,
)

MAX_INDEX = 10**12
THEOREM_C_LIMIT = Fraction(14, 13)

__all__ = [
    "BeattyParams",
    "PSParams",
    "beatty_term",
    "beatty_contains",
    "beatty_index",
    "chi_a",
    "ps_term",
    "ps_indicator",
    "certified_floor",
]


class _LinearForm:
    """t(m) = (P1*m + P0 + (Q1*m + Q0)*sqrt(d)) / D, evaluated with integers only."""

    __slots__ = ("P1", "P0", "Q1", "Q0", "D", "d")

    def __init__(self, slope: Quad, offset: Quad):
        d = slope.d if slope.B else offset.d
        D = slope.D * offset.D
        self.P1, self.Q1 = slope.A * offset.D, slope.B * offset.D
        self.P0, self.Q0 = offset.A * slope.D, offset.B * slope.D
        self.D, self.d = D, d

    def floor(self, m: int) -> int:
        A = self.P1 * m + self.P0
        B = self.Q1 * m + self.Q0
        if B == 0:
            return A // self.D
        r = math.isqrt(B * B * self.d)
        return (A + r if B > 0 else A - r - 1) // self.D

    def ceil(self, m: int) -> int:
        A = -(self.P1 * m + self.P0)
        B = -(self.Q1 * m + self.Q0)
        if B == 0:
            return -(A // self.D)
        r = math.isqrt(B * B * self.d)
        return -((A + r if B > 0 else A - r - 1) // self.D)

    def is_integer(self, m: int) -> bool:
        return self.Q1 * m + self.Q0 == 0 and (self.P1 * m + self.P0) % self.D == 0


def _linear_form(slope: Real, offset: Real) -> _LinearForm | None:
    if isinstance(slope, Quad) and isinstance(offset, Quad) and slope.compatible(offset):
        return _LinearForm(slope, offset)
    return None


@dataclass(frozen=True)
class BeattyParams:
    """alpha > 1 and beta; a = 1/alpha and b = (1 - beta)/alpha are derived."""

    alpha: RealSpec
    beta: RealSpec

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_spec(self.alpha))
        object.__setattr__(self, "beta", as_spec(self.beta))
        if certified_sign(self.alpha.to_real() - 1) <= 0:
            raise InvalidInput("alpha must exceed 1")

    @cached_property
    def alpha_real(self) -> Real:
        return self.alpha.to_real()

    @cached_property
    def beta_real(self) -> Real:
        return self.beta.to_real()

    @cached_property
    def a(self) -> Real:
        return self.alpha_real.inverse()

    @cached_property
    def b(self) -> Real:
        return (1 - self.beta_real) * self.a

    @cached_property
    def _term_form(self):
        return _linear_form(self.alpha_real, self.beta_real)

    @cached_property
    def _t_form(self):
        return _linear_form(self.a, self.b)

    @cached_property
    def _t_minus_a_form(self):
        return _linear_form(self.a, self.b - self.a)

    def __getstate__(self):
        # cached reals are cheap to rebuild; ship only the specs to workers
        return {"alpha": self.alpha, "beta": self.beta}

    def __setstate__(self, state):
        object.__setattr__(self, "alpha", state["alpha"])
        object.__setattr__(self, "beta", state["beta"])

    def params(self) -> dict:
        return {"alpha": str(self.alpha), "beta": str(self.beta)}


def _check_index(n: int, name: str = "n"):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidInput(f"{name} must be an integer")
    if not 1 <= n <= MAX_INDEX:
        raise InvalidInput(f"{name} must lie in [1, 10^12]")


def beatty_term(B: BeattyParams, n: int) -> int:
    """floor(alpha*n + beta), exactly."""
    _check_index(n)
    n = int(n)
    form = B._term_form
    if form is not None:
        return form.floor(n)
    return certified_floor(B.alpha_real * n + B.beta_real)


def chi_a(B: BeattyParams, t) -> int:
    """1 if 0 < {t} <= a, else 0."""
    t = as_real(t)
    f = certified_floor(t)
    frac = t - f
    if certified_sign(frac) == 0:
        return 0
    return 1 if certified_sign(B.a - frac) >= 0 else 0


def beatty_index(B: BeattyParams, m: int) -> int | None:
    """The n >= 1 with floor(alpha*n + beta) == m, or None."""
    _check_index(m, "m")
    m = int(m)
    t_form, s_form = B._t_form, B._t_minus_a_form
    if t_form is not None and s_form is not None:
        # the only candidate is the integer in [t - a, t), t = a*m + b
        if t_form.is_integer(m):
            return None
        n = t_form.floor(m)
        if s_form.ceil(m) > n or n < 1:
            return None
        return n
    t = B.a * m + B.b
    if not chi_a(B, t):
        return None
    n = certified_floor(t)
    return n if n >= 1 else None


def beatty_contains(B: BeattyParams, m: int) -> int:
    """1 if m is a term of the Beatty sequence (with index n >= 1), else 0."""
    return 0 if beatty_index(B, m) is None else 1


def beatty_terms(B: BeattyParams, n_start: int, n_stop: int) -> list[int]:
    return [beatty_term(B, n) for n in range(n_start, n_stop)]


# ---------------------------------------------------------------------------
# Piatetski-Shapiro


@dataclass(frozen=True)
class PSParams:
    """Rational exponent c = p/q with 1 < c < 2; gamma = 1/c = q/p."""

    c: Fraction

    def __post_init__(self):
        c = self.c
        if isinstance(c, RealSpec):
            if not c.is_rational:
                raise InvalidInput("c must be rational")
            c = Fraction(*c.data)
        elif isinstance(c, str):
            try:
                c = Fraction(c.removeprefix("rat:"))
            except ValueError:
                raise InvalidInput(f"cannot parse c = {self.c!r}") from None
        else:
            c = Fraction(c)
        if not 1 < c < 2:
            raise InvalidInput("c must lie strictly between 1 and 2")
        object.__setattr__(self, "c", c)

    @property
    def p(self) -> int:
        return self.c.numerator

    @property
    def q(self) -> int:
        return self.c.denominator

    @property
    def gamma(self) -> Fraction:
        return 1 / self.c

    @property
    def theorem_range(self) -> bool:
        return self.c < THEOREM_C_LIMIT

    def params(self) -> dict:
        return {"c": f"{self.p}/{self.q}"}


def ps_term(P: PSParams, n: int) -> int:
    """floor(n^c) as the integer q-th root of n^p."""
    _check_index(n)
    return iroot(int(n) ** P.p, P.q)[0]


def ceil_gamma_power(P: PSParams, m: int) -> int:
    """ceil(m^gamma), exact (m^gamma is an integer iff m is a perfect p-th power)."""
    r, exact = gmpy2.iroot(gmpy2.mpz(m) ** P.q, P.p)
    return int(r) + (0 if exact else 1)


def ps_indicator(P: PSParams, m: int) -> int:
    """floor(-m^gamma) - floor(-(m+1)^gamma)."""
    _check_index(m, "m")
    m = int(m)
    return ceil_gamma_power(P, m + 1) - ceil_gamma_power(P, m)


def ps_indicator_range(P: PSParams, start: int, stop: int) -> np.ndarray:
    """ps_indicator(m) for start <= m < stop as a uint8 array."""
    if start < 1 or stop > MAX_INDEX + 1 or stop < start:
        raise InvalidInput("range must lie in [1, 10^12]")
    p, q = P.p, P.q
    root = gmpy2.iroot
    mpz = gmpy2.mpz
    ceils = np.fromiter(
        (int(r) + (not ok) for r, ok in (root(mpz(m) ** q, p) for m in range(start, stop + 1))),
        dtype=np.int64,
        count=stop - start + 1,
    )
    return np.diff(ceils).astype(np.uint8)


def ps_terms(P: PSParams, n_start: int, n_stop: int) -> np.ndarray:
    """floor(n^c) for n_start <= n < n_stop (int64)."""
    p, q = P.p, P.q
    root = gmpy2.iroot
    mpz = gmpy2.mpz
    return np.fromiter(
        (int(root(mpz(n) ** p, q)[0]) for n in range(n_start, n_stop)),
        dtype=np.int64,
        count=max(0, n_stop - n_start),
    )


def ps_first_index_above(P: PSParams, y: int) -> int:
    """Smallest n >= 1 with floor(n^c) > y (y >= 0)."""
    # floor(n^c) > y  <=>  n^c >= y + 1  <=>  n >= (y + 1)^gamma
    return max(1, ceil_gamma_power(P, y + 1))
