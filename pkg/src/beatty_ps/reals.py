"""Exact and certified real arithmetic.

Two kinds of numbers live here:

* ``Quad``: an element (A + B*sqrt(d))/D of a real quadratic field (or of Q when
  B == 0), held as Python integers.  Floors, signs and comparisons are exact,
  decided with integer square roots.
* lazy nodes (``DecimalReal``, ``CFPrefixReal``, ``IntPow`` and the arithmetic
  combinators) that only know rational enclosures.  Certified operations ask for
  an enclosure, and double the working precision up to the configured number of
  times before giving up with ``PrecisionExhausted``.

``RealSpec`` is the user-facing, serialisable description of a parameter.
"""
from __future__ import annotations

import math
import re
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import gmpy2

from .errors import InvalidInput, PrecisionExhausted

# (initial bits, number of doublings)
_BUDGET: ContextVar[tuple[int, int]] = ContextVar("precision_budget", default=(64, 4))


@contextmanager
def precision_budget(bits: int = 64, escalations: int = 4) -> Iterator[None]:
    """Temporarily change the working precision used by certified operations."""
    if bits < 8 or escalations < 0:
        raise InvalidInput("precision budget must have bits >= 8 and escalations >= 0")
    token = _BUDGET.set((bits, escalations))
    try:
        yield
    finally:
        _BUDGET.reset(token)


def current_budget() -> tuple[int, int]:
    return _BUDGET.get()


def _bit_schedule() -> list[int]:
    bits, esc = _BUDGET.get()
    return [bits << i for i in range(esc + 1)]


def iroot(x: int, k: int) -> tuple[int, bool]:
    """(floor(x**(1/k)), exact) for integer x >= 0."""
    if x < 0:
        raise InvalidInput("iroot of a negative number")
    r, exact = gmpy2.iroot(gmpy2.mpz(x), k)
    return int(r), bool(exact)


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (s, d) with n == s*s*d and d square-free."""
    if n <= 0:
        raise InvalidInput("squarefree_decompose needs n > 0")
    s, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    return s, d * m


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


class _Undetermined(Exception):
    """Raised inside enclosures that cannot be formed at the current precision."""


Number = Union[int, Fraction, "Real"]


class Real:
    """A real number known through rational enclosures."""

    exact: "Quad | None" = None

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    # arithmetic builds Quad results when possible, lazy nodes otherwise
    def __add__(self, other):
        other = as_real(other)
        if self.exact is not None and other.exact is not None and self.exact.compatible(other.exact):
            return self.exact._add(other.exact)
        return _Sum(self, other)

    def __radd__(self, other):
        return as_real(other) + self

    def __neg__(self):
        if self.exact is not None:
            return self.exact._neg()
        return _Scale(self, Fraction(-1))

    def __sub__(self, other):
        return self + (-as_real(other))

    def __rsub__(self, other):
        return as_real(other) + (-self)

    def __mul__(self, other):
        other = as_real(other)
        if self.exact is not None and other.exact is not None and self.exact.compatible(other.exact):
            return self.exact._mul(other.exact)
        if other.exact is not None and other.exact.is_rational():
            return _Scale(self, other.exact.to_fraction())
        if self.exact is not None and self.exact.is_rational():
            return _Scale(other, self.exact.to_fraction())
        return _Product(self, other)

    def __rmul__(self, other):
        return as_real(other) * self

    def inverse(self) -> "Real":
        if self.exact is not None:
            return self.exact._inverse()
        return _Inverse(self)

    def __truediv__(self, other):
        return self * as_real(other).inverse()

    def __rtruediv__(self, other):
        return as_real(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result: Real = Quad.from_int(1)
        base: Real = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __float__(self) -> float:
        lo, hi = self.enclose(64)
        return float((lo + hi) / 2)

    def mid(self, bits: int = 128) -> Fraction:
        lo, hi = self.enclose(bits)
        return (lo + hi) / 2


def as_real(x: Number) -> Real:
    if isinstance(x, Real):
        return x
    if isinstance(x, bool):
        raise InvalidInput("booleans are not real numbers here")
    if isinstance(x, int):
        return Quad.from_int(x)
    if isinstance(x, Fraction):
        return Quad.from_fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidInput("non-finite float")
        return Quad.from_fraction(Fraction(x))
    raise InvalidInput(f"cannot interpret {x!r} as an exact real")


class Quad(Real):
    """(A + B*sqrt(d)) / D with integers, D > 0, d square-free (d == 1 iff B == 0)."""

    __slots__ = ("A", "B", "D", "d")

    def __init__(self, A: int, B: int, D: int, d: int):
        if D == 0:
            raise ZeroDivisionError("zero denominator")
        if d < 1:
            raise InvalidInput("quadratic field needs d >= 1")
        if D < 0:
            A, B, D = -A, -B, -D
        if B == 0 or d == 1:
            A, B, d = A + B if d == 1 else A, 0, 1
        g = math.gcd(math.gcd(A, B), D)
        if g > 1:
            A, B, D = A // g, B // g, D // g
        self.A, self.B, self.D, self.d = A, B, D, d

    @property
    def exact(self) -> "Quad":  # type: ignore[override]
        return self

    @classmethod
    def from_int(cls, n: int) -> "Quad":
        return cls(n, 0, 1, 1)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "Quad":
        f = Fraction(f)
        return cls(f.numerator, 0, f.denominator, 1)

    @classmethod
    def sqrt(cls, n: int) -> "Quad":
        s, d = squarefree_decompose(n)
        if d == 1:
            return cls(s, 0, 1, 1)
        return cls(0, s, 1, d)

    def is_rational(self) -> bool:
        return self.B == 0

    def to_fraction(self) -> Fraction:
        if self.B:
            raise InvalidInput("irrational quadratic number has no Fraction form")
        return Fraction(self.A, self.D)

    def compatible(self, other: "Quad") -> bool:
        return self.B == 0 or other.B == 0 or self.d == other.d

    def _field(self, other: "Quad") -> int:
        return self.d if self.B else other.d

    def _add(self, o: "Quad") -> "Quad":
        d = self._field(o)
        return Quad(self.A * o.D + o.A * self.D, self.B * o.D + o.B * self.D, self.D * o.D, d)

    def _neg(self) -> "Quad":
        return Quad(-self.A, -self.B, self.D, self.d)

    def _mul(self, o: "Quad") -> "Quad":
        d = self._field(o)
        return Quad(self.A * o.A + self.B * o.B * d, self.A * o.B + self.B * o.A, self.D * o.D, d)

    def _inverse(self) -> "Quad":
        norm = self.A * self.A - self.B * self.B * self.d
        if norm == 0:
            raise ZeroDivisionError("inverse of zero")
        return Quad(self.D * self.A, -self.D * self.B, norm, self.d)

    def sign(self) -> int:
        A, B = self.A, self.B
        if B == 0:
            return (A > 0) - (A < 0)
        sb = 1 if B > 0 else -1
        if A == 0 or (A > 0) == (B > 0):
            return sb if A == 0 else (1 if A > 0 else -1)
        # opposite signs: compare A^2 with B^2 d (never equal, d non-square)
        return (1 if A > 0 else -1) if A * A > B * B * self.d else sb

    def floor(self) -> int:
        if self.B == 0:
            return self.A // self.D
        r = math.isqrt(self.B * self.B * self.d)
        # B^2 d is never a perfect square here
        num_floor = self.A + r if self.B > 0 else self.A - r - 1
        return num_floor // self.D

    def ceil(self) -> int:
        return -self._neg().floor()

    def frac(self) -> "Quad":
        return self._add(Quad.from_int(-self.floor()))

    def is_integer(self) -> bool:
        return self.B == 0 and self.D == 1

    def scaled_floor(self, bits: int) -> int:
        """floor(self * 2**bits), exactly."""
        return Quad(self.A << bits, self.B << bits, self.D, self.d).floor()

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        if self.B == 0:
            f = Fraction(self.A, self.D)
            return f, f
        s = self.scaled_floor(bits)
        return Fraction(s, 1 << bits), Fraction(s + 1, 1 << bits)

    def __float__(self) -> float:
        if self.B == 0:
            return self.A / self.D
        return float(Fraction(self.scaled_floor(80), 1 << 80))

    def __eq__(self, other) -> bool:
        try:
            other = as_real(other)
        except InvalidInput:
            return NotImplemented
        if not isinstance(other, Quad):
            return NotImplemented
        return (self.A, self.B, self.D, self.d) == (other.A, other.B, other.D, other.d)

    def __hash__(self) -> int:
        return hash((self.A, self.B, self.D, self.d))

    def _cmp(self, other) -> int:
        other = as_real(other)
        if isinstance(other, Quad) and self.compatible(other):
            return self._add(other._neg()).sign()
        return certified_sign(self - other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self) -> str:
        if self.B == 0:
            return f"Quad({Fraction(self.A, self.D)})"
        return f"Quad(({self.A}{self.B:+d}*sqrt({self.d}))/{self.D})"


def _round_out(lo: Fraction, hi: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    scale = 1 << bits
    return (Fraction(_floor_frac(lo * scale), scale), Fraction(_ceil_frac(hi * scale), scale))


class DecimalReal(Real):
    """An unknown real within ``radius`` of ``center``."""

    def __init__(self, center: Fraction, radius: Fraction):
        self.center, self.radius = center, radius

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        return self.center - self.radius, self.center + self.radius

    def __repr__(self) -> str:
        return f"DecimalReal({float(self.center)} +/- {float(self.radius):.1e})"


class CFPrefixReal(Real):
    """An irrational whose continued fraction starts with the given quotients."""

    def __init__(self, quotients: tuple[int, ...]):
        self.quotients = tuple(quotients)
        p0, q0, p1, q1 = 1, 0, self.quotients[0], 1
        for a in self.quotients[1:]:
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        ends = sorted([Fraction(p1, q1), Fraction(p1 + p0, q1 + q0)])
        self._lo, self._hi = ends

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        return self._lo, self._hi


class IntPow(Real):
    """base ** exponent for a non-negative integer base and a rational exponent."""

    def __init__(self, base: int, exponent: Fraction):
        exponent = Fraction(exponent)
        if base < 0:
            raise InvalidInput("IntPow needs a non-negative base")
        if exponent < 0:
            raise InvalidInput("IntPow needs a non-negative exponent")
        self.base, self.exponent = base, exponent
        p, q = exponent.numerator, exponent.denominator
        r, ok = iroot(base**p, q)
        self._floor = r
        self._exact = Quad.from_int(r) if ok else None

    @property
    def exact(self):  # type: ignore[override]
        return self._exact

    def floor(self) -> int:
        return self._floor

    def enclose(self, bits: int) -> tuple[Fraction, Fraction]:
        if self._exact is not None:
            v = Fraction(self._floor)
            return v, v
        p, q = self.exponent.numerator, self.exponent.denominator
        r, _ = iroot((self.base**p) << (bits * q), q)
        return Fraction(r, 1 << bits), Fraction(r + 1, 1 << bits)


class _Sum(Real):
    def __init__(self, x: Real, y: Real):
        self.x, self.y = x, y

    def enclose(self, bits):
        a, b = self.x.enclose(bits + 2)
        c, d = self.y.enclose(bits + 2)
        return _round_out(a + c, b + d, bits + 1)


class _Scale(Real):
    def __init__(self, x: Real, k: Fraction):
        self.x, self.k = x, Fraction(k)

    def enclose(self, bits):
        extra = max(0, abs(self.k.numerator).bit_length()) + 2
        a, b = self.x.enclose(bits + extra)
        lo, hi = sorted((a * self.k, b * self.k))
        return _round_out(lo, hi, bits + 1)


class _Product(Real):
    def __init__(self, x: Real, y: Real):
        self.x, self.y = x, y

    def enclose(self, bits):
        # magnitude-aware working precision
        a0, b0 = self.x.enclose(8)
        c0, d0 = self.y.enclose(8)
        mx = max(abs(a0), abs(b0), 1)
        my = max(abs(c0), abs(d0), 1)
        extra = _ceil_frac(Fraction(mx)).bit_length() + _ceil_frac(Fraction(my)).bit_length() + 2
        a, b = self.x.enclose(bits + extra)
        c, d = self.y.enclose(bits + extra)
        prods = (a * c, a * d, b * c, b * d)
        return _round_out(min(prods), max(prods), bits + 1)


class _Inverse(Real):
    def __init__(self, x: Real):
        self.x = x

    def enclose(self, bits):
        a, b = self.x.enclose(bits)
        if a <= 0 <= b:
            raise _Undetermined
        # |1/x| <= 1/min|x|: widen working precision by the size of 1/min|x|
        m = min(abs(a), abs(b))
        extra = 2 * _ceil_frac(1 / m).bit_length() + 2
        a, b = self.x.enclose(bits + extra)
        if a <= 0 <= b:
            raise _Undetermined
        lo, hi = sorted((1 / a, 1 / b))
        return _round_out(lo, hi, bits + 1)


def certified_floor(x: Number) -> int:
    """The integer f with f <= x < f + 1, or PrecisionExhausted."""
    if isinstance(x, bool):
        raise InvalidInput("booleans are not real numbers here")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return math.floor(x)
    x = as_real(x)
    if isinstance(x, Quad):
        return x.floor()
    if isinstance(x, IntPow):
        return x.floor()
    if x.exact is not None:
        return x.exact.floor()
    for bits in _bit_schedule():
        try:
            lo, hi = x.enclose(bits)
        except _Undetermined:
            continue
        f = _floor_frac(lo)
        if f == _floor_frac(hi):
            return f
    raise PrecisionExhausted("floor could not be certified within the precision budget")


def certified_ceil(x: Number) -> int:
    return -certified_floor(-as_real(x))


def certified_sign(x: Number) -> int:
    x = as_real(x)
    if x.exact is not None:
        return x.exact.sign()
    for bits in _bit_schedule():
        try:
            lo, hi = x.enclose(bits)
        except _Undetermined:
            continue
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if lo == hi == 0:
            return 0
    raise PrecisionExhausted("sign could not be certified within the precision budget")


def fixed_frac(x: Number, bits: int = 64) -> int:
    """F with F <= {x} * 2**bits < F + 1 (exact for quadratic inputs)."""
    x = as_real(x)
    if x.exact is not None:
        return x.exact.scaled_floor(bits) & ((1 << bits) - 1)
    scaled = x * (1 << bits)
    return certified_floor(scaled) & ((1 << bits) - 1)


def to_mpf(x: Number, dps: int = 40):
    """mpmath value of x correct to about ``dps`` digits (midpoint of an enclosure)."""
    import mpmath

    bits = int(dps * 3.33) + 16
    x = as_real(x)
    lo, hi = x.enclose(bits)
    if hi - lo > Fraction(1, 10 ** (dps - 2)) * max(1, abs(lo)):
        raise PrecisionExhausted("value not known to the requested number of digits")
    m = (lo + hi) / 2
    with mpmath.workdps(dps + 5):
        return mpmath.mpf(m.numerator) / m.denominator


# ---------------------------------------------------------------------------
# RealSpec: textual / serialisable parameters

_SURD_RE = re.compile(
    r"^\(\s*([+-]?\d+)\s*([+-])\s*(\d*)\s*\*?\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*(?:/\s*(\d+))?$"
)
_SQRT_ALIAS = re.compile(r"^sqrt(\d+)$")
_DEC_RE = re.compile(r"^([+-]?\d+(?:\.\d*)?|[+-]?\.\d+)@(\d+)$")


@dataclass(frozen=True)
class RealSpec:
    """Exactly analysable description of a real parameter.

    kinds: ``rational`` (p, q); ``quadratic`` (p, q, d, r) meaning (p + q*sqrt(d))/r;
    ``cf_prefix`` (a0, a1, ...); ``decimal`` (digits, precision).
    """

    kind: str
    data: tuple

    def __post_init__(self):
        k, v = self.kind, self.data
        if k == "rational":
            p, q = v
            if q <= 0 or math.gcd(abs(p), q) != 1:
                raise InvalidInput("rational spec must be normalised with q > 0")
        elif k == "quadratic":
            p, q, d, r = v
            if r <= 0 or q == 0 or squarefree_decompose(d) != (1, d) or d < 2:
                raise InvalidInput("quadratic spec must have r > 0, q != 0, d square-free > 1")
        elif k == "cf_prefix":
            if len(v) < 1 or any(a < 1 for a in v[1:]):
                raise InvalidInput("partial quotients after the first must be >= 1")
        elif k == "decimal":
            digits, prec = v
            if prec < 30:
                raise InvalidInput("decimal specs need a stated precision of at least 30 digits")
            Fraction(digits)
        else:
            raise InvalidInput(f"unknown RealSpec kind {k!r}")

    # constructors
    @classmethod
    def rational(cls, p: int, q: int = 1) -> "RealSpec":
        if q == 0:
            raise InvalidInput("zero denominator")
        f = Fraction(p, q)
        return cls("rational", (f.numerator, f.denominator))

    @classmethod
    def quadratic(cls, p: int, q: int, d: int, r: int = 1) -> "RealSpec":
        if r == 0:
            raise InvalidInput("zero denominator")
        if d <= 0:
            raise InvalidInput("quadratic spec needs d > 0")
        s, d = squarefree_decompose(d)
        q *= s
        if d == 1 or q == 0:
            return cls.rational(p + q, r)
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        return cls("quadratic", (p // g, q // g, d, r // g))

    @classmethod
    def cf_prefix(cls, quotients) -> "RealSpec":
        return cls("cf_prefix", tuple(int(a) for a in quotients))

    @classmethod
    def decimal(cls, digits: str, precision: int) -> "RealSpec":
        return cls("decimal", (str(digits), int(precision)))

    @classmethod
    def parse(cls, text: str) -> "RealSpec":
        t = text.strip()
        low = t.lower()
        if low in ("golden", "phi"):
            return cls.quadratic(1, 1, 5, 2)
        m = _SQRT_ALIAS.match(low)
        if m:
            return cls.quadratic(0, 1, int(m.group(1)), 1)
        try:
            if low.startswith("rat:"):
                f = Fraction(t[4:].strip())
                return cls.rational(f.numerator, f.denominator)
            if low.startswith("surd:"):
                m = _SURD_RE.match(t[5:].strip())
                if not m:
                    raise InvalidInput(f"bad surd syntax: {text!r}")
                p = int(m.group(1))
                q = int(m.group(3) or 1) * (1 if m.group(2) == "+" else -1)
                return cls.quadratic(p, q, int(m.group(4)), int(m.group(5) or 1))
            if low.startswith("cf:"):
                body = t[3:].strip()
                if not (body.startswith("[") and body.endswith("]")):
                    raise InvalidInput(f"bad cf syntax: {text!r}")
                body = body[1:-1]
                head, _, tail = body.partition(";")
                qs = [int(head)] + [int(a) for a in tail.split(",") if a.strip()]
                return cls.cf_prefix(qs)
            if low.startswith("dec:"):
                m = _DEC_RE.match(t[4:].strip())
                if not m:
                    raise InvalidInput(f"bad decimal syntax: {text!r}")
                return cls.decimal(m.group(1), int(m.group(2)))
            # bare integers, fractions and terminating decimals are exact rationals
            f = Fraction(t)
            return cls.rational(f.numerator, f.denominator)
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"cannot parse real {text!r}: {exc}") from None

    def __str__(self) -> str:
        k, v = self.kind, self.data
        if k == "rational":
            return f"rat:{v[0]}/{v[1]}"
        if k == "quadratic":
            p, q, d, r = v
            return f"surd:({p}{'+' if q > 0 else '-'}{abs(q)}*sqrt({d}))/{r}"
        if k == "cf_prefix":
            return "cf:[" + str(v[0]) + ";" + ",".join(str(a) for a in v[1:]) + "]"
        return f"dec:{v[0]}@{v[1]}"

    @property
    def is_rational(self) -> bool:
        return self.kind == "rational"

    @property
    def is_exact(self) -> bool:
        return self.kind in ("rational", "quadratic")

    def to_real(self) -> Real:
        k, v = self.kind, self.data
        if k == "rational":
            return Quad(v[0], 0, v[1], 1)
        if k == "quadratic":
            p, q, d, r = v
            return Quad(p, q, r, d)
        if k == "cf_prefix":
            return CFPrefixReal(v)
        return DecimalReal(Fraction(v[0]), Fraction(1, 10 ** v[1]))

    def __float__(self) -> float:
        return float(self.to_real())


def as_spec(x) -> RealSpec:
    """Coerce strings, ints and Fractions to a RealSpec."""
    if isinstance(x, RealSpec):
        return x
    if isinstance(x, str):
        return RealSpec.parse(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return RealSpec.rational(x, 1)
    if isinstance(x, Fraction):
        return RealSpec.rational(x.numerator, x.denominator)
    raise InvalidInput(f"cannot interpret {x!r} as a RealSpec")
