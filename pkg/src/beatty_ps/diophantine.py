"""Continued fractions, irrationality type, distance to the nearest integer and discrepancy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, InvalidInput, PrecisionExhausted
from .reals import (
    CFPrefixReal,
    DecimalReal,
    Quad,
    RealSpec,
    as_spec,
    certified_floor,
    fixed_frac,
)

MAX_CF_DEPTH = 10_000
MAX_EXACT_POINTS = 4096
MAX_PROFILE_POINTS = 10_000_000


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...] = field(default=())
    terminated: bool = False

    def __post_init__(self):
        if any(a < 1 for a in self.partial_quotients):
            raise InvalidInput("partial quotients must be positive")
        if not self.convergents:
            object.__setattr__(self, "convergents", tuple(_convergents(self.a0, self.partial_quotients)))

    def __len__(self) -> int:
        return 1 + len(self.partial_quotients)

    @property
    def quotients(self) -> tuple[int, ...]:
        return (self.a0, *self.partial_quotients)

    @classmethod
    def from_quotients(cls, quotients: Sequence[int]) -> "ContinuedFraction":
        quotients = list(quotients)
        return cls(quotients[0], tuple(quotients[1:]))

    def __str__(self) -> str:
        return f"[{self.a0}; " + ",".join(map(str, self.partial_quotients)) + "]"


def _convergents(a0: int, pq: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    p_prev, q_prev, p, q = 1, 0, a0, 1
    out.append((p, q))
    for a in pq:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append((p, q))
    return out


def _spec_real(x):
    return as_spec(x).to_real()


def cf_expand(x, depth: int) -> ContinuedFraction:
    """First ``depth`` partial quotients (after a0) of x, each certified.

    Rationals terminate early (Euclid); quadratic irrationals use exact field
    arithmetic; cf prefixes return what they know; decimals expand both ends of
    their enclosure and stop being certified as soon as the two disagree.
    """
    spec = as_spec(x)
    if not 1 <= depth <= MAX_CF_DEPTH:
        raise InvalidInput(f"depth must lie in [1, {MAX_CF_DEPTH}]")
    if spec.kind == "rational":
        p, q = spec.data
        if q == 1:
            raise InvalidInput("x is an integer")
        qs = []
        while q and len(qs) <= depth:
            a = p // q
            qs.append(a)
            p, q = q, p - a * q
        return ContinuedFraction(qs[0], tuple(qs[1:]), terminated=(q == 0))
    if spec.kind == "quadratic":
        t = spec.to_real()
        qs = []
        for _ in range(depth + 1):
            a = t.floor()
            qs.append(a)
            t = (t - a).inverse()
        return ContinuedFraction(qs[0], tuple(qs[1:]))
    if spec.kind == "cf_prefix":
        known = spec.data
        if len(known) - 1 < depth:
            raise PrecisionExhausted(
                f"cf prefix only certifies {len(known) - 1} partial quotients, {depth} requested"
            )
        return ContinuedFraction(known[0], tuple(known[1 : depth + 1]))
    lo, hi = spec.to_real().enclose(0)
    return _cf_of_interval(lo, hi, depth)


def _cf_of_interval(lo: Fraction, hi: Fraction, depth: int) -> ContinuedFraction:
    qs = []
    while len(qs) <= depth:
        a, b = math.floor(lo), math.floor(hi)
        if a != b:
            raise PrecisionExhausted(
                f"decimal precision certifies only {max(len(qs) - 1, 0)} partial quotients"
            )
        qs.append(a)
        flo, fhi = lo - a, hi - a
        if flo == 0 or fhi == 0:
            # an endpoint is rational with a terminating expansion: cannot certify further
            if len(qs) <= depth:
                raise PrecisionExhausted("decimal enclosure touches a rational with this prefix")
            break
        lo, hi = 1 / fhi, 1 / flo
    if len(qs) == 1 and depth >= 1:
        raise InvalidInput("x is an integer")
    return ContinuedFraction(qs[0], tuple(qs[1 : depth + 1]))


def convergent(cf: ContinuedFraction, k: int) -> tuple[int, int]:
    """p_k / q_k (always in lowest terms)."""
    if not 0 <= k < len(cf):
        raise IndexOutOfRange(f"convergent index {k} outside 0..{len(cf) - 1}")
    return cf.convergents[k]


def check_convergent_bounds(x, cf: ContinuedFraction) -> bool:
    """Certify |x - p_k/q_k| < 1/(q_k q_{k+1}) for all non-final k."""
    real = _spec_real(x)
    for k in range(len(cf) - 1):
        p, q = cf.convergents[k]
        q1 = cf.convergents[k + 1][1]
        bits = 64 + 2 * q1.bit_length()
        lo, hi = real.enclose(bits)
        err = max(abs(lo - Fraction(p, q)), abs(hi - Fraction(p, q)))
        if not err < Fraction(1, q * q1):
            return False
    return True


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction
    exact: Quad | None = None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __float__(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return float((self.lo + self.hi) / 2)


def dist_nearest_int(x, n: int) -> Enclosure:
    """Certified enclosure of the distance from x*n to the nearest integer."""
    if not 1 <= n <= 10**12:
        raise InvalidInput("n must lie in [1, 10^12]")
    real = _spec_real(x)
    tol = Fraction(1, 10**20)
    if isinstance(real, Quad):
        t = real._mul(Quad.from_int(n))
        f = t.frac()
        other = Quad.from_int(1)._add(f._neg())
        d = f if other._add(f._neg()).sign() >= 0 else other
        lo, hi = d.enclose(80)
        return Enclosure(lo, hi, d)
    lo, hi = real.enclose(0)
    lo, hi = lo * n, hi * n
    if hi - lo > tol:
        raise PrecisionExhausted("enclosure of x*n wider than 1e-20")
    half_lo = math.floor(2 * lo)
    if half_lo != math.floor(2 * hi):
        raise PrecisionExhausted("x*n cannot be separated from a multiple of 1/2")
    fl = math.floor(lo)
    a, b = lo - fl, hi - fl
    if a >= Fraction(1, 2):
        a, b = 1 - b, 1 - a
    return Enclosure(a, b)


@dataclass(frozen=True)
class TypeEstimate:
    tau_hat: float
    table: tuple[tuple[int, int, int, float], ...]  # (k, q_k, q_{k+1}, log q_{k+1}/log q_k)
    k_from: int

    def __iter__(self):
        yield self.tau_hat
        yield self.table


def estimate_type(x, depth: int) -> TypeEstimate:
    """Finite-truncation estimate of the irrationality type.

    tau_hat is the largest log q_{k+1} / log q_k over the upper half of the
    available indices (k >= max(2, n // 2)).  The early indices, where q_k is
    tiny, say nothing about the limsup and are reported in the table only.
    A large tau_hat is a witness of good rational approximation; nothing here
    proves that the type is finite.
    """
    spec = as_spec(x)
    if spec.is_rational:
        raise InvalidInput("a rational number has no type")
    if depth < 5:
        raise InvalidInput("depth must be at least 5")
    cf = cf_expand(spec, depth)
    if cf.terminated:
        raise InvalidInput("continued fraction terminates: x is rational")
    qs = [q for _, q in cf.convergents]
    rows = []
    for k in range(2, len(qs) - 1):
        if qs[k] > 1:
            rows.append((k, qs[k], qs[k + 1], math.log(qs[k + 1]) / math.log(qs[k])))
    if not rows:
        raise InvalidInput("not enough convergents with q_k > 1")
    k_from = max(2, (len(qs) - 1) // 2)
    tail = [r[3] for r in rows if r[0] >= k_from] or [rows[-1][3]]
    return TypeEstimate(max(tail), tuple(rows), k_from)


# ---------------------------------------------------------------------------
# discrepancy


@dataclass(frozen=True)
class DiscrepancyResult:
    M: int
    D: Fraction
    witness: tuple[Fraction, Fraction, bool, bool]  # (left, right, left_closed, right_closed)
    kind: str  # "excess" (too many points) or "deficit" (too few)

    def __float__(self) -> float:
        return float(self.D)


def _as_fraction_point(x) -> Fraction:
    if isinstance(x, Fraction):
        f = x
    elif isinstance(x, (int, np.integer)):
        f = Fraction(int(x))
    elif isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise InvalidInput("non-finite point")
        f = Fraction(float(x))
    else:
        raise InvalidInput(f"unsupported point type {type(x).__name__}")
    if not 0 <= f < 1:
        raise InvalidInput(f"point {x!r} outside [0, 1)")
    return f


def discrepancy_exact(points: Sequence) -> DiscrepancyResult:
    """Exact sup over all intervals I in [0,1) of |V(I)/M - |I||.

    The supremum splits into an excess part (closed intervals [v_i, v_j] between
    points) and a deficit part (open intervals between consecutive-or-not points,
    or the ends 0 and 1).  Both are maximised over all endpoint pairs, in exact
    rational arithmetic; the pair maximisation is done with running extrema.
    """
    pts = [_as_fraction_point(x) for x in points]
    M = len(pts)
    if not 1 <= M <= MAX_EXACT_POINTS:
        raise InvalidInput(f"exact discrepancy needs 1 <= M <= {MAX_EXACT_POINTS}")
    counts: dict[Fraction, int] = {}
    for p in pts:
        counts[p] = counts.get(p, 0) + 1
    vals = sorted(counts)
    r = len(vals)
    cum = [0]
    for v in vals:
        cum.append(cum[-1] + counts[v])
    # excess: [v_i, v_j], value (cum[j+1]/M - v_j) - (cum[i]/M - v_i)
    best = Fraction(-1)
    wit = None
    kind = "excess"
    min_y, min_i = None, None
    for j in range(r):
        y = Fraction(cum[j], M) - vals[j]
        if min_y is None or y < min_y:
            min_y, min_i = y, j
        val = Fraction(cum[j + 1], M) - vals[j] - min_y
        if val > best:
            best, wit = val, (vals[min_i], vals[j], True, True)
    # deficit: open (l, r); left ends 0 and v_i, right ends v_j and 1.
    # value = (r - below(r)/M) - (l - upto(l)/M), where below counts points < r and
    # upto counts points <= l.
    lefts = [(Fraction(0), 0)] + [(vals[i], cum[i + 1]) for i in range(r)]
    rights = [(vals[j], cum[j]) for j in range(r)] + [(Fraction(1), M)]
    min_left = None
    li = 0
    for rv, below in rights:
        while li < len(lefts) and lefts[li][0] < rv:
            lv, upto = lefts[li]
            z = lv - Fraction(upto, M)
            if min_left is None or z < min_left[0]:
                min_left = (z, lv)
            li += 1
        if min_left is None:
            continue
        val = rv - Fraction(below, M) - min_left[0]
        if val > best:
            best, wit, kind = val, (min_left[1], rv, False, False), "deficit"
    return DiscrepancyResult(M, best, wit, kind)


@dataclass(frozen=True)
class DiscrepancyBounds:
    lower: float
    upper: float
    star: float
    M: int

    def __iter__(self):
        yield self.lower
        yield self.upper


_FLOAT_SLACK = 2.0**-48


def star_discrepancy(sorted_points: np.ndarray) -> float:
    M = sorted_points.size
    i = np.arange(1, M + 1, dtype=np.float64)
    return float(max((i / M - sorted_points).max(), (sorted_points - (i - 1) / M).max()))


def discrepancy_bounds(points, *, point_error: float = 0.0) -> DiscrepancyBounds:
    """[D*, 2 D*] bracket for the interval discrepancy, with D* the star discrepancy.

    ``point_error`` is a bound on how far each supplied point may be from the
    true one; the bracket is widened by it (D* is 1-Lipschitz in the points) and
    by a few ulps of floating-point slack, so the bracket is outward-rounded.
    """
    x = np.sort(np.asarray(points, dtype=np.float64).ravel())
    M = x.size
    if M == 0 or M > MAX_PROFILE_POINTS:
        raise InvalidInput(f"need 1 <= M <= {MAX_PROFILE_POINTS}")
    if x[0] < 0 or x[-1] >= 1 or not np.isfinite(x).all():
        raise InvalidInput("points must lie in [0, 1)")
    ds = star_discrepancy(x)
    pad = point_error + _FLOAT_SLACK
    return DiscrepancyBounds(max(0.0, ds - pad), min(1.0, 2 * (ds + pad)), ds, M)


def weyl_points(theta, mu, M: int) -> tuple[np.ndarray, float]:
    """Fractional parts {theta*m + mu}, m = 1..M, and a bound on their error.

    theta and mu are reduced to 64-bit fixed point exactly (or certified for
    non-exact specs); the products then wrap modulo 2**64 in uint64 arithmetic,
    which is reduction mod 1.  Each point lies in [value, value + err].
    """
    if not 1 <= M <= MAX_PROFILE_POINTS:
        raise InvalidInput(f"M must lie in [1, {MAX_PROFILE_POINTS}]")
    th = np.uint64(fixed_frac(_spec_real(theta), 64))
    mu_fp = np.uint64(fixed_frac(_spec_real(mu), 64))
    m = np.arange(1, M + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        F = th * m + mu_fp
    pts = (F >> np.uint64(11)).astype(np.float64) * 2.0**-53
    err = (M + 1) * 2.0**-64 + 2.0**-53
    return pts, err


@dataclass(frozen=True)
class ProfileRow:
    M: int
    lower: float
    upper: float
    tau_hat: float
    reference: float  # M^(-1/tau_hat)
    scaled: float  # upper * M^(1/tau_hat)
    log_scaled: float  # upper * M / log M


def discrepancy_profile(theta, mu, M_list: Sequence[int], *, type_depth: int = 30) -> list[ProfileRow]:
    spec = as_spec(theta)
    if spec.is_rational:
        raise InvalidInput("theta must be irrational")
    tau = estimate_type(spec, type_depth).tau_hat
    rows = []
    for M in M_list:
        pts, err = weyl_points(spec, mu, int(M))
        b = discrepancy_bounds(pts, point_error=err)
        ref = M ** (-1.0 / tau)
        rows.append(
            ProfileRow(int(M), b.lower, b.upper, tau, ref, b.upper / ref,
                       b.upper * M / math.log(M) if M > 1 else float("nan"))
        )
    return rows
