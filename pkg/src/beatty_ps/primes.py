"""Segmented sieving, von Mangoldt values and the four prime-counting functions."""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import InvalidInput, WindowTooLarge
from .reals import to_mpf
from .sequences import (
    BeattyParams,
    PSParams,
    beatty_contains,
    ps_first_index_above,
    ps_terms,
)

MAX_X = 10**12
MAX_WINDOW = 1 << 26
DEFAULT_WINDOW = 1 << 22
MAIN_TERM_DIGITS = 30


@lru_cache(maxsize=8)
def _base_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return is_p


def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit (limit up to ~10^8; used for sieve seeds)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    # round up so repeated calls share the cache
    cap = 1 << max(10, (limit).bit_length())
    primes = np.flatnonzero(_base_sieve(cap))
    return primes[primes <= limit].astype(np.int64)


@dataclass(frozen=True)
class SieveWindow:
    lo: int
    hi: int
    is_prime: np.ndarray = field(repr=False)  # index i <-> integer lo + 1 + i

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime).astype(np.int64) + self.lo + 1

    def count(self) -> int:
        return int(self.is_prime.sum())

    def __contains__(self, n: int) -> bool:
        return self.lo < n <= self.hi and bool(self.is_prime[n - self.lo - 1])


def sieve_window(lo: int, hi: int) -> SieveWindow:
    """Primality of every integer in (lo, hi]."""
    if not 0 <= lo < hi <= MAX_X:
        raise InvalidInput("need 0 <= lo < hi <= 10^12")
    if hi - lo > MAX_WINDOW:
        raise WindowTooLarge(f"window of {hi - lo} integers exceeds 2^26")
    size = hi - lo
    mask = np.ones(size, dtype=bool)
    if lo == 0:
        mask[0] = False  # the integer 1
    for p in primes_upto(math.isqrt(hi)).tolist():
        start = max(p * p, ((lo + 1 + p - 1) // p) * p)
        if start > hi:
            continue
        mask[start - lo - 1 :: p] = False
    return SieveWindow(lo, hi, mask)


def windows(lo: int, hi: int, size: int = DEFAULT_WINDOW) -> list[tuple[int, int]]:
    size = min(size, MAX_WINDOW)
    return [(s, min(s + size, hi)) for s in range(lo, hi, size)]


def is_prime(n: int) -> bool:
    """Deterministic trial division by sieved primes (n <= 10^12)."""
    if n < 2:
        return False
    r = math.isqrt(n)
    for p in primes_upto(r).tolist():
        if n % p == 0:
            return n == p
    return True


@dataclass(frozen=True)
class PrimePower:
    """n = p**k; Lambda(n) = log p."""

    p: int
    k: int

    @property
    def value(self) -> int:
        return self.p**self.k

    @property
    def log(self) -> float:
        return math.log(self.p)

    def mp_log(self, dps: int = 30):
        with mpmath.workdps(dps):
            return mpmath.log(self.p)


def smallest_prime_factor(n: int) -> int:
    if n < 2:
        raise InvalidInput("n must be >= 2")
    for p in primes_upto(math.isqrt(n)).tolist():
        if n % p == 0:
            return p
    return n


def von_mangoldt(n: int) -> PrimePower | None:
    """PrimePower(p, k) when n = p^k, else None (Lambda(n) = 0)."""
    if not 1 <= n <= MAX_X:
        raise InvalidInput("n must lie in [1, 10^12]")
    if n == 1:
        return None
    p = smallest_prime_factor(n)
    k = 0
    m = n
    while m % p == 0:
        m //= p
        k += 1
    return PrimePower(p, k) if m == 1 else None


def von_mangoldt_window(lo: int, hi: int) -> np.ndarray:
    """Lambda(n) for n in (lo, hi] as float64 (log p at prime powers, 0 elsewhere)."""
    if hi - lo > MAX_WINDOW:
        out = [von_mangoldt_window(a, b) for a, b in windows(lo, hi, MAX_WINDOW)]
        return np.concatenate(out)
    w = sieve_window(lo, hi)
    lam = np.zeros(hi - lo, dtype=np.float64)
    ps = w.primes()
    lam[ps - lo - 1] = np.log(ps.astype(np.float64))
    for p in primes_upto(math.isqrt(hi)).tolist():
        pk = p * p
        logp = math.log(p)
        while pk <= hi:
            if pk > lo:
                lam[pk - lo - 1] = logp
            pk *= p
    return lam


def mobius_upto(N: int) -> np.ndarray:
    """mu(n) for 0 <= n <= N (mu(0) set to 0) as int8."""
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_upto(N).tolist():
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def mobius_window(lo: int, hi: int) -> np.ndarray:
    """mu(n) for n in (lo, hi] as int8 (segmented; mu(0) is taken as 0)."""
    if hi - lo > MAX_WINDOW:
        raise WindowTooLarge("window exceeds 2^26 integers")
    n = np.arange(lo + 1, hi + 1, dtype=np.int64)
    mu = np.ones(hi - lo, dtype=np.int8)
    rest = n.copy()
    for p in primes_upto(math.isqrt(hi)).tolist():
        start = (-(lo + 1)) % p
        mu[start::p] *= -1
        rest[start::p] //= p
        p2 = p * p
        mu[(-(lo + 1)) % p2 :: p2] = 0
    # at most one prime factor above sqrt(hi) remains
    mu[rest > 1] *= -1
    mu[n == 0] = 0
    return mu


def euler_phi(d: int) -> int:
    if d < 1:
        raise InvalidInput("phi needs d >= 1")
    result, m = d, d
    p = 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


# ---------------------------------------------------------------------------
# counting


@dataclass
class CountReport:
    kind: str
    params: dict
    x: int
    count: int
    main_term: mpmath.mpf | None
    ratio: float | None
    error_budget: float | None
    elapsed_ms: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "x": self.x,
            "count": self.count,
            "main_term": None if self.main_term is None else mpmath.nstr(self.main_term, MAIN_TERM_DIGITS),
            "ratio": self.ratio,
            "error_budget": self.error_budget,
            "elapsed_ms": self.elapsed_ms,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CountReport":
        mt = d.get("main_term")
        with mpmath.workdps(MAIN_TERM_DIGITS + 10):
            main = None if mt is None else mpmath.mpf(mt)
        return cls(d["kind"], dict(d["params"]), int(d["x"]), int(d["count"]), main,
                   d.get("ratio"), d.get("error_budget"), float(d.get("elapsed_ms", 0.0)),
                   list(d.get("notes", [])))

    @property
    def deviation(self) -> float | None:
        """count - main_term."""
        if self.main_term is None:
            return None
        return float(self.count - self.main_term)


def _check_x(x) -> int:
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    if not isinstance(x, (int, np.integer)) or isinstance(x, bool):
        raise InvalidInput("x must be an integer")
    if not 1 <= x <= MAX_X:
        raise InvalidInput("x must lie in [1, 10^12]")
    return int(x)


def _finish(kind, params, x, count, denominator_factor, gamma: Fraction, t0, notes=()) -> CountReport:
    """Attach main term x^gamma / (factor * log x) and the error budget x^gamma / log^2 x."""
    main = ratio = budget = None
    if x >= 2:
        with mpmath.workdps(MAIN_TERM_DIGITS + 10):
            xg = mpmath.power(x, mpmath.mpf(gamma.numerator) / gamma.denominator)
            lx = mpmath.log(x)
            main = xg / (denominator_factor * lx)
            ratio = float(count / main)
            budget = float(xg / (lx * lx))
    return CountReport(kind, params, x, count, main, ratio, budget,
                       (time.perf_counter() - t0) * 1e3, list(notes))


def _run(func: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def _ps_primes_task(task) -> np.ndarray:
    P, lo, hi = task
    n0 = ps_first_index_above(P, lo)
    n1 = ps_first_index_above(P, hi)
    terms = ps_terms(P, n0, n1)
    if terms.size == 0:
        return terms
    w = sieve_window(lo, hi)
    return terms[w.is_prime[terms - lo - 1]]


def ps_primes(P: PSParams, x: int, *, workers: int = 1, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Sorted primes p <= x of the form floor(n^c).

    Iterates over the O(x^gamma) indices n with floor(n^c) <= x, window by
    window, and looks each term up in that window's sieve.
    """
    x = _check_x(x)
    tasks = [(P, lo, hi) for lo, hi in windows(0, x, window)]
    parts = _run(_ps_primes_task, tasks, workers)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def count_ps_primes(P: PSParams, x: int, *, workers: int = 1) -> CountReport:
    t0 = time.perf_counter()
    x = _check_x(x)
    count = int(ps_primes(P, x, workers=workers).size)
    return _finish("ps", P.params(), x, count, mpmath.mpf(P.p) / P.q, P.gamma, t0)


def _beatty_filter_task(task) -> int:
    B, values = task
    return sum(beatty_contains(B, int(v)) for v in values)


def _beatty_primes_task(task) -> int:
    B, lo, hi = task
    return _beatty_filter_task((B, sieve_window(lo, hi).primes()))


def _alpha_mpf(B: BeattyParams):
    return to_mpf(B.alpha_real, MAIN_TERM_DIGITS + 10)


def count_beatty_primes(B: BeattyParams, x: int, *, workers: int = 1) -> CountReport:
    t0 = time.perf_counter()
    x = _check_x(x)
    tasks = [(B, lo, hi) for lo, hi in windows(0, x)]
    count = sum(_run(_beatty_primes_task, tasks, workers))
    return _finish("beatty", B.params(), x, count, _alpha_mpf(B), Fraction(1), t0)


def _chunks(arr: np.ndarray, n: int) -> list[np.ndarray]:
    size = max(1, -(-arr.size // max(1, n)))
    return [arr[i : i + size] for i in range(0, arr.size, size)] or [arr]


def _type_known(B: BeattyParams) -> bool:
    return B.alpha.kind == "quadratic"


def count_intersection(B: BeattyParams, P: PSParams, x: int, *, workers: int = 1) -> CountReport:
    """Primes p <= x lying in both sequences; main term x^(1/c) / (alpha c log x)."""
    t0 = time.perf_counter()
    x = _check_x(x)
    notes = []
    if not P.theorem_range:
        notes.append("c >= 14/13: outside the range where the asymptotic formula is proved")
    if not _type_known(B):
        notes.append("type of alpha not known to be finite (only quadratic alpha is certified)")
    for n in notes:
        warnings.warn(n, stacklevel=2)
    cands = ps_primes(P, x, workers=workers)
    tasks = [(B, chunk) for chunk in _chunks(cands, 8 * max(1, workers))]
    count = sum(_run(_beatty_filter_task, tasks, workers))
    params = {**B.params(), **P.params()}
    factor = _alpha_mpf(B) * mpmath.mpf(P.p) / P.q
    return _finish("intersection", params, x, count, factor, P.gamma, t0, notes)


def count_ps_in_ap(P: PSParams, d: int, a: int, x: int, *, workers: int = 1) -> CountReport:
    """PS primes p <= x with p = a (mod d); main term x^gamma / (phi(d) log x).

    Unlike count_ps_primes there is no factor c in this main term, so for
    d = 1 the counts agree but the main terms differ by exactly c.
    """
    t0 = time.perf_counter()
    x = _check_x(x)
    if d < 1 or not 1 <= a <= d:
        raise InvalidInput("need d >= 1 and 1 <= a <= d")
    if math.gcd(a, d) != 1:
        raise InvalidInput(f"gcd({a}, {d}) != 1")
    ps = ps_primes(P, x, workers=workers)
    count = int(np.count_nonzero(ps % d == a % d))
    factor = mpmath.mpf(euler_phi(d))
    params = {**P.params(), "d": d, "a": a}
    return _finish("ps_ap", params, x, count, factor, P.gamma, t0)
