"""Vaughan's identity for the von Mangoldt function, exactly and in bulk, and the bilinear sums it produces."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvalidInput
from .expsums import Phase
from .primes import mobius_upto, primes_upto, von_mangoldt_window
from .reals import iroot
from .sequences import BeattyParams, PSParams

MAX_K = 10**9
MAX_BULK = 10**7
MAX_BILINEAR = 10**7

__all__ = [
    "VaughanParams",
    "factorize",
    "coeff_a",
    "coeff_a_exact",
    "coeff_b",
    "VaughanTerms",
    "vaughan_terms",
    "identity_residuals",
    "SumEvaluation",
    "bilinear_split",
]


@dataclass(frozen=True)
class VaughanParams:
    """Cut-offs U, V >= 1; only floor(U) and floor(V) matter for integer conditions."""

    U: float
    V: float

    def __post_init__(self):
        if not (self.U >= 1 and self.V >= 1):
            raise InvalidInput("U and V must be at least 1")
        if self.U * self.V > MAX_BULK:
            raise InvalidInput("U*V too large")

    @classmethod
    def for_N(cls, N: int) -> "VaughanParams":
        """U = N^(1/7), V = N^(3/7), stored as their exact integer floors."""
        return cls(max(1, iroot(N, 7)[0]), max(1, iroot(N**3, 7)[0]))

    @property
    def u(self) -> int:
        return math.floor(self.U)

    @property
    def v(self) -> int:
        return math.floor(self.V)

    def params(self) -> dict:
        return {"U": self.U, "V": self.V}


# ---------------------------------------------------------------------------
# Exact divisor-sum route


@lru_cache(maxsize=1)
def _trial_primes() -> tuple[int, ...]:
    return tuple(primes_upto(math.isqrt(MAX_K) + 1).tolist())


def factorize(n: int) -> dict[int, int]:
    if not 1 <= n <= MAX_K:
        raise InvalidInput("n must lie in [1, 10^9]")
    out: dict[int, int] = {}
    for p in _trial_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _divisors(f: dict[int, int]) -> list[tuple[int, dict[int, int]]]:
    """All (divisor, factorization) pairs."""
    divs = [(1, {})]
    for p, e in f.items():
        divs = [(d * p**j, {**fd, p: j} if j else fd) for d, fd in divs for j in range(e + 1)]
    return divs


def _mu(f: dict[int, int]) -> int:
    return 0 if any(e > 1 for e in f.values()) else (-1) ** len(f)


def _log_value(combo: Counter) -> float:
    """sum coef * log p for an exact combination {p: coef}."""
    return math.fsum(c * math.log(p) for p, c in sorted(combo.items()) if c)


def _clean(combo: Counter) -> dict[int, int]:
    return {p: c for p, c in sorted(combo.items()) if c}


def _coeff_a_combo(f: dict[int, int], U: int, V: int) -> Counter:
    combo: Counter = Counter()
    for p, e in f.items():
        # c = p^j <= U carries Lambda(c) = log p; d = k/c must be <= V and square-free
        for j in range(1, e + 1):
            c = p**j
            if c > U:
                break
            rest = {q: x - (j if q == p else 0) for q, x in f.items()}
            rest = {q: x for q, x in rest.items() if x}
            d = math.prod(q**x for q, x in rest.items())
            if d <= V:
                combo[p] += _mu(rest)
    return combo


def coeff_a_exact(k: int, U, V) -> dict[int, int]:
    """a(k) = sum_{cd=k, c<=U, d<=V} Lambda(c) mu(d) as {p: coefficient of log p}."""
    return _clean(_coeff_a_combo(factorize(k), math.floor(U), math.floor(V)))


def coeff_a(k: int, U, V) -> float:
    return _log_value(Counter(coeff_a_exact(k, U, V)))


def coeff_b(k: int, V) -> int:
    """b(k) = sum_{d | k, d <= V} mu(d)."""
    V = math.floor(V)
    f = factorize(k)
    return sum(_mu(fd) for d, fd in _divisors({p: 1 for p in f}) if d <= V)


@dataclass(frozen=True)
class VaughanTerms:
    n: int
    T1: float
    T2: float
    T3: float
    exact: tuple[dict[int, int], dict[int, int], dict[int, int]]

    def _combined(self) -> Counter:
        out: Counter = Counter()
        for e in self.exact:
            out.update(e)  # update keeps negative counts, unlike "+"
        return out

    @property
    def total(self) -> float:
        return _log_value(self._combined())

    @property
    def total_exact(self) -> dict[int, int]:
        return _clean(self._combined())

    def __iter__(self):
        return iter((self.T1, self.T2, self.T3, self.total))


def vaughan_terms(n: int, U, V) -> VaughanTerms:
    """The three sums of Vaughan's identity at n > U, each as an exact log combination."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_K:
        raise InvalidInput("n must be an integer in [1, 10^9]")
    if not n > U:
        raise InvalidInput("the identity needs n > U")
    u, v = math.floor(U), math.floor(V)
    f = factorize(int(n))
    divs = _divisors(f)
    t1: Counter = Counter()
    t2: Counter = Counter()
    t3: Counter = Counter()
    for k, fk in divs:
        t1.subtract(_coeff_a_combo(fk, u, v))
    for d, fd in divs:
        if d <= v:
            m = _mu(fd)
            if m:
                for p, e in f.items():
                    t2[p] += m * (e - fd.get(p, 0))
    for c, fc in divs:
        # c = p^j > U, k = n/c > 1
        if c > u and len(fc) == 1 and c < n:
            (p,) = fc
            rest = {q: e - fc.get(q, 0) for q, e in f.items() if e - fc.get(q, 0)}
            b = sum(_mu(fd) for d, fd in _divisors({q: 1 for q in rest}) if d <= v)
            t3[p] -= b
    exact = (_clean(t1), _clean(t2), _clean(t3))
    return VaughanTerms(int(n), _log_value(t1), _log_value(t2), _log_value(t3), exact)


# ---------------------------------------------------------------------------
# Bulk route on sieve arrays


def _bulk_arrays(n_max: int, u: int, v: int):
    lam = np.concatenate([[0.0], von_mangoldt_window(0, n_max)])
    mu = mobius_upto(n_max).astype(np.float64)
    logs = np.zeros(n_max + 1)
    logs[1:] = np.log(np.arange(1, n_max + 1, dtype=np.float64))
    return lam, mu, logs


def bulk_coefficients(n_max: int, U, V) -> tuple[np.ndarray, np.ndarray]:
    """(a(k), b(k)) for 0 <= k <= n_max as float and int arrays, by sieving."""
    u, v = math.floor(U), math.floor(V)
    lam, mu, _ = _bulk_arrays(max(n_max, u, v), u, v)
    a = np.zeros(n_max + 1)
    for c in range(2, min(u, n_max) + 1):
        if lam[c]:
            dmax = min(v, n_max // c)
            a[c * np.arange(1, dmax + 1)] += lam[c] * mu[1 : dmax + 1]
    b = np.zeros(n_max + 1, dtype=np.int64)
    for d in range(1, min(v, n_max) + 1):
        if mu[d]:
            b[d::d] += int(mu[d])
    b[0] = 0
    return a, b


def identity_residuals(n_max: int, U, V) -> np.ndarray:
    """|T1 + T2 + T3 - Lambda(n)| for every n in (U, n_max], computed on sieve arrays.

    Returned array r has r[i] for n = floor(U) + 1 + i.
    """
    if not 1 <= n_max <= MAX_BULK:
        raise InvalidInput("n_max must lie in [1, 10^7]")
    u, v = math.floor(U), math.floor(V)
    lam, mu, logs = _bulk_arrays(n_max, u, v)
    a, b = bulk_coefficients(n_max, U, V)
    t1 = np.zeros(n_max + 1)
    for k in np.nonzero(a)[0].tolist():
        t1[k::k] -= a[k]
    t2 = np.zeros(n_max + 1)
    for d in range(1, min(v, n_max) + 1):
        if mu[d]:
            cs = np.arange(1, n_max // d + 1)
            t2[d * cs] += mu[d] * logs[cs]
    t3 = np.zeros(n_max + 1)
    for k in range(2, n_max // (u + 1) + 1):
        if b[k]:
            cs = np.arange(u + 1, n_max // k + 1)
            t3[k * cs] -= b[k] * lam[cs]
    res = np.abs(t1 + t2 + t3 - lam)
    return res[u + 1 :]


# ---------------------------------------------------------------------------
# Bilinear sums


@dataclass(frozen=True)
class SumEvaluation:
    label: str
    h: int
    k: int
    N: int
    N2: int
    value: complex
    term_count: int
    magnitude_sum: float
    exact: tuple[Fraction, Fraction] | None = None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "h": self.h,
            "k": self.k,
            "N": self.N,
            "N2": self.N2,
            "re": self.value.real,
            "im": self.value.imag,
            "term_count": self.term_count,
            "magnitude_sum": self.magnitude_sum,
        }


def _exact_sum(parts: list[complex]) -> tuple[Fraction, Fraction]:
    return sum((Fraction(p.real) for p in parts), Fraction(0)), sum((Fraction(p.imag) for p in parts), Fraction(0))


def _evaluation(label, h, k, N, N2, parts, count, mag) -> SumEvaluation:
    re, im = _exact_sum(parts)
    return SumEvaluation(label, h, k, N, N2, complex(float(re), float(im)), count, mag, (re, im))


def bilinear_split(
    N: int, N2: int, params: VaughanParams | None, k: int, h: int, B: BeattyParams, P: PSParams
) -> tuple[list[SumEvaluation], float]:
    """S1..S5 and the direct sum sum_{N<n<=N2} Lambda(n) e(kan + kb + h n^gamma).

    Every double sum runs over N < mn <= N2. S4 and S5 are the m <= V and
    V < m <= UV parts of S1; their exact values add up to S1 exactly. Returns
    the evaluations (S1, S2, S3, S4, S5, direct) and the residual
    |(-S1 + S2 - S3) - direct|.
    """
    if not (isinstance(N, int) and isinstance(N2, int)) or not 1 <= N < N2 <= 2 * N or 2 * N > MAX_BILINEAR:
        raise InvalidInput("need 1 <= N < N2 <= 2N <= 10^7")
    if k == 0:
        raise InvalidInput("k = 0 is the main-term case and is not split here")
    if h < 1:
        raise InvalidInput("h must be positive")
    params = params or VaughanParams.for_N(N)
    u, v = params.u, params.v
    if N < u:
        raise InvalidInput("the identity needs every n in (N, N2] to exceed U")
    phase = Phase.mixed(k, B, h, P.gamma)
    E = phase.e_array(N, N2)
    lam = np.concatenate([[0.0], von_mangoldt_window(0, N2)])
    mu = mobius_upto(N2).astype(np.float64)
    logs = np.zeros(N2 + 1)
    logs[1:] = np.log(np.arange(1, N2 + 1, dtype=np.float64))
    a, b = bulk_coefficients(N2, params.U, params.V)

    def inner(m: int, weights: np.ndarray | None, n_min: int = 1):
        ns = np.arange(max(N // m + 1, n_min), N2 // m + 1)
        e = E[m * ns - N - 1]
        if weights is not None:
            w = weights[ns]
            return np.sum(w * e), ns.size, float(np.sum(np.abs(w)))
        return np.sum(e), ns.size, float(ns.size)

    s1_parts, s4_parts, s5_parts = [], [], []
    c1 = c4 = c5 = 0
    g1 = g4 = g5 = 0.0
    for m in range(1, min(u * v, N2) + 1):
        if a[m] == 0:
            continue
        s, cnt, mag = inner(m, None)
        s = complex(a[m] * s)
        mag *= abs(a[m])
        s1_parts.append(s)
        c1 += cnt
        g1 += mag
        if m <= v:
            s4_parts.append(s)
            c4 += cnt
            g4 += mag
        else:
            s5_parts.append(s)
            c5 += cnt
            g5 += mag

    s2_parts, c2, g2 = [], 0, 0.0
    for m in range(1, min(v, N2) + 1):
        if mu[m] == 0:
            continue
        s, cnt, mag = inner(m, logs)
        s2_parts.append(complex(mu[m] * s))
        c2 += cnt
        g2 += mag

    # outer variable n carries b(n), inner m > U carries Lambda(m); b(n) = 0 for 1 < n <= V
    s3_parts, c3, g3 = [], 0, 0.0
    for n in range(v + 1, N2 // (u + 1) + 1):
        if b[n] == 0:
            continue
        s, cnt, mag = inner(n, lam, n_min=u + 1)
        s3_parts.append(complex(b[n] * s))
        c3 += cnt
        g3 += mag * abs(b[n])

    lw = lam[N + 1 : N2 + 1]
    direct_parts = [complex(np.sum(lw[i : i + 4096] * E[i : i + 4096])) for i in range(0, N2 - N, 4096)]

    ev = [
        _evaluation("S1", h, k, N, N2, s1_parts, c1, g1),
        _evaluation("S2", h, k, N, N2, s2_parts, c2, g2),
        _evaluation("S3", h, k, N, N2, s3_parts, c3, g3),
        _evaluation("S4", h, k, N, N2, s4_parts, c4, g4),
        _evaluation("S5", h, k, N, N2, s5_parts, c5, g5),
        _evaluation("direct", h, k, N, N2, direct_parts, N2 - N, float(lw.sum())),
    ]
    S1, S2, S3, direct = ev[0].value, ev[1].value, ev[2].value, ev[5].value
    residual = abs((-S1 + S2 - S3) - direct)
    return ev, residual
