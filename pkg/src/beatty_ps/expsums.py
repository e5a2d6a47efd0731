"""Exponential sums with exactly reduced phases, and measured-vs-bound ratios for classical estimates."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import gmpy2
import numpy as np

from .errors import HypothesisViolated, InvalidInput, TermBudgetExceeded
from .primes import mobius_window, sieve_window, von_mangoldt_window
from .reals import Quad, RealSpec, as_spec, fixed_frac
from .sequences import BeattyParams

FRAC_BITS = 64
_MOD = 1 << FRAC_BITS
MAX_TERMS = 10**9
BLOCK = 1 << 18  # fixed summation block; the merge order never depends on workers
GRID_POINTS = 64

__all__ = [
    "Phase",
    "ExpSumSpec",
    "exp_sum",
    "BoundRatio",
    "vdc_ratio",
    "type1_ratio",
    "type2_ratio",
    "type_sum",
    "lambda_twisted",
    "prime_reduction_check",
]


def _to_fraction(x, name: str) -> Fraction:
    if isinstance(x, bool):
        raise InvalidInput(f"{name} must be rational")
    if isinstance(x, RealSpec):
        if not x.is_rational:
            raise InvalidInput(f"{name} must be rational")
        return Fraction(*x.data)
    if isinstance(x, str):
        try:
            return Fraction(x.removeprefix("rat:"))
        except ValueError:
            return _to_fraction(RealSpec.parse(x), name)
    return Fraction(x)


# ---------------------------------------------------------------------------
# Phases


@dataclass(frozen=True)
class Phase:
    """f(n) = c0 + c1*n + c2*n^2 + sum_j h_j * n^gamma_j.

    c0, c1, c2 are RealSpecs (rational or quadratic surds in one field for the
    fast exact path; other kinds go through certified enclosures). Each power
    term is a pair of rationals (h, gamma) with gamma > 0.
    """

    poly: tuple[RealSpec, RealSpec, RealSpec] = (RealSpec.rational(0), RealSpec.rational(0), RealSpec.rational(0))
    powers: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        poly = tuple(as_spec(c) for c in self.poly)
        if len(poly) != 3:
            raise InvalidInput("poly must hold (c0, c1, c2)")
        object.__setattr__(self, "poly", poly)
        powers = []
        for h, g in self.powers:
            h, g = _to_fraction(h, "h"), _to_fraction(g, "gamma")
            if g <= 0:
                raise InvalidInput("power exponents must be positive")
            if h:
                powers.append((h, g))
        object.__setattr__(self, "powers", tuple(powers))

    # constructors -----------------------------------------------------
    @classmethod
    def linear(cls, theta, const=0) -> "Phase":
        return cls((as_spec(const), as_spec(theta), RealSpec.rational(0)))

    @classmethod
    def quadratic(cls, theta) -> "Phase":
        return cls((RealSpec.rational(0), RealSpec.rational(0), as_spec(theta)))

    @classmethod
    def power(cls, h, gamma) -> "Phase":
        return cls(powers=((h, gamma),))

    @classmethod
    def mixed(cls, k: int, B: BeattyParams, h, gamma) -> "Phase":
        """k*a*n + k*b + h*n^gamma with a, b taken from a Beatty sequence."""
        a, b = B.a * k, B.b * k
        if not (isinstance(a, Quad) and isinstance(b, Quad)):
            raise InvalidInput("mixed phases need rational or quadratic alpha and beta")
        return cls((_quad_spec(b), _quad_spec(a), RealSpec.rational(0)), ((h, gamma),))

    def params(self) -> dict:
        return {
            "poly": [str(c) for c in self.poly],
            "powers": [[f"{h.numerator}/{h.denominator}", f"{g.numerator}/{g.denominator}"] for h, g in self.powers],
        }

    @classmethod
    def from_params(cls, d: dict) -> "Phase":
        return cls(tuple(RealSpec.parse(c) for c in d["poly"]), tuple((Fraction(h), Fraction(g)) for h, g in d["powers"]))

    # exact reduction --------------------------------------------------
    @cached_property
    def _poly_form(self):
        """Integer form (PA, PB, D, d) of the polynomial part, or None if not in one quadratic field."""
        qs = [c.to_real() for c in self.poly]
        if not all(isinstance(q, Quad) for q in qs):
            return None
        fields = {q.d for q in qs if q.B}
        if len(fields) > 1:
            return None
        d = fields.pop() if fields else 1
        D = math.lcm(*(q.D for q in qs))
        PA = [q.A * (D // q.D) for q in qs]
        PB = [q.B * (D // q.D) for q in qs]
        return PA, PB, D, d

    @cached_property
    def _power_forms(self):
        out = []
        for h, g in self.powers:
            u, v = g.numerator, g.denominator
            out.append((h < 0, abs(h.numerator) ** v << (FRAC_BITS * v), h.denominator**v, u, v))
        return tuple(out)

    def frac_fixed(self, n: int) -> int:
        """floor-based 64-bit fixed-point value of {f(n)}; off by at most (#parts - 1) units of 2^-64."""
        total = 0
        form = self._poly_form
        if form is not None:
            PA, PB, D, d = form
            A = (PA[0] + n * (PA[1] + n * PA[2])) << FRAC_BITS
            Bc = PB[0] + n * (PB[1] + n * PB[2])
            if Bc == 0:
                total += A // D
            else:
                r = math.isqrt(Bc * Bc * d << (2 * FRAC_BITS))
                total += (A + r if Bc > 0 else A - r - 1) // D
        else:
            for i, c in enumerate(self.poly):
                if not (c.kind == "rational" and c.data[0] == 0):
                    total += fixed_frac(c.to_real() * (n**i), FRAC_BITS)
        mpz = gmpy2.mpz
        for neg, X, Y, u, v in self._power_forms:
            num = X * mpz(n) ** u
            r, exact = gmpy2.iroot(num // Y, v)
            r = int(r)
            if neg:
                r = -r - (0 if exact and num % Y == 0 else 1)
            total += r
        return total % _MOD

    def frac_array(self, lo: int, hi: int) -> np.ndarray:
        """frac_fixed(n) for lo < n <= hi as uint64."""
        return np.fromiter((self.frac_fixed(n) for n in range(lo + 1, hi + 1)), dtype=np.uint64, count=max(0, hi - lo))

    def e_array(self, lo: int, hi: int) -> np.ndarray:
        """e(f(n)) for lo < n <= hi."""
        F = self.frac_array(lo, hi).view(np.int64)  # centred in [-1/2, 1/2)
        ang = F.astype(np.float64) * (2 * math.pi / _MOD)
        return np.cos(ang) + 1j * np.sin(ang)

    def value_mpf(self, n: int, dps: int = 60):
        """High-precision f(n) through mpmath, for cross-checks."""
        import mpmath

        from .reals import to_mpf

        with mpmath.workdps(dps):
            v = mpmath.mpf(0)
            for i, c in enumerate(self.poly):
                v += to_mpf(c.to_real(), dps) * mpmath.mpf(n) ** i
            for h, g in self.powers:
                v += mpmath.mpf(h.numerator) / h.denominator * mpmath.power(n, mpmath.mpf(g.numerator) / g.denominator)
            return v

    def second_derivative(self, x: float) -> float:
        v = 2 * float(self.poly[2])
        for h, g in self.powers:
            gf = float(g)
            v += float(h) * gf * (gf - 1) * x ** (gf - 2)
        return v


def _quad_spec(q: Quad) -> RealSpec:
    if q.is_rational():
        f = q.to_fraction()
        return RealSpec.rational(f.numerator, f.denominator)
    return RealSpec.quadratic(q.A, q.B, q.d, q.D)


# ---------------------------------------------------------------------------
# Sums

WEIGHTS = ("1", "lambda", "mu", "log")


def weights(kind: str, lo: int, hi: int) -> np.ndarray | None:
    """weight(n) for lo < n <= hi; None means identically one."""
    if kind == "1":
        return None
    if kind == "lambda":
        return von_mangoldt_window(lo, hi)
    if kind == "mu":
        return mobius_window(lo, hi).astype(np.float64)
    if kind == "log":
        return np.log(np.arange(lo + 1, hi + 1, dtype=np.float64))
    raise InvalidInput(f"unknown weight {kind!r}")


@dataclass(frozen=True)
class ExpSumSpec:
    """sum_{N < n <= N2} weight(n) e(phase(n))."""

    phase: Phase
    N: int
    N2: int
    weight: str = "1"

    def __post_init__(self):
        if not 0 <= self.N < self.N2:
            raise InvalidInput("need 0 <= N < N2")
        if self.weight not in WEIGHTS:
            raise InvalidInput(f"weight must be one of {WEIGHTS}")

    @property
    def term_count(self) -> int:
        return self.N2 - self.N

    def params(self) -> dict:
        return {"phase": self.phase.params(), "N": self.N, "N2": self.N2, "weight": self.weight}


def _block_sum(task) -> tuple[float, float]:
    phase, weight, lo, hi = task
    e = phase.e_array(lo, hi)
    w = weights(weight, lo, hi)
    if w is not None:
        e = e * w
    s = np.sum(e)  # pairwise
    return float(s.real), float(s.imag)


def _blocks(lo: int, hi: int, size: int = BLOCK) -> list[tuple[int, int]]:
    return [(a, min(a + size, hi)) for a in range(lo, hi, size)]


def _map(func, tasks, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


def _merge(parts) -> complex:
    return complex(math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts))


def exp_sum(spec: ExpSumSpec, *, workers: int = 1) -> complex:
    """The sum in ``spec``; each phase is reduced mod 1 exactly before cos/sin."""
    if spec.term_count > MAX_TERMS:
        raise TermBudgetExceeded(f"{spec.term_count} terms exceed the budget of 10^9")
    tasks = [(spec.phase, spec.weight, a, b) for a, b in _blocks(spec.N, spec.N2)]
    return _merge(_map(_block_sum, tasks, workers))


# ---------------------------------------------------------------------------
# Bound ratios


@dataclass(frozen=True)
class BoundRatio:
    check: str
    measured: float
    bound: float
    params: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def ratio(self) -> float:
        return self.measured / self.bound

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "measured": self.measured,
            "bound": self.bound,
            "ratio": self.ratio,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundRatio":
        return cls(d["check"], d["measured"], d["bound"], d["params"], tuple(d.get("notes", ())))


def vdc_ratio(phase: Phase, N: int, *, workers: int = 1) -> BoundRatio:
    """|sum_{N<n<=2N} e(f(n))| against N*lam^(1/2) + lam^(-1/2).

    lam is the geometric mean of |f''| at N and 2N; f'' must keep one sign.
    """
    if N < 1:
        raise InvalidInput("N must be positive")
    xs = np.linspace(N, 2 * N, 65)
    f2 = np.array([phase.second_derivative(float(x)) for x in xs])
    if np.any(f2 == 0) or not (np.all(f2 > 0) or np.all(f2 < 0)):
        raise InvalidInput("f'' vanishes or changes sign on [N, 2N]")
    lam = math.sqrt(abs(f2[0]) * abs(f2[-1]))
    measured = abs(exp_sum(ExpSumSpec(phase, N, 2 * N), workers=workers))
    bound = N * math.sqrt(lam) + 1 / math.sqrt(lam)
    spread = float(np.max(np.abs(f2)) / np.min(np.abs(f2)))
    return BoundRatio("vdc", measured, bound, {"phase": phase.params(), "N": N, "lambda": lam, "f2_spread": spread})


COEFFICIENTS = ("one", "mu", "lambda", "alternating")


def coefficients(kind: str, lo: int, hi: int, scale: float) -> np.ndarray:
    """Coefficient values for lo < n <= hi, each of absolute value at most one.

    ``lambda`` is Lambda(n)/scale with scale >= log(hi).
    """
    if kind == "one":
        return np.ones(hi - lo)
    if kind == "mu":
        return mobius_window(lo, hi).astype(np.float64)
    if kind == "lambda":
        return von_mangoldt_window(lo, hi) / scale
    if kind == "alternating":
        return np.where(np.arange(lo + 1, hi + 1) % 2 == 0, 1.0, -1.0)
    raise InvalidInput(f"coefficient kind must be one of {COEFFICIENTS}")


def _check_type_args(N, N1, m, gamma, h, d):
    if N < 1 or not N < N1 <= 2 * N:
        raise InvalidInput("need N < N1 <= 2N")
    if min(m, h, d) < 1:
        raise InvalidInput("m, h, d must be positive integers")
    g = _to_fraction(gamma, "gamma")
    if not 0 < g < 1:
        raise InvalidInput("gamma must lie in (0, 1)")
    return g


def type_sum(K: int, N: int, N1: int, m: int, gamma, h: int, d: int, a_k="one", b_l="one") -> complex:
    """sum_{K<k<=2K} sum_{l : N < kl <= N1} a_k b_l e(m (kl)^gamma + kl h/d)."""
    g = _check_type_args(N, N1, m, gamma, h, d)
    phase = Phase((RealSpec.rational(0), RealSpec.rational(h, d), RealSpec.rational(0)), ((m, g),))
    E = phase.e_array(N, N1)
    L = N / K
    a = coefficients(a_k, K, 2 * K, math.log(4 * K))
    l_lo, l_hi = N // (2 * K), N1 // (K + 1) + 1
    b = coefficients(b_l, l_lo, l_hi, math.log(2 * L) if b_l == "lambda" else 1.0)
    if b_l == "lambda" and np.max(b, initial=0) > 1:
        b = coefficients(b_l, l_lo, l_hi, math.log(l_hi))
    re, im = [], []
    for i, k in enumerate(range(K + 1, 2 * K + 1)):
        ls = np.arange(N // k + 1, N1 // k + 1)
        if ls.size == 0 or a[i] == 0:
            continue
        s = a[i] * np.sum(b[ls - l_lo - 1] * E[k * ls - N - 1])
        re.append(float(s.real))
        im.append(float(s.imag))
    return complex(math.fsum(re), math.fsum(im))


def type1_ratio(K: int, N: int, N1: int | None = None, m: int = 1, gamma=Fraction(12, 13), h: int = 1, d: int = 1, a_k="one") -> BoundRatio:
    """Type I sum against m^(1/2) N^(3/7+gamma/2) + m^(-1/2) N^(1-gamma/2); needs K <= N^(3/7)."""
    N1 = 2 * N if N1 is None else N1
    g = _check_type_args(N, N1, m, gamma, h, d)
    if K < 1 or K**7 > N**3:
        raise HypothesisViolated(f"type I estimate needs 1 <= K <= N^(3/7); got K={K}, N={N}")
    measured = abs(type_sum(K, N, N1, m, g, h, d, a_k, "one"))
    gf = float(g)
    bound = math.sqrt(m) * N ** (3 / 7 + gf / 2) + N ** (1 - gf / 2) / math.sqrt(m)
    params = {"K": K, "N": N, "N1": N1, "m": m, "gamma": str(g), "h": h, "d": d, "a_k": a_k}
    return BoundRatio("type1", measured, bound, params)


def type2_ratio(
    K: int, N: int, N1: int | None = None, m: int = 1, gamma=Fraction(12, 13), h: int = 1, d: int = 1, a_k="one", b_l="one"
) -> BoundRatio:
    """Type II sum against m^(-1/4) N^(1-gamma/4) + m^(1/6) N^(16/21+gamma/6) + N^(11/14); needs N^(3/7) <= K <= N^(1/2)."""
    N1 = 2 * N if N1 is None else N1
    g = _check_type_args(N, N1, m, gamma, h, d)
    if K**7 < N**3 or K * K > N:
        raise HypothesisViolated(f"type II estimate needs N^(3/7) <= K <= N^(1/2); got K={K}, N={N}")
    measured = abs(type_sum(K, N, N1, m, g, h, d, a_k, b_l))
    gf = float(g)
    bound = m ** (-1 / 4) * N ** (1 - gf / 4) + m ** (1 / 6) * N ** (16 / 21 + gf / 6) + N ** (11 / 14)
    params = {"K": K, "N": N, "N1": N1, "m": m, "gamma": str(g), "h": h, "d": d, "a_k": a_k, "b_l": b_l}
    return BoundRatio("type2", measured, bound, params)


MAX_TWIST_M = 10**8


def lambda_twisted(q: int, a: int, theta, k: int, M: int) -> tuple[complex, float]:
    """(sum_{m<=M} Lambda(qm+a) e(theta k m), log|sum| / log M)."""
    if q < 1 or not 0 <= a < q or math.gcd(a, q) != 1:
        raise InvalidInput("need q >= 1, 0 <= a < q and gcd(a, q) = 1")
    if not 2 <= M <= MAX_TWIST_M:
        raise InvalidInput("M must lie in [2, 10^8]")
    theta = as_spec(theta)
    # e(theta*k*m) is the phase theta*n evaluated at n = k*m
    phase = Phase.linear(theta) if k else None
    re, im = [], []
    step = max(1, BLOCK // q)
    for m0 in range(0, M, step):
        m1 = min(m0 + step, M)
        lam = von_mangoldt_window(q * m0 + a, q * m1 + a)[q - 1 :: q] if q > 1 else von_mangoldt_window(m0 + a, m1 + a)
        if phase is None:
            re.append(math.fsum(lam))
            continue
        idx = np.nonzero(lam)[0]
        ms = m0 + 1 + idx
        F = np.fromiter((phase.frac_fixed(k * int(mm)) for mm in ms), dtype=np.uint64, count=ms.size).view(np.int64)
        ang = F.astype(np.float64) * (2 * math.pi / _MOD)
        w = lam[idx]
        re.append(float(np.sum(w * np.cos(ang))))
        im.append(float(np.sum(w * np.sin(ang))))
    value = complex(math.fsum(re), math.fsum(im))
    mag = abs(value)
    exponent = math.log(mag) / math.log(M) if mag > 0 else -math.inf
    return value, exponent


def prime_reduction_check(phase: Phase | None, N: int, N_prime: int | None = None) -> BoundRatio:
    """|sum_{N<p<=N'} g(p)| against (1/log N) * max_{N1} |sum_{N<n<=N1} Lambda(n) g(n)| + N^(1/2).

    g = e(phase), or g = 1 when ``phase`` is None. The maximum over N1 is taken on
    64 geometric points of (N, 2N], so it is a grid max (a lower bound for the
    true maximum).
    """
    N_prime = 2 * N if N_prime is None else N_prime
    if not 2 <= N < N_prime <= 2 * N or N > 10**7:
        raise InvalidInput("need 2 <= N < N' <= 2N <= 2*10^7")
    g = np.ones(N, dtype=complex) if phase is None else phase.e_array(N, 2 * N)
    lam = von_mangoldt_window(N, 2 * N)
    primes = sieve_window(N, N_prime).is_prime
    pg = g[: N_prime - N][primes]
    measured = abs(complex(math.fsum(pg.real), math.fsum(pg.imag)))
    cum = np.cumsum(lam * g)
    grid = sorted({min(2 * N, max(N + 1, int(math.floor(N * 2 ** (j / GRID_POINTS))))) for j in range(1, GRID_POINTS + 1)})
    grid_max = float(max(abs(cum[n1 - N - 1]) for n1 in grid))
    bound = grid_max / math.log(N) + math.sqrt(N)
    params = {"phase": None if phase is None else phase.params(), "N": N, "N_prime": N_prime}
    return BoundRatio("prime_reduction", measured, bound, params, ("grid max over 64 geometric N1",))
