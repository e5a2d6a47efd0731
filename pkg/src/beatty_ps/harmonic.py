"""Sawtooth function, Vaaler's trigonometric approximation and the smoothed interval indicator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInput
from .reals import Quad, Real, RealSpec, as_real, certified_floor

MAX_VAALER_DEGREE = 10**6
MAX_GRID = 10**6
_CHUNK = 1 << 21  # matrix entries per block in grid evaluations

__all__ = [
    "sawtooth",
    "VaalerApprox",
    "vaaler_approx",
    "MajorantReport",
    "majorant_check",
    "TrigPolynomial",
    "trig_polynomial",
    "vinogradov_indicator",
    "trig_eval",
    "trig_eval_grid",
]


def sawtooth(t):
    """psi(t) = t - floor(t) - 1/2.

    Exact (Fraction or Quad) for int, Fraction, quadratic and RealSpec inputs,
    plain float arithmetic for floats.
    """
    if isinstance(t, (float, np.floating)):
        t = float(t)
        return (t - math.floor(t)) - 0.5
    if isinstance(t, RealSpec):
        t = t.to_real()
    if isinstance(t, (int, Fraction)) and not isinstance(t, bool):
        t = Fraction(t)
        return t - math.floor(t) - Fraction(1, 2)
    t = as_real(t)
    if isinstance(t, Quad):
        r = t.frac() - Quad.from_fraction(Fraction(1, 2))
        return r.to_fraction() if r.is_rational() else r
    return t - certified_floor(t) - Fraction(1, 2)


def _frac_grid(G: int) -> np.ndarray:
    """Odd numerators of the half-step grid t_j = (2j+1)/(2G)."""
    return 2 * np.arange(G, dtype=np.int64) + 1


def _phase_block(h: np.ndarray, num: np.ndarray, den: int) -> np.ndarray:
    """2*pi*{h*num/den} for every pair, reduced with integer arithmetic first."""
    r = np.multiply.outer(h % den, num % den) % den
    return (2 * np.pi / den) * r


def _sawtooth_grid(G: int) -> np.ndarray:
    return (_frac_grid(G) / (2 * G)) - 0.5


# ---------------------------------------------------------------------------
# Vaaler


def _vaaler_weight(u: np.ndarray) -> np.ndarray:
    # pi*u*(1-u)*cot(pi*u) + u, which lies in (0, 1] for 0 < u < 1
    return np.pi * u * (1 - u) / np.tan(np.pi * u) + u


@dataclass(frozen=True)
class VaalerApprox:
    """Coefficients for |psi(t) - sum a_h e(ht)| <= sum b_h e(ht), 0 < |h| <= H.

    ``a`` holds a_h for h = 1..H; a_{-h} is its conjugate. Every a_h is purely
    imaginary, so the approximation is the real sine series
    -sum_h w_h sin(2 pi h t) / (pi h). ``b`` holds b_h for h = 0..H.
    """

    H: int
    a: np.ndarray
    b: np.ndarray
    damping: str = "vaaler"

    def coefficient_a(self, h: int) -> complex:
        if h == 0 or abs(h) > self.H:
            return 0j
        v = complex(self.a[abs(h) - 1])
        return v if h > 0 else v.conjugate()

    def coefficient_b(self, h: int) -> float:
        if abs(h) > self.H:
            return 0.0
        return float(self.b[abs(h)])

    @property
    def b_sum_max(self) -> float:
        # b_h > 0 so the majorant sum peaks at t = 0
        return float(self.b[0] + 2 * self.b[1:].sum())

    def approx(self, t) -> float:
        """sum_{0<|h|<=H} a_h e(ht) for a single t."""
        return float(self._eval(np.asarray([t], dtype=float))[0][0])

    def majorant(self, t) -> float:
        return float(self._eval(np.asarray([t], dtype=float))[1][0])

    def _eval(self, t: np.ndarray):
        t = t - np.floor(t)
        h = np.arange(1, self.H + 1)
        ang = 2 * np.pi * np.multiply.outer(t, h)
        approx = -2 * (np.sin(ang) @ self.a.imag)
        maj = self.b[0] + 2 * (np.cos(ang) @ self.b[1:])
        return approx, maj


def vaaler_approx(H: int, damping: str = "vaaler") -> VaalerApprox:
    """Coefficients a_h, b_h of degree H.

    a_h = -w(|h|/(H+1)) / (2 pi i h) with Vaaler's weight
    w(u) = pi u (1-u) cot(pi u) + u, and b_h = (1 - |h|/(H+1)) / (2(H+1)).
    ``damping="fejer"`` swaps in w(u) = 1 - u; that variant does not satisfy
    the majorant inequality and is kept only for comparison.
    """
    if not isinstance(H, (int, np.integer)) or not 1 <= H <= MAX_VAALER_DEGREE:
        raise InvalidInput("H must be an integer in [1, 10^6]")
    H = int(H)
    h = np.arange(1, H + 1, dtype=float)
    u = h / (H + 1)
    if damping == "vaaler":
        w = _vaaler_weight(u)
    elif damping == "fejer":
        w = 1 - u
    else:
        raise InvalidInput(f"unknown damping {damping!r}")
    # -w/(2 pi i h) = i w/(2 pi h)
    a = 1j * w / (2 * np.pi * h)
    hb = np.arange(0, H + 1, dtype=float)
    b = (1 - hb / (H + 1)) / (2 * (H + 1))
    return VaalerApprox(H, a, b, damping)


@dataclass(frozen=True)
class MajorantReport:
    H: int
    grid_size: int
    max_violation: float
    sup_error: float
    b_sum_max: float
    damping: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def majorant_check(V: VaalerApprox, grid_size: int = 10_000) -> MajorantReport:
    """max over t_j = (j + 1/2)/G of |psi - approx| - majorant.

    Phases h*t_j are reduced modulo one in integer arithmetic before the
    trigonometric calls, so the result does not depend on the size of h*t.
    """
    G = int(grid_size)
    if not 1 <= G <= MAX_GRID:
        raise InvalidInput("grid_size must lie in [1, 10^6]")
    num = _frac_grid(G)
    psi = _sawtooth_grid(G)
    h = np.arange(1, V.H + 1, dtype=np.int64)
    approx = np.zeros(G)
    maj = np.full(G, V.b[0])
    step = max(1, _CHUNK // G)
    for s in range(0, V.H, step):
        hs = h[s : s + step]
        ang = _phase_block(hs, num, 2 * G)  # shape (len(hs), G)
        approx += -2 * (V.a.imag[s : s + step] @ np.sin(ang))
        maj += 2 * (V.b[1 + s : 1 + s + step] @ np.cos(ang))
    err = np.abs(psi - approx)
    return MajorantReport(
        H=V.H,
        grid_size=G,
        max_violation=float(np.max(err - maj)),
        sup_error=float(np.max(err)),
        b_sum_max=V.b_sum_max,
        damping=V.damping,
    )


# ---------------------------------------------------------------------------
# Smoothed indicator


def _as_fraction(x, name: str) -> Fraction:
    if isinstance(x, bool):
        raise InvalidInput(f"{name} must be a number")
    if isinstance(x, RealSpec):
        if x.kind == "rational":
            return Fraction(*x.data)
        if x.kind == "decimal":
            return Fraction(x.data[0])
        raise InvalidInput(f"{name} must be rational or a decimal")
    if isinstance(x, str):
        try:
            return Fraction(x.removeprefix("rat:"))
        except ValueError:
            return _as_fraction(RealSpec.parse(x), name)
    if isinstance(x, (int, Fraction, float, np.floating, np.integer)):
        return Fraction(x) if not isinstance(x, np.generic) else Fraction(x.item())
    if isinstance(x, Quad) and x.is_rational():
        return x.to_fraction()
    raise InvalidInput(f"{name} must be rational (got {x!r})")


def _frac_times(k: np.ndarray, x: Fraction) -> np.ndarray:
    """{k*x} as floats, the reduction done exactly on integers."""
    p, q = x.numerator, x.denominator
    return np.array([(int(kk) * p % q) / q for kk in k], dtype=float)


@dataclass(frozen=True)
class TrigPolynomial:
    """sum_{|k|<=K} g(k) e(kt) with g(-k) the conjugate of g(k).

    ``coeffs`` holds g(1), ..., g(K); ``g0`` is kept exactly.
    """

    K: int
    g0: Fraction
    coeffs: np.ndarray
    a: Fraction | None = None
    delta: Fraction | None = None

    def coefficient(self, k: int) -> complex:
        if k == 0:
            return complex(float(self.g0))
        if abs(k) > self.K:
            return 0j
        v = complex(self.coeffs[abs(k) - 1])
        return v if k > 0 else v.conjugate()

    def coefficient_bound(self, k: int) -> float:
        """min(1/(pi|k|), 4/(pi^2 k^2 Delta)); inf when no Delta is attached."""
        if k == 0:
            return float(abs(self.g0))
        if self.delta is None:
            return math.inf
        k = abs(k)
        return min(1 / (math.pi * k), 4 / (math.pi**2 * k * k * float(self.delta)))

    @property
    def truncation_budget(self) -> float:
        """Bound on sup |Psi - Psi_K| from the coefficient tail, plus float error."""
        if self.delta is None:
            return self.K * 1e-14
        KD = self.K * float(self.delta)
        # tail of 2 * sum_{k>K} 4/(pi^3 k^3 Delta^2) <= 4/(pi^3 K^2 Delta^2) <= (4/pi^3)/(K Delta)
        return 4 / (math.pi**3 * KD * KD) + self.K * 1e-14

    @property
    def truncation_constant(self) -> float:
        """C in the budget C / (K Delta)."""
        return 4 / math.pi**3

    def parseval_sum(self) -> float:
        return math.fsum([float(self.g0) ** 2, *(2 * np.abs(self.coeffs) ** 2)])

    def rows(self):
        """(k, re, im, bound) for -K <= k <= K."""
        for k in range(-self.K, self.K + 1):
            g = self.coefficient(k)
            yield k, g.real, g.imag, self.coefficient_bound(k)


def trig_polynomial(g0, coeffs=()) -> TrigPolynomial:
    c = np.asarray(coeffs, dtype=complex)
    return TrigPolynomial(K=len(c), g0=_as_fraction(g0, "g0"), coeffs=c)


def _sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(x)  # sin(pi x)/(pi x)


def vinogradov_indicator(a, delta, K: int) -> TrigPolynomial:
    """Truncation at |k| <= K of the indicator of (0, a] smoothed by two boxes of width Delta/2.

    The smoothed function equals 1 on [Delta/2, a - Delta/2], 0 on
    [a + Delta/2, 1 - Delta/2], and stays in [0, 1]. Its Fourier coefficients are
    g(0) = a and g(k) = (1 - e(-ka))/(2 pi i k) * sinc(k Delta/2)^2.
    """
    a = _as_fraction(a, "a")
    delta = _as_fraction(delta, "delta")
    if not 0 < a < 1:
        raise InvalidInput("a must lie in (0, 1)")
    if not 0 < delta < Fraction(1, 8):
        raise InvalidInput("delta must lie in (0, 1/8)")
    m = min(a, 1 - a)
    if delta > m / 2:
        raise InvalidInput("delta must not exceed min(a, 1-a)/2")
    if m < 4 * delta:
        raise InvalidInput("min(a, 1-a) < 4*delta is rejected (collar would swallow the plateau)")
    if not isinstance(K, (int, np.integer)) or K < 1 / delta:
        raise InvalidInput("K must be an integer >= 1/delta")
    K = int(K)
    k = np.arange(1, K + 1)
    fa = _frac_times(k, a)
    half_delta = delta / 2
    # sinc is even with period-free argument; reduce only for accuracy of sin
    s = _sinc(k * float(half_delta))
    g = (1 - np.exp(-2j * np.pi * fa)) / (2j * np.pi * k) * s * s
    return TrigPolynomial(K=K, g0=a, coeffs=g, a=a, delta=delta)


def _reduce_point(t) -> float:
    """{t} as a float; exact reduction for exact inputs."""
    if isinstance(t, (float, np.floating)):
        t = float(t)
        return t - math.floor(t)
    if isinstance(t, RealSpec):
        t = t.to_real()
    if isinstance(t, (int, Fraction)) and not isinstance(t, bool):
        t = Fraction(t)
        return float(t - math.floor(t))
    t = as_real(t)
    if isinstance(t, Quad):
        return float(t.frac())
    return float(t - certified_floor(t))


def trig_eval(T: TrigPolynomial, t) -> float:
    """Real value of sum_{|k|<=K} g(k) e(kt), conjugate pairs combined, fsum-accumulated."""
    f = _reduce_point(t)
    if T.K == 0:
        return float(T.g0)
    k = np.arange(1, T.K + 1)
    ang = 2 * np.pi * ((k * f) % 1.0)
    terms = 2 * (T.coeffs.real * np.cos(ang) - T.coeffs.imag * np.sin(ang))
    return math.fsum([float(T.g0), *terms])


def trig_eval_grid(T: TrigPolynomial, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
    """(t, Psi_K(t)) on the half-step grid t_j = (j + 1/2)/G, phases reduced exactly."""
    G = int(grid_size)
    if not 1 <= G <= MAX_GRID:
        raise InvalidInput("grid_size must lie in [1, 10^6]")
    num = _frac_grid(G)
    vals = np.full(G, float(T.g0))
    k = np.arange(1, T.K + 1, dtype=np.int64)
    step = max(1, _CHUNK // G)
    for s in range(0, T.K, step):
        ang = _phase_block(k[s : s + step], num, 2 * G)
        c = T.coeffs[s : s + step]
        vals += 2 * (c.real @ np.cos(ang) - c.imag @ np.sin(ang))
    return num / (2 * G), vals


def indicator(a, t) -> float:
    """X_a(t) = 1 if 0 < {t} <= a else 0, for float t."""
    f = t - np.floor(t)
    return ((f > 0) & (f <= float(a))).astype(float)
