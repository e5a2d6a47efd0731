"""The acceptance battery: one deterministic check per criterion.

Every check returns a ``Check`` whose ``details`` hold only reproducible data;
wall-clock time is kept apart in ``elapsed_s`` so payloads can be compared
byte for byte across thread counts.
"""
from __future__ import annotations

import math
import random
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import diophantine as dio
from . import expsums as es
from . import harmonic as hm
from . import primes as pr
from . import vaughan as vg
from .sequences import BeattyParams, PSParams, beatty_contains, ps_indicator_range


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed_s: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion:>2} {self.name} ({self.elapsed_s:.1f} s)"

    def payload(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed, "details": self.details}


# ---------------------------------------------------------------------------
# brute-force oracles (deliberately independent of the library routes)


def _floor_quadratic_affine(p: int, q: int, d: int, r: int, beta: Fraction, n: int) -> int:
    """floor(n*(p + q*sqrt(d))/r + beta) with q > 0, via one integer square root."""
    # n*(p + q sqrt d)/r + u/w = (w n p + r u + w n q sqrt d) / (r w)
    u, w = beta.numerator, beta.denominator
    A = w * n * p + r * u
    s = math.isqrt(w * w * n * n * q * q * d)
    return (A + s) // (r * w)


def beatty_image(p, q, d, r, beta: Fraction, m_max: int) -> set[int]:
    out = set()
    n = 1
    while True:
        t = _floor_quadratic_affine(p, q, d, r, beta, n)
        if t > m_max + 2:
            return out
        out.add(t)
        n += 1


def ps_image(c: Fraction, m_max: int) -> set[int]:
    """{floor(n^c)}: float guess corrected with exact integer powers."""
    p, q = c.numerator, c.denominator
    out = set()
    n = 1
    while True:
        t = int(n ** float(c))
        np_ = n**p
        while (t + 1) ** q <= np_:
            t += 1
        while t**q > np_:
            t -= 1
        if t > m_max:
            return out
        out.add(t)
        n += 1


# ---------------------------------------------------------------------------
# criteria


BEATTY_CASES = [
    ("sqrt2", "0", (0, 1, 2, 1), Fraction(0)),
    ("golden", "1/2", (1, 1, 5, 2), Fraction(1, 2)),
    ("sqrt3", "-7/10", (0, 1, 3, 1), Fraction(-7, 10)),
]


def check_beatty_oracle(workers: int = 1, m_max: int = 10**5) -> Check:
    rows = []
    ok = True
    for alpha, beta, surd, beta_f in BEATTY_CASES:
        B = BeattyParams(alpha, beta)
        image = beatty_image(*surd, beta_f, m_max)
        mismatches = [m for m in range(1, m_max + 1) if beatty_contains(B, m) != (m in image)]
        ok &= not mismatches
        rows.append({"alpha": alpha, "beta": beta, "members": sum(1 for m in image if 1 <= m <= m_max),
                     "mismatches": len(mismatches), "first_mismatch": mismatches[0] if mismatches else None})
    return Check(1, "beatty membership equals brute-force image", ok, {"m_max": m_max, "cases": rows})


PS_CASES = ["3/2", "21/20", "13/12"]


def check_ps_oracle(workers: int = 1, m_max: int = 10**6) -> Check:
    rows = []
    ok = True
    for c in PS_CASES:
        P = PSParams(c)
        ind = ps_indicator_range(P, 1, m_max + 1)
        image = ps_image(P.c, m_max)
        brute = np.zeros(m_max, dtype=np.uint8)
        brute[np.fromiter(image, dtype=np.int64) - 1] = 1
        bad = np.nonzero(ind != brute)[0]
        ok &= bad.size == 0
        rows.append({"c": c, "members": int(brute.sum()), "mismatches": int(bad.size)})
    return Check(2, "ps_indicator equals brute-force term set", ok, {"m_max": m_max, "cases": rows})


def check_desk_counts(workers: int = 1) -> Check:
    B = BeattyParams("sqrt2", "0")
    P = PSParams("3/2")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        got = {
            "count_ps_primes(3/2,100)": pr.count_ps_primes(P, 100, workers=workers).count,
            "count_beatty_primes(sqrt2,0,100)": pr.count_beatty_primes(B, 100, workers=workers).count,
            "count_intersection(sqrt2,0,3/2,100)": pr.count_intersection(B, P, 100, workers=workers).count,
            "count_ps_in_ap(3/2,4,1,100)": pr.count_ps_in_ap(P, 4, 1, 100, workers=workers).count,
        }
    want = dict(zip(got, (6, 17, 6, 3)))
    return Check(3, "desk-scale counts", got == want, {"got": got, "expected": want})


def _count_row(rep: pr.CountReport) -> dict:
    d = rep.to_dict()
    d.pop("elapsed_ms")
    d["budget_ok"] = abs(rep.deviation) <= 5 * rep.error_budget
    return d


def check_intersection_trend(workers: int = 1, xs=(10**5, 10**6, 10**7)) -> Check:
    B = BeattyParams("sqrt2", "3/10")
    P = PSParams("21/20")
    rows = [_count_row(pr.count_intersection(B, P, x, workers=workers)) for x in xs]
    dev = [abs(r["ratio"] - 1) for r in rows]
    ok = dev[-1] <= 0.2 and dev[-1] <= dev[0] and all(r["budget_ok"] for r in rows)
    return Check(4, "intersection count ratio trend (sqrt2, 0.3, 21/20)", ok, {"rows": rows, "abs_dev": dev})


def check_ps_trend(workers: int = 1, xs=(10**5, 10**6, 10**7)) -> Check:
    P = PSParams("21/20")
    rows = [_count_row(pr.count_ps_primes(P, x, workers=workers)) for x in xs]
    dev = [abs(r["ratio"] - 1) for r in rows]
    ok = dev[-1] <= 0.15 and dev[-1] <= dev[0] and all(r["budget_ok"] for r in rows)
    return Check(5, "PS prime count ratio trend (21/20)", ok, {"rows": rows, "abs_dev": dev})


VAUGHAN_SETTINGS = [(2, 2), (5, 10), (31, 17)]


def check_vaughan_identity(workers: int = 1, n_max: int = 10**5) -> Check:
    rows = []
    ok = True
    for U, V in VAUGHAN_SETTINGS:
        bulk = float(vg.identity_residuals(n_max, U, V).max())
        exact_bad = 0
        worst = 0.0
        for n in range(U + 1, n_max + 1):
            T = vg.vaughan_terms(n, U, V)
            lam = pr.von_mangoldt(n)
            want = {lam.p: 1} if lam else {}
            if T.total_exact != want:
                exact_bad += 1
            worst = max(worst, abs(T.T1 + T.T2 + T.T3 - (lam.log if lam else 0.0)))
        ok &= bulk <= 1e-10 and worst <= 1e-10 and exact_bad == 0
        rows.append({"U": U, "V": V, "bulk_max_residual": bulk, "divisor_route_max_residual": worst,
                     "exact_mismatches": exact_bad})
    return Check(6, "Vaughan identity on (U, 1e5]", ok, {"n_max": n_max, "settings": rows})


def check_vaaler(workers: int = 1) -> Check:
    reps = [hm.majorant_check(hm.vaaler_approx(H), 10**4) for H in (10, 100, 1000)]
    sup = [r.sup_error for r in reps]
    ok = all(r.max_violation <= 1e-12 for r in reps) and all(a > b for a, b in zip(sup, sup[1:]))
    return Check(7, "Vaaler majorant and decreasing sup error", ok, {"reports": [r.to_dict() for r in reps]})


VINOGRADOV_CASES = [
    ("0.707106781186547524400844362105", "1/20", 100),
    ("1/3", "1/50", 200),
    ("1/2", "1/16", 16),
    ("9/10", "1/40", 80),
]


def _vinogradov_row(a, delta, K, grid=10**4) -> dict:
    T = hm.vinogradov_indicator(a, delta, K)
    k = np.arange(1, K + 1)
    bound = np.minimum(1 / (np.pi * k), 4 / (np.pi**2 * k * k * float(T.delta)))
    coeff_ok = bool(np.all(np.abs(T.coeffs) <= bound * (1 + 1e-12)))
    t, v = hm.trig_eval_grid(T, grid)
    budget = T.truncation_budget
    af, df = float(T.a), float(T.delta)
    plateau = (t >= df) & (t <= af - df)
    zero = (t >= af + df) & (t <= 1 - df)
    range_err = float(max(0.0, -v.min(), v.max() - 1))
    plateau_err = float(np.max(np.abs(v[plateau] - 1)))
    zero_err = float(np.max(np.abs(v[zero])))
    _, v8 = hm.trig_eval_grid(hm.vinogradov_indicator(a, delta, 8 * K), grid)
    trunc = float(np.max(np.abs(v - v8)))
    ok = (T.g0 == T.a and coeff_ok and range_err <= budget and plateau_err <= budget
          and zero_err <= budget and trunc <= budget)
    return {"a": str(T.a), "delta": str(T.delta), "K": K, "g0_exact": T.g0 == T.a, "coeff_bound_ok": coeff_ok,
            "budget": budget, "range_err": range_err, "plateau_err": plateau_err, "zero_err": zero_err,
            "K_vs_8K": trunc, "parseval": T.parseval_sum(), "ok": ok}


def check_vinogradov(workers: int = 1) -> Check:
    rows = [_vinogradov_row(*c) for c in VINOGRADOV_CASES]
    return Check(8, "Vinogradov smoothed indicator properties", all(r["ok"] for r in rows), {"cases": rows})


def _discrepancy_sets() -> list[tuple[str, list]]:
    rng = random.Random(20240101)
    sets = [("single", [0.5]), ("pair", [0.0, 0.5]), ("ties", [0.25] * 5 + [0.75] * 3)]
    for M in (2, 10, 100, 1000, 4096):
        sets.append((f"uniform{M}", [rng.random() for _ in range(M)]))
    for M in (17, 500, 4096):
        sets.append((f"grid{M}", [Fraction(j, M) for j in range(M)]))
    for M in (50, 1000, 4096):
        pts, _ = dio.weyl_points("golden", "0", M)
        sets.append((f"golden{M}", pts.tolist()))
    return sets


def check_discrepancy(workers: int = 1) -> Check:
    rows = []
    ok = True
    for name, pts in _discrepancy_sets():
        ex = dio.discrepancy_exact(pts)
        b = dio.discrepancy_bounds([float(p) for p in pts])
        inside = b.lower <= float(ex.D) <= b.upper
        ok &= inside
        rows.append({"set": name, "M": ex.M, "exact": float(ex.D), "lower": b.lower, "upper": b.upper, "inside": inside})
    profile = dio.discrepancy_profile("golden", "0", [10**j for j in range(1, 7)])
    prof_rows = [{"M": r.M, "upper": r.upper, "upper_M_over_logM": r.log_scaled} for r in profile]
    ok &= all(r["upper_M_over_logM"] <= 3 for r in prof_rows)
    return Check(9, "discrepancy containment and golden-ratio profile", ok, {"sets": rows, "profile": prof_rows})


def standard_sweep(workers: int = 1, N_max: int = 10**6) -> list[es.BoundRatio]:
    """The fixed battery of bound-ratio measurements."""
    out = []
    Ns = [N for N in (10**3, 10**4, 10**5, 10**6) if N <= N_max]
    families = [
        es.Phase.quadratic("surd:(0+1*sqrt(2))/1000"),
        es.Phase.power(1, Fraction(2, 3)),
        es.Phase.power(10, Fraction(1, 2)),
        es.Phase(powers=((1, Fraction(12, 13)),)),
    ]
    for f in families:
        for N in Ns:
            out.append(es.vdc_ratio(f, N, workers=workers))
    g = Fraction(12, 13)
    for N in Ns[1:]:
        K1 = vg.iroot(N**3, 7)[0]
        for m in (1, 4):
            out.append(es.type1_ratio(K1, N, m=m, gamma=g))
        K2 = max(K1 + 1, int(N**0.45))
        out.append(es.type2_ratio(K2, N, gamma=g))
        out.append(es.type2_ratio(K2, N, gamma=g, a_k="mu", b_l="lambda"))
    for N in Ns[1:]:
        out.append(es.prime_reduction_check(es.Phase.linear("sqrt2"), N))
        out.append(es.prime_reduction_check(None, N))
        out.append(es.prime_reduction_check(es.Phase.linear("1/2"), N))
    return out


def lambda_trend(Ms=(10**4, 10**5, 10**6)) -> list[dict]:
    rows = []
    for M in Ms:
        value, exponent = es.lambda_twisted(1, 0, "sqrt2", 1, M)
        rows.append({"M": M, "re": value.real, "im": value.imag, "exponent": exponent})
    return rows


def check_dashboards(workers: int = 1) -> Check:
    ratios = standard_sweep(workers)
    rows = [r.to_dict() for r in ratios]
    lam = lambda_trend()
    ex = [r["exponent"] for r in lam]
    ok = all(r.ratio <= 10 for r in ratios) and ex[0] < 1 and all(b <= a + 0.05 for a, b in zip(ex, ex[1:]))
    worst = max(rows, key=lambda r: r["ratio"])
    return Check(10, "bound-ratio dashboards", ok,
                 {"max_ratio": worst["ratio"], "max_ratio_check": worst["check"], "ratios": rows, "lambda_twisted": lam})


def bilinear_triples(count: int = 20, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        N = rng.randint(100, 10**4 // 2)
        out.append({
            "N": N,
            "N2": rng.randint(N + 1, 2 * N),
            "k": rng.choice([-3, -2, -1, 1, 2, 3, 5]),
            "h": rng.randint(1, 6),
            "alpha": rng.choice(["sqrt2", "golden", "sqrt3"]),
            "beta": rng.choice(["0", "3/10", "-1/2"]),
            "c": rng.choice(["3/2", "21/20", "13/12"]),
        })
    return out


def check_bilinear(workers: int = 1) -> Check:
    rows = []
    ok = True
    for t in bilinear_triples():
        ev, res = vg.bilinear_split(t["N"], t["N2"], None, t["k"], t["h"], BeattyParams(t["alpha"], t["beta"]), PSParams(t["c"]))
        S1, S4, S5 = ev[0].exact, ev[3].exact, ev[4].exact
        split_exact = S4[0] + S5[0] == S1[0] and S4[1] + S5[1] == S1[1]
        good = res <= 1e-6 * t["N"] and split_exact
        ok &= good
        rows.append({**t, "residual": res, "split_exact": split_exact, "ok": good})
    return Check(11, "bilinear reconstruction and S4+S5=S1", ok, {"triples": rows})


CHECKS: dict[int, Callable[..., Check]] = {
    1: check_beatty_oracle,
    2: check_ps_oracle,
    3: check_desk_counts,
    4: check_intersection_trend,
    5: check_ps_trend,
    6: check_vaughan_identity,
    7: check_vaaler,
    8: check_vinogradov,
    9: check_discrepancy,
    10: check_dashboards,
    11: check_bilinear,
}


def run_suite(workers: int = 1, only=None, log: Callable[[str], None] | None = None) -> list[Check]:
    out = []
    for num, fn in CHECKS.items():
        if only and num not in only:
            continue
        t0 = time.perf_counter()
        c = fn(workers)
        c.elapsed_s = time.perf_counter() - t0
        if log:
            log(c.line())
        out.append(c)
    return out

# wall-clock targets in seconds (single worker); criteria without one are absent
RUNTIME_TARGETS_S = {1: 10, 2: 30, 4: 300, 5: 300, 6: 60, 7: 10, 8: 10, 9: 60, 10: 600, 11: 60}
