import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatty_ps.errors import HypothesisViolated, InvalidInput, TermBudgetExceeded
from beatty_ps.expsums import (
    BoundRatio,
    ExpSumSpec,
    Phase,
    exp_sum,
    lambda_twisted,
    prime_reduction_check,
    type1_ratio,
    type2_ratio,
    type_sum,
    vdc_ratio,
)
from beatty_ps.primes import mobius_upto, primes_upto, von_mangoldt
from beatty_ps.reals import RealSpec
from beatty_ps.sequences import BeattyParams


def e(x):
    return cmath.exp(2j * math.pi * x)


def mp_frac(x):
    return x - mpmath.floor(x)


@given(st.integers(1, 10**9))
def test_quadratic_phase_reduction(n):
    mpmath.mp.dps = 60
    F = Phase.quadratic("sqrt2").frac_fixed(n)
    ref = mp_frac(n * n * mpmath.sqrt(2)) * 2**64
    assert abs(F - ref) <= 1


@given(st.integers(1, 10**9))
def test_mixed_phase_reduction(n):
    mpmath.mp.dps = 60
    B = BeattyParams("golden", "rat:1/2")
    ph = Phase.mixed(3, B, Fraction(5, 2), Fraction(12, 13))
    phi = (1 + mpmath.sqrt(5)) / 2
    a, b = 1 / phi, (1 - mpmath.mpf(1) / 2) / phi
    val = 3 * a * n + 3 * b + mpmath.mpf(5) / 2 * mpmath.power(n, mpmath.mpf(12) / 13)
    F = ph.frac_fixed(n)
    diff = (F - mp_frac(val) * 2**64) % 2**64
    assert min(diff, 2**64 - diff) <= 2


@given(st.integers(1, 10**9), st.fractions(-50, 50, max_denominator=9))
def test_power_phase_reduction(n, h):
    mpmath.mp.dps = 60
    ph = Phase.power(h, Fraction(3, 4))
    F = ph.frac_fixed(n)
    ref = mp_frac(mpmath.mpf(h.numerator) / h.denominator * mpmath.power(n, mpmath.mpf(3) / 4)) * 2**64
    diff = (F - ref) % 2**64
    assert min(diff, 2**64 - diff) <= 1


def test_gauss_sum():
    s = exp_sum(ExpSumSpec(Phase.quadratic("rat:1/13"), 0, 13))
    assert abs(s) == pytest.approx(math.sqrt(13), abs=1e-12)


@given(st.integers(1, 40), st.integers(2, 41), st.integers(0, 500), st.integers(1, 500))
def test_geometric_sum_closed_form(p, q, N, L):
    if p % q == 0:
        return
    z = e(Fraction(p, q))
    ref = z ** (N + 1) * (1 - z**L) / (1 - z)
    s = exp_sum(ExpSumSpec(Phase.linear(f"rat:{p}/{q}"), N, N + L))
    assert abs(s - ref) < 1e-10


@given(st.integers(0, 10**6), st.integers(1, 3000), st.integers(1, 3000), st.sampled_from(["1", "lambda", "mu", "log"]))
def test_sum_is_additive_over_ranges(N, L1, L2, weight):
    ph = Phase.power(Fraction(3), Fraction(2, 3))
    whole = exp_sum(ExpSumSpec(ph, N, N + L1 + L2, weight))
    parts = exp_sum(ExpSumSpec(ph, N, N + L1, weight)) + exp_sum(ExpSumSpec(ph, N + L1, N + L1 + L2, weight))
    assert abs(whole - parts) < 1e-9 * (L1 + L2)


def test_weighted_sums_against_direct_loop():
    ph = Phase.linear("sqrt3")
    mu = mobius_upto(2000)
    ref_mu = sum(int(mu[n]) * e(n * mpmath.sqrt(3)) for n in range(1001, 2001))
    ref_lam = sum((math.log(pp.p) if (pp := von_mangoldt(n)) else 0) * e(n * mpmath.sqrt(3)) for n in range(1001, 2001))
    assert abs(exp_sum(ExpSumSpec(ph, 1000, 2000, "mu")) - complex(ref_mu)) < 1e-9
    assert abs(exp_sum(ExpSumSpec(ph, 1000, 2000, "lambda")) - complex(ref_lam)) < 1e-9


def test_sum_is_bitwise_independent_of_workers():
    spec = ExpSumSpec(Phase.quadratic("sqrt2"), 0, 3 * 2**18 + 17)
    assert exp_sum(spec, workers=1) == exp_sum(spec, workers=3)


def test_term_budget():
    with pytest.raises(TermBudgetExceeded):
        exp_sum(ExpSumSpec(Phase.linear("sqrt2"), 0, 10**9 + 1))
    with pytest.raises(InvalidInput):
        ExpSumSpec(Phase.linear("sqrt2"), 5, 5)


def test_phase_params_round_trip():
    ph = Phase.mixed(2, BeattyParams("sqrt2", "rat:3/10"), 1, Fraction(20, 21))
    assert Phase.from_params(ph.params()) == ph


def test_vdc():
    r = vdc_ratio(Phase.quadratic("surd:(0+1*sqrt(2))/1000"), 1000)
    assert r.bound == pytest.approx(1000 * math.sqrt(2 * math.sqrt(2) / 1000) + 1 / math.sqrt(2 * math.sqrt(2) / 1000))
    assert r.ratio <= 1
    with pytest.raises(InvalidInput):
        vdc_ratio(Phase.linear("sqrt2"), 100)  # f'' = 0
    with pytest.raises(InvalidInput):
        # n^(3/2) - 3 n^2/100: f'' changes sign between 100 and 200
        vdc_ratio(Phase((RealSpec.rational(0), RealSpec.rational(0), RealSpec.rational(-3, 100)),
                        ((Fraction(1), Fraction(3, 2)),)), 100)


def brute_type_sum(K, N, N1, gamma, h, d, a, b):
    total = 0
    for k in range(K + 1, 2 * K + 1):
        for l in range(N // k + 1, N1 // k + 1):
            n = k * l
            total += a(k) * b(l) * e(mpmath.power(n, mpmath.mpf(gamma.numerator) / gamma.denominator) + Fraction(n * h, d))
    return complex(total)


def test_type_sum_against_double_loop():
    mpmath.mp.dps = 30
    g = Fraction(12, 13)
    mu = mobius_upto(2000)
    ref = brute_type_sum(7, 500, 900, g, 2, 5, lambda k: 1, lambda l: int(mu[l]))
    assert abs(type_sum(7, 500, 900, 1, g, 2, 5, "one", "mu") - ref) < 1e-9
    ref = brute_type_sum(7, 500, 900, g, 1, 1, lambda k: (-1) ** (k % 2), lambda l: 1)
    assert abs(type_sum(7, 500, 900, 1, g, 1, 1, "alternating", "one") - ref) < 1e-9


def test_type_ratios_and_hypotheses():
    r = type1_ratio(10, 10**4)
    assert 0 < r.ratio < 1
    with pytest.raises(HypothesisViolated):
        type1_ratio(100, 10**4)
    assert type2_ratio(60, 10**4, a_k="mu", b_l="lambda").ratio < 1
    with pytest.raises(HypothesisViolated):
        type2_ratio(10, 10**4)
    back = BoundRatio.from_dict(r.to_dict())
    assert back.ratio == r.ratio


def test_lambda_twisted_small():
    mpmath.mp.dps = 30
    q, a, k, M = 4, 1, 3, 2000
    ref = 0
    for m in range(1, M + 1):
        pp = von_mangoldt(q * m + a)
        if pp:
            ref += math.log(pp.p) * e(mpmath.sqrt(2) * k * m)
    v, expo = lambda_twisted(q, a, "sqrt2", k, M)
    assert abs(v - complex(ref)) < 1e-8
    assert expo == pytest.approx(math.log(abs(v)) / math.log(M))
    # k = 0 is the plain sum of Lambda over the progression
    v0, _ = lambda_twisted(q, a, "sqrt2", 0, M)
    plain = math.fsum(math.log(pp.p) for m in range(1, M + 1) if (pp := von_mangoldt(q * m + a)))
    assert v0 == pytest.approx(plain)
    with pytest.raises(InvalidInput):
        lambda_twisted(4, 2, "sqrt2", 1, 100)


def test_prime_reduction_counts_primes_for_constant_g():
    N = 10**4
    r = prime_reduction_check(None, N)
    pr = primes_upto(2 * N)
    assert r.measured == np.count_nonzero(pr > N)
    assert r.ratio < 1
    with pytest.raises(InvalidInput):
        prime_reduction_check(None, 1)
