import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatty_ps.errors import InvalidInput
from beatty_ps.expsums import ExpSumSpec, Phase, exp_sum
from beatty_ps.primes import von_mangoldt
from beatty_ps.sequences import BeattyParams, PSParams
from beatty_ps.vaughan import (
    VaughanParams,
    bilinear_split,
    bulk_coefficients,
    coeff_a,
    coeff_b,
    factorize,
    identity_residuals,
    vaughan_terms,
)


def divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


def mu_naive(n):
    f, m, p = 0, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            f += 1
        p += 1
    if m > 1:
        f += 1
    return (-1) ** f


def lam_naive(n):
    pp = von_mangoldt(n)
    return 0.0 if pp is None else math.log(pp.p)


def test_examples():
    t1, t2, t3, total = vaughan_terms(5, 2, 2)
    assert (t1, t2, t3) == pytest.approx((0, math.log(5), 0), abs=1e-15)
    t1, t2, t3, total = vaughan_terms(6, 2, 2)
    assert (t1, t2, t3) == pytest.approx((-math.log(2), math.log(2), 0), abs=1e-15)
    assert vaughan_terms(6, 2, 2).total_exact == {}
    with pytest.raises(InvalidInput):
        vaughan_terms(2, 2, 2)


@given(st.integers(2, 10**9))
def test_factorize(n):
    f = factorize(n)
    assert math.prod(p**e for p, e in f.items()) == n
    assert all(p == 2 or p % 2 for p in f)


@given(st.integers(3, 10**7), st.integers(1, 40), st.integers(1, 60))
def test_identity_is_exact(n, U, V):
    if n <= U:
        return
    T = vaughan_terms(n, U, V)
    pp = von_mangoldt(n)
    expected = {} if pp is None else {pp.p: 1}
    assert T.total_exact == expected
    assert T.total == pytest.approx(lam_naive(n), abs=1e-12)


@given(st.integers(1, 3000), st.integers(1, 30), st.integers(1, 30))
def test_coefficients_against_divisor_sums(k, U, V):
    a_ref = math.fsum(lam_naive(c) * mu_naive(k // c) for c in divisors(k) if c <= U and k // c <= V)
    b_ref = sum(mu_naive(d) for d in divisors(k) if d <= V)
    assert coeff_a(k, U, V) == pytest.approx(a_ref, abs=1e-12)
    assert coeff_b(k, V) == b_ref


def test_bulk_matches_exact_route():
    U, V = 5, 10
    a, b = bulk_coefficients(3000, U, V)
    for k in range(1, 3001, 7):
        assert a[k] == pytest.approx(coeff_a(k, U, V), abs=1e-12)
        assert b[k] == coeff_b(k, V)


@pytest.mark.parametrize("U, V", [(2, 2), (5, 10), (31, 17), (7, 300)])
def test_bulk_residuals(U, V):
    r = identity_residuals(2 * 10**5, U, V)
    assert r.size == 2 * 10**5 - U
    assert r.max() < 1e-9


def test_params_for_N():
    p = VaughanParams.for_N(10**7)
    assert (p.u, p.v) == (10, 1000)  # 10^7 = (10^(7/7), 10^(21/7)) exactly
    assert VaughanParams.for_N(10**7 - 1).u == 9
    with pytest.raises(InvalidInput):
        VaughanParams(0.5, 3)


def test_bilinear_split():
    B, P = BeattyParams("sqrt2", "rat:3/10"), PSParams(Fraction(21, 20))
    ev, residual = bilinear_split(1000, 2000, None, 1, 1, B, P)
    S = {e.label: e for e in ev}
    assert residual < 1e-9
    # S4 and S5 split S1 exactly, in exact rational arithmetic
    assert S["S4"].exact[0] + S["S5"].exact[0] == S["S1"].exact[0]
    assert S["S4"].exact[1] + S["S5"].exact[1] == S["S1"].exact[1]
    # the direct sum agrees with the generic weighted exponential sum
    ph = Phase.mixed(1, B, 1, P.gamma)
    assert abs(S["direct"].value - exp_sum(ExpSumSpec(ph, 1000, 2000, "lambda"))) < 1e-9
    assert S["direct"].term_count == 1000
    with pytest.raises(InvalidInput):
        bilinear_split(1000, 2000, None, 0, 1, B, P)


@given(st.integers(50, 20000), st.integers(-5, 5), st.integers(1, 5))
def test_bilinear_residual_small(N, k, h):
    if k == 0:
        return
    B, P = BeattyParams("golden", "rat:1/2"), PSParams(Fraction(13, 12))
    N2 = N + max(1, N // 3)
    ev, residual = bilinear_split(N, N2, None, k, h, B, P)
    assert residual <= 1e-10 * max(1.0, sum(e.magnitude_sum for e in ev))
