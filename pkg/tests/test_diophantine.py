import math
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatty_ps.diophantine import (
    cf_expand,
    check_convergent_bounds,
    convergent,
    discrepancy_bounds,
    discrepancy_exact,
    discrepancy_profile,
    dist_nearest_int,
    estimate_type,
    weyl_points,
)
from beatty_ps.errors import IndexOutOfRange, InvalidInput, PrecisionExhausted


def brute_discrepancy(points):
    """Every interval with endpoints in {0, 1, points}, in all four closure types."""
    M = len(points)
    ends = sorted(set(points) | {Fraction(0), Fraction(1)})
    best = Fraction(0)
    for lo, hi in product(ends, repeat=2):
        if hi < lo:
            continue
        for lc, rc in product((True, False), repeat=2):
            if lo == hi and not (lc and rc):
                continue
            if hi == 1 and rc:
                continue
            inside = sum(
                1 for p in points if (p > lo or (lc and p == lo)) and (p < hi or (rc and p == hi))
            )
            best = max(best, abs(Fraction(inside, M) - (hi - lo)))
    return best


def test_cf_examples():
    assert cf_expand("rat:7/3", 10).quotients == (2, 3)
    assert cf_expand("rat:7/3", 10).terminated
    assert cf_expand("sqrt2", 5).quotients == (1, 2, 2, 2, 2, 2)
    assert cf_expand("golden", 6).quotients == (1,) * 7
    assert cf_expand("sqrt3", 4).quotients == (1, 1, 2, 1, 2)


def test_cf_of_decimal_stops_when_uncertified():
    x = "dec:1.41421356237309504880168872420969807856967187537694@50"
    assert cf_expand(x, 20).quotients == (1,) + (2,) * 20
    with pytest.raises(PrecisionExhausted):
        cf_expand("dec:1.414213562373095048801688724209@30", 60)
    with pytest.raises(PrecisionExhausted):
        cf_expand("cf:[1;2,2]", 5)


def test_convergents():
    cf = cf_expand("cf:[1;2,2,2]", 3)
    assert convergent(cf, 3) == (17, 12)
    assert convergent(cf_expand("golden", 4), 4) == (8, 5)
    with pytest.raises(IndexOutOfRange):
        convergent(cf, 4)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=25), st.integers(-5, 5))
def test_convergent_determinant(pq, a0):
    spec = f"cf:[{a0};" + ",".join(map(str, pq)) + "]"
    cf = cf_expand(spec, len(pq))
    cv = cf.convergents
    for k in range(1, len(cv)):
        (p0, q0), (p1, q1) = cv[k - 1], cv[k]
        assert p1 * q0 - p0 * q1 == (-1) ** (k + 1)
        assert math.gcd(p1, q1) == 1


@pytest.mark.parametrize("x", ["sqrt2", "golden", "sqrt7", "surd:(3+2*sqrt(11))/5"])
def test_convergent_bounds_certified(x):
    assert check_convergent_bounds(x, cf_expand(x, 30))


def test_dist_nearest_int():
    assert float(dist_nearest_int("sqrt2", 12)) == pytest.approx(0.029437251522859, abs=1e-12)
    assert float(dist_nearest_int("rat:3/1", 5)) == 0
    assert float(dist_nearest_int("rat:1/2", 3)) == 0.5
    with pytest.raises(InvalidInput):
        dist_nearest_int("sqrt2", 0)


@given(st.integers(1, 10**12))
def test_dist_nearest_int_matches_mpmath(n):
    mpmath.mp.dps = 50
    t = n * mpmath.sqrt(3)
    ref = abs(t - mpmath.nint(t))
    e = dist_nearest_int("sqrt3", n)
    assert e.lo <= Fraction(str(ref + mpmath.mpf(10) ** -40)) and Fraction(str(ref - mpmath.mpf(10) ** -40)) <= e.hi
    assert e.width < Fraction(1, 10**20)


def test_estimate_type():
    tau, table = estimate_type("golden", 30)
    assert 1 <= tau <= 1.1
    assert 1 <= estimate_type("sqrt2", 30).tau_hat <= 1.2
    assert len(table) > 10
    with pytest.raises(InvalidInput):
        estimate_type("rat:7/3", 10)


def test_discrepancy_examples():
    assert discrepancy_exact([0, 0.25, 0.5, 0.75]).D == Fraction(1, 4)
    assert discrepancy_exact([Fraction(1, 10), Fraction(9, 10)]).D == Fraction(4, 5)
    assert float(discrepancy_exact([0.1, 0.9])) == pytest.approx(0.8)
    # a degenerate interval around a single point carries all of the mass
    assert discrepancy_exact([0.5]).D == 1
    lo, hi = discrepancy_bounds([0.5])
    assert (lo, hi) == pytest.approx((0.5, 1.0))
    assert discrepancy_bounds(np.arange(100) / 100).star == pytest.approx(0.01)
    with pytest.raises(InvalidInput):
        discrepancy_exact([1.0])


points = st.lists(st.fractions(0, 1, max_denominator=40).filter(lambda f: f < 1), min_size=1, max_size=12)


@given(points)
def test_exact_discrepancy_matches_enumeration(pts):
    assert discrepancy_exact(pts).D == brute_discrepancy(pts)


@given(points)
def test_bounds_bracket_exact_value(pts):
    floats = [float(p) for p in pts]
    D = float(discrepancy_exact(floats).D)
    b = discrepancy_bounds(floats)
    assert b.lower <= D <= b.upper


@given(st.integers(1, 5000), st.integers(0, 2**32))
def test_weyl_points_within_error(M, seed):
    pts, err = weyl_points("sqrt2", "rat:3/10", M)
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, M + 1))
    mpmath.mp.dps = 40
    ref = float(mpmath.frac(m * mpmath.sqrt(2) + mpmath.mpf(3) / 10))
    assert pts[m - 1] - 1e-16 <= ref <= pts[m - 1] + err + 1e-16


def test_profile_decreasing_for_sqrt2():
    rows = discrepancy_profile("sqrt2", "rat:3/10", [10, 100, 1000, 10**4, 10**5])
    uppers = [r.upper for r in rows]
    assert all(a > b for a, b in zip(uppers, uppers[1:]))
    assert all(r.lower <= r.upper for r in rows)
    with pytest.raises(InvalidInput):
        discrepancy_profile("rat:1/3", 0, [10])
