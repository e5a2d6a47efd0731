import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatty_ps.errors import InvalidInput, PrecisionExhausted
from beatty_ps.reals import (
    IntPow,
    Quad,
    RealSpec,
    as_real,
    certified_ceil,
    certified_floor,
    certified_sign,
    fixed_frac,
    iroot,
    precision_budget,
    squarefree_decompose,
)




def mp_quad(A, B, D, d):
    return (mpmath.mpf(A) + B * mpmath.sqrt(d)) / D


@pytest.mark.parametrize(
    "text, expected",
    [
        ("sqrt2", "surd:(0+1*sqrt(2))/1"),
        ("golden", "surd:(1+1*sqrt(5))/2"),
        ("phi", "surd:(1+1*sqrt(5))/2"),
        ("rat:6/4", "rat:3/2"),
        ("-0.7", "rat:-7/10"),
        ("0", "rat:0/1"),
        ("surd:(2+2*sqrt(8))/4", "surd:(1+2*sqrt(2))/2"),
        ("sqrt9", "rat:3/1"),
        ("cf:[1;2,2,2]", "cf:[1;2,2,2]"),
        ("dec:1.41421356237309504880168872420969807856967187537694@50",
         "dec:1.41421356237309504880168872420969807856967187537694@50"),
    ],
)
def test_spec_parse_and_normalise(text, expected):
    spec = RealSpec.parse(text)
    assert str(spec) == expected
    assert RealSpec.parse(str(spec)) == spec


@pytest.mark.parametrize("bad", ["", "surd:(1+sqrt(-2))", "cf:[1;0,2]", "dec:1.5@10", "rat:1/0", "pi"])
def test_spec_rejects(bad):
    with pytest.raises(InvalidInput):
        RealSpec.parse(bad)


def test_squarefree_decompose():
    assert squarefree_decompose(72) == (6, 2)
    assert squarefree_decompose(5) == (1, 5)
    assert squarefree_decompose(1) == (1, 1)


def test_iroot():
    assert iroot(64, 3) == (4, True)
    assert iroot(65, 3) == (4, False)
    assert iroot(10**40, 2) == (10**20, True)


def test_certified_floor_examples():
    assert certified_floor(Quad.sqrt(2) * 12) == 16
    assert certified_floor(IntPow(4, Fraction(3, 2))) == 8
    with precision_budget(64, 4):
        with pytest.raises(PrecisionExhausted):
            # 29 nines certify, 30 nines put the enclosure against the integer 2
            certified_floor(RealSpec.parse("dec:1.999999999999999999999999999999@30").to_real() * 10**30)
    x = RealSpec.parse("dec:1.99999999999999999999999999999@30").to_real() * 10**19
    assert certified_floor(x) == 19999999999999999999


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.integers(1, 10**4), st.sampled_from([2, 3, 5, 6, 7, 10, 11]))
def test_quad_floor_matches_mpmath(A, B, D, d):
    q = Quad(A, B, D, d)
    ref = mp_quad(A, B, D, d)
    assert q.floor() == int(mpmath.floor(ref))
    assert q.ceil() == int(mpmath.ceil(ref))
    assert q.sign() == (0 if ref == 0 else (1 if ref > 0 else -1))


@given(st.integers(-10**4, 10**4), st.integers(1, 10**4), st.integers(-50, 50), st.integers(1, 50))
def test_quad_field_arithmetic(A, B, C, E):
    x = Quad(A, B, 7, 3)
    y = Quad(C, E, 5, 3)
    mx, my = mp_quad(A, B, 7, 3), mp_quad(C, E, 5, 3)
    assert abs(float((x * y)) - float(mx * my)) <= 1e-9 * max(1, abs(float(mx * my)))
    assert abs(float(x + y) - float(mx + my)) <= 1e-9 * max(1, abs(float(mx + my)))
    if y.sign() != 0:
        assert abs(float(x / y) - float(mx / my)) <= 1e-9 * max(1, abs(float(mx / my)))


def test_mixed_field_product_goes_through_enclosures():
    x = Quad.sqrt(2) * Quad.sqrt(3)  # leaves the field
    assert certified_floor(x * 1000) == int(mpmath.floor(1000 * mpmath.sqrt(6)))
    assert certified_sign(x - Fraction(2449, 1000)) == 1
    assert certified_sign(x - Fraction(245, 100)) == -1


def test_certified_ceil_and_integer_case():
    assert certified_ceil(Fraction(7, 2)) == 4
    assert certified_ceil(as_real(5)) == 5


@given(st.integers(1, 10**9))
def test_fixed_frac_of_sqrt2_multiples(n):
    F = fixed_frac(Quad.sqrt(2) * n, 64)
    ref = mpmath.frac(n * mpmath.sqrt(2))
    assert F == int(mpmath.floor(ref * 2**64))


def test_precision_budget_is_scoped():
    from beatty_ps.reals import current_budget

    before = current_budget()
    with precision_budget(128, 2):
        assert current_budget() == (128, 2)
    assert current_budget() == before


def test_booleans_rejected():
    with pytest.raises(InvalidInput):
        as_real(True)
    with pytest.raises(InvalidInput):
        certified_floor(math.inf)
