import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beatty_ps.errors import InvalidInput, WindowTooLarge
from beatty_ps.primes import (
    CountReport,
    count_beatty_primes,
    count_intersection,
    count_ps_in_ap,
    count_ps_primes,
    euler_phi,
    is_prime,
    mobius_upto,
    mobius_window,
    primes_upto,
    sieve_window,
    von_mangoldt,
    von_mangoldt_window,
)
from beatty_ps.sequences import BeattyParams, PSParams, ps_term


def trial_factor(n):
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def naive_prime(n):
    return n >= 2 and trial_factor(n) == {n: 1}


def test_primes_upto_small():
    assert primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_upto(10**6).size == 78498


@given(st.integers(0, 10**9), st.integers(1, 2000))
def test_sieve_window_matches_trial_division(lo, size):
    w = sieve_window(lo, lo + size)
    expected = [n for n in range(lo + 1, lo + size + 1) if naive_prime(n)]
    assert w.primes().tolist() == expected


def test_window_limits():
    with pytest.raises(WindowTooLarge):
        sieve_window(0, 2**26 + 1)
    with pytest.raises(InvalidInput):
        sieve_window(5, 5)


@given(st.integers(1, 10**12))
def test_is_prime_and_von_mangoldt(n):
    f = trial_factor(n) if n < 10**10 else None
    if f is not None:
        assert is_prime(n) == (f == {n: 1} and n > 1)
        pp = von_mangoldt(n)
        if len(f) == 1:
            (p, k), = f.items()
            assert pp.p == p and pp.k == k
        else:
            assert pp is None


@given(st.integers(0, 10**7), st.integers(1, 3000))
def test_von_mangoldt_window(lo, size):
    lam = von_mangoldt_window(lo, lo + size)
    for i in range(0, size, max(1, size // 40)):
        n = lo + 1 + i
        pp = von_mangoldt(n)
        assert lam[i] == (0.0 if pp is None else math.log(pp.p))


def test_chebyshev_psi():
    # psi(10^4) = sum of Lambda(n), n <= 10^4, against trial factorisation
    ref = math.fsum(math.log(next(iter(f))) for n in range(2, 10**4 + 1) if len(f := trial_factor(n)) == 1)
    assert math.fsum(von_mangoldt_window(0, 10**4)) == pytest.approx(ref, abs=1e-9)


def test_mobius():
    mu = mobius_upto(2000)
    for n in range(1, 2001):
        f = trial_factor(n)
        ref = 0 if any(k > 1 for k in f.values()) else (-1) ** len(f)
        assert mu[n] == ref
    # Mertens function M(10^5) = -48
    assert int(mobius_upto(10**5)[1:].astype(np.int64).sum()) == -48


@given(st.integers(0, 10**9), st.integers(1, 2000))
def test_mobius_window_matches_factorisation(lo, size):
    mu = mobius_window(lo, lo + size)
    for i in range(0, size, max(1, size // 30)):
        f = trial_factor(lo + 1 + i)
        ref = 0 if any(k > 1 for k in f.values()) else (-1) ** len(f)
        assert mu[i] == ref


def test_euler_phi():
    assert [euler_phi(d) for d in range(1, 13)] == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]


def brute_ps_primes(c, x):
    P = PSParams(c)
    out = []
    n = 1
    while (t := ps_term(P, n)) <= x:
        if naive_prime(t):
            out.append(t)
        n += 1
    return out


@pytest.mark.parametrize("c", [Fraction(3, 2), Fraction(21, 20), Fraction(13, 12)])
def test_ps_prime_count_small(c):
    x = 20000
    r = count_ps_primes(PSParams(c), x)
    assert r.count == len(brute_ps_primes(c, x))


def test_ps_desk_count():
    # PS primes floor(n^(3/2)) <= 100: 2, 5, 11, 31, 43, 67, 73
    P = PSParams(Fraction(3, 2))
    assert count_ps_primes(P, 100).count == len(brute_ps_primes(Fraction(3, 2), 100))
    assert count_ps_primes(P, 1).count == 0


def test_beatty_count_small():
    B = BeattyParams("sqrt2", "rat:3/10")
    x = 5000
    ref = sum(1 for n in range(1, 5000) if (m := math.floor(n * math.sqrt(2) + 0.3)) <= x and naive_prime(m))
    assert count_beatty_primes(B, x).count == ref


def test_intersection_bounded_by_each_sequence():
    B = BeattyParams("sqrt2", "rat:3/10")
    P = PSParams(Fraction(21, 20))
    x = 10**5
    both = count_intersection(B, P, x)
    assert both.count <= min(count_ps_primes(P, x).count, count_beatty_primes(B, x).count)
    assert both.count > 0
    assert both.notes == []


def test_intersection_warns_outside_range():
    with pytest.warns(UserWarning):
        r = count_intersection(BeattyParams("sqrt2", 0), PSParams(Fraction(3, 2)), 1000)
    assert r.notes


@pytest.mark.parametrize("d", [1, 3, 4, 10])
def test_ap_counts_partition(d):
    P = PSParams(Fraction(13, 12))
    x = 50000
    total = count_ps_primes(P, x).count
    parts = sum(count_ps_in_ap(P, d, a, x).count for a in range(1, d + 1) if math.gcd(a, d) == 1)
    small = sum(1 for p in brute_ps_primes(Fraction(13, 12), x) if d % p == 0)
    assert parts + small == total


def test_ap_main_term_convention():
    P = PSParams(Fraction(13, 12))
    a = count_ps_primes(P, 10**4)
    b = count_ps_in_ap(P, 1, 1, 10**4)
    assert a.count == b.count
    assert float(b.main_term / a.main_term) == pytest.approx(13 / 12, rel=1e-12)
    with pytest.raises(InvalidInput):
        count_ps_in_ap(P, 4, 2, 1000)


def test_workers_do_not_change_counts():
    P = PSParams(Fraction(21, 20))
    assert count_ps_primes(P, 3 * 10**6, workers=1).count == count_ps_primes(P, 3 * 10**6, workers=3).count


def test_report_round_trip():
    r = count_ps_primes(PSParams(Fraction(3, 2)), 10**5)
    back = CountReport.from_dict(r.to_dict())
    assert back.count == r.count
    assert back.to_dict() == r.to_dict()
