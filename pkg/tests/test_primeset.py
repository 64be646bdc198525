import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpflab.errors import InvalidArgument, PreconditionError
from lpflab.primeset import (PrimeSetSpec, build_density_error, choose_y, li_at_integers,
                             logarithmic_integral, natural_density, pi_S, pi_S_counts, threshold_C)

from conftest import is_prime, pmax_of

mpmath.mp.dps = 30


def mp_Li(x):
    return float(mpmath.li(x) - mpmath.li(2))


def test_natural_density():
    assert natural_density(PrimeSetSpec.all()) == 1
    assert natural_density(PrimeSetSpec.residue(1, 4)) == Fraction(1, 2)
    assert natural_density(PrimeSetSpec.residue(2, 10)) == 0
    assert natural_density(PrimeSetSpec.residue(3, 7)) == Fraction(1, 6)
    assert natural_density(PrimeSetSpec.explicit([2, 3, 5])) == 0


def test_invalid_sets():
    with pytest.raises(InvalidArgument):
        PrimeSetSpec.residue(1, 0)
    with pytest.raises(InvalidArgument):
        PrimeSetSpec.explicit([4])


def test_pi_S_brute(table):
    S = PrimeSetSpec.residue(3, 4)
    assert pi_S(table, S, 1000) == sum(1 for p in range(2, 1001) if is_prime(p) and p % 4 == 3)
    counts = pi_S_counts(table, S, 200)
    for x in range(0, 201, 7):
        assert counts[x] == sum(1 for p in range(2, x + 1) if is_prime(p) and p % 4 == 3)


def test_worked_counts(table):
    assert pi_S(table, PrimeSetSpec.residue(1, 4), 20) == 3
    assert pi_S(table, PrimeSetSpec.explicit([7]), 100) == 1
    dt = build_density_error(table, PrimeSetSpec.all(), [10])
    ys = np.linspace(2, 10, 80001)
    scan = max(abs(sum(1 for p in (2, 3, 5, 7) if p <= y) - mp_Li(y)) for y in ys)
    assert dt.e_S[0] == pytest.approx(scan, abs=1e-3)


def test_empty_set_gives_full_beta(table):
    grid = [10, 100, 1000, 10**4, 10**5, 10**6]
    v = build_density_error(table, PrimeSetSpec.explicit([]), grid)
    assert np.all(v.v_S == 0)
    c = choose_y(10**6, v)
    assert c.beta == math.isqrt(int(c.h)) and set(c.thresholds) == {0}


def test_pmax_mask_counts_one_only_for_all():
    S = PrimeSetSpec.residue(1, 4)
    pm = np.array([1, 2, 5, 13, 3])
    assert S.pmax_mask(pm).tolist() == [False, False, True, True, False]
    assert PrimeSetSpec.all().pmax_mask(pm).all()


@pytest.mark.parametrize("x", [2.5, 3, 10, 100, 1000, 12345.6, 10**6])
def test_li_matches_mpmath(x):
    assert logarithmic_integral(x) == pytest.approx(mp_Li(x), rel=1e-13, abs=1e-14)


def test_li_at_integers():
    li = li_at_integers(5000)
    for k in (2, 3, 17, 1000, 4999, 5000):
        assert li[k] == pytest.approx(mp_Li(k), rel=1e-12, abs=1e-14)


def test_li_domain():
    with pytest.raises(InvalidArgument):
        logarithmic_integral(1.5)


def brute_e_S(S, X):
    """sup over real y in [2, x] of |pi_S(y) - delta Li(y)|, scanning integers
    and left limits at integers."""
    delta = float(natural_density(S))
    best, out, count = 0.0, {}, 0
    for k in range(2, X + 1):
        before = count
        if is_prime(k) and S.contains_prime(k):
            count += 1
        L = delta * mp_Li(k)
        best = max(best, abs(count - L), abs(before - L) if k > 2 else 0.0)
        out[k] = best
    return out


def test_e_S_against_brute(table):
    S = PrimeSetSpec.residue(1, 4)
    grid = list(range(2, 301, 13))
    dt = build_density_error(table, S, grid)
    ref = brute_e_S(S, 300)
    for x, e in zip(dt.xs, dt.e_S):
        assert e == pytest.approx(ref[int(x)], abs=1e-9)


@given(st.integers(1, 12), st.integers(1, 12))
def test_e_S_monotone_v_S_decreasing(table, a, q):
    S = PrimeSetSpec.residue(a % q, q)
    grid = np.unique(np.geomspace(2, 10**5, 60).astype(int))
    dt = build_density_error(table, S, grid)
    assert np.all(np.diff(dt.e_S) >= 0)
    assert np.all(np.diff(dt.v_S) <= 0)
    assert np.all(dt.v_S >= dt.e_S / dt.xs - 1e-15)


def test_residue_classes_partition(table):
    q = 5
    total = sum(pi_S(table, PrimeSetSpec.residue(a, q), 10**5) for a in range(q))
    assert total == int(table.prime_count[10**5])


def test_choose_y(table):
    grid = np.unique(np.geomspace(2, 10**6, 200).astype(int))
    v = build_density_error(table, PrimeSetSpec.all(), grid)
    c = choose_y(10**6, v)
    assert 1 <= c.beta <= math.isqrt(int(c.h))
    assert c.y == pytest.approx(10**6 ** (1 / c.beta))
    for m, C in enumerate(c.thresholds[: c.beta], start=1):
        assert C < 10**6 and C == threshold_C(v, m)


def test_choose_y_preconditions(table):
    v = build_density_error(table, PrimeSetSpec.all(), [10, 100, 1000])
    with pytest.raises(PreconditionError):
        choose_y(10, v)
    with pytest.raises(PreconditionError):
        choose_y(10**5, v)


def test_density_error_sum_requires_same_grid(table):
    a = build_density_error(table, PrimeSetSpec.all(), [10, 100])
    b = build_density_error(table, PrimeSetSpec.all(), [10, 1000])
    with pytest.raises(InvalidArgument):
        a + b
    assert (a + a).v_S.tolist() == (2 * a.v_S).tolist()
