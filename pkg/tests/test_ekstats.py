import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpflab.ekstats import (CurveAccumulator, NormalizationSpec, TestFunction, gaussian_cdf,
                            ks_distance, omega_phi_center, omega_phi_prime_sum, phi_identity_check,
                            restricted_weighted_cdf, smooth_functional)
from lpflab.errors import InvalidArgument
from lpflab.primeset import PrimeSetSpec
from lpflab.sieve import WeightSpec, stream_profiles

from conftest import is_prime, trial_factor

mpmath.mp.dps = 30


def mp_gauss_mean(F: TestFunction):
    k = [x for x, _ in F.knots]
    f = lambda t: F(float(t)) * mpmath.npdf(t)
    inner = float(mpmath.quad(f, k))
    lo, hi = F.knots[0][1], F.knots[-1][1]
    return inner + lo * float(mpmath.ncdf(k[0])) + hi * float(1 - mpmath.ncdf(k[-1]))


def test_normalizations():
    ek = NormalizationSpec.ek(10**6, 2)
    L = math.log(math.log(10**6))
    assert ek.psi(5) == pytest.approx((5 - 2 * L) / math.sqrt(2 * L))
    ep = NormalizationSpec.ep(10**6)
    assert ep.psi(5) == pytest.approx((5 - L * L / 2) / (L**1.5 / math.sqrt(3)))
    with pytest.raises(InvalidArgument):
        NormalizationSpec.ek(2)


def test_triangle_gaussian_integral():
    F = TestFunction.triangle(-1, 1)
    assert F.gaussian_integral() == pytest.approx(0.3687463803725072, abs=1e-15)
    assert F.gaussian_integral() == pytest.approx(mp_gauss_mean(F), abs=1e-14)


@given(st.lists(st.floats(-4, 4), min_size=2, max_size=6, unique=True),
       st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_gaussian_integral_piecewise_linear(xs, ys):
    xs = sorted(xs)
    if min(np.diff(xs)) < 1e-3:
        return
    ys = [0.0] + ys[: len(xs) - 2] + [0.0]
    F = TestFunction(tuple(zip(xs, ys)))
    assert F.gaussian_integral() == pytest.approx(mp_gauss_mean(F), abs=1e-12)


def test_constant_functions():
    assert TestFunction.one().gaussian_integral() == 1.0
    assert TestFunction.zero().gaussian_integral() == 0.0
    with pytest.raises(InvalidArgument):
        TestFunction(((1.0, 0.0), (0.0, 0.0)))
    with pytest.raises(InvalidArgument):
        TestFunction(((0.0, 0.0), (1.0, 1.0)))


def test_gaussian_cdf():
    for t in (-6, -1.3, 0, 0.7, 5):
        assert float(gaussian_cdf(t)) == pytest.approx(float(mpmath.ncdf(t)), rel=1e-14)


def brute_curve(S, weight_fn, N):
    """Weighted masses of {Omega(n) = k, P+(n) in S} by trial division."""
    masses, total = {}, 0.0
    for n in range(1, N + 1):
        f = trial_factor(n)
        w = weight_fn(f)
        total += w
        p = f[-1][0] if f else 1
        if S.kind == "all" or (p > 1 and S.contains_prime(p)):
            k = sum(e for _, e in f)
            masses[k] = masses.get(k, 0.0) + w
    return masses, total


@pytest.mark.parametrize("S", [PrimeSetSpec.all(), PrimeSetSpec.residue(1, 4), PrimeSetSpec.explicit([3, 7])])
def test_curve_against_brute(table, S):
    N = 5000
    spec = WeightSpec.d(2)
    norm = NormalizationSpec.ek(N, 2)
    curve = restricted_weighted_cdf(table, spec, S, norm, N)
    masses, total = brute_curve(S, lambda f: math.prod(e + 1 for _, e in f), N)
    assert curve.total == total
    assert curve.stat.tolist() == sorted(masses)
    assert curve.weight.tolist() == [masses[k] for k in sorted(masses)]
    # KS over the real line by brute scan of left and right values
    running, best = 0.0, 0.0
    for k in sorted(masses):
        t = norm.psi(k)
        target = curve.delta * float(mpmath.ncdf(t))
        best = max(best, abs(running / total - target))
        running += masses[k]
        best = max(best, abs(running / total - target))
    best = max(best, abs(running / total - curve.delta))
    assert ks_distance(curve, include_left_limits=True) == pytest.approx(best, abs=1e-14)
    assert ks_distance(curve) <= ks_distance(curve, include_left_limits=True)


@given(st.integers(10, 30000), st.integers(1, 8), st.integers(1, 8),
       st.sampled_from([WeightSpec.unit(), WeightSpec.mu_squared(), WeightSpec.d(0.5)]))
def test_curve_monotone(table, N, a, q, spec):
    S = PrimeSetSpec.residue(a % q, q)
    curve = restricted_weighted_cdf(table, spec, S, NormalizationSpec.ek(N, float(spec.alpha)), N)
    assert np.all(np.diff(curve.mass) >= -1e-15)
    assert curve.terminal_mass <= 1 + 1e-12
    assert np.all(np.diff(curve.t) > 0)


def test_curve_all_terminal_mass_is_one(table):
    c = restricted_weighted_cdf(table, WeightSpec.d(2), PrimeSetSpec.all(), NormalizationSpec.ek(10**5, 2), 10**5)
    assert c.terminal_mass == pytest.approx(1.0, abs=1e-15)


def test_curve_accumulator_matches_table(table):
    N = 200_000
    spec = WeightSpec.mu_squared()
    S = PrimeSetSpec.residue(1, 4)
    norm = NormalizationSpec.ek(N)
    direct = restricted_weighted_cdf(table, spec, S, norm, N)
    for seg in (1 << 16, 77_777):
        acc = CurveAccumulator(spec, S, norm)
        stream_profiles(N, seg, acc)
        c = acc.result()
        assert c.stat.tolist() == direct.stat.tolist()
        np.testing.assert_allclose(c.weight, direct.weight, rtol=0, atol=0)
        assert c.total == direct.total


def test_ep_curve(table):
    N = 10**5
    c = restricted_weighted_cdf(table, WeightSpec.unit(), PrimeSetSpec.all(), NormalizationSpec.ep(N), N)
    phi = table.phi[1: N + 1]
    omega = table.big_omega[phi]
    assert c.stat.tolist() == np.unique(omega).tolist()
    with pytest.raises(InvalidArgument):
        restricted_weighted_cdf(table, WeightSpec.d(2), PrimeSetSpec.all(), NormalizationSpec.ep(N), N)


def test_smooth_functional(table):
    N = 10**4
    norm = NormalizationSpec.ek(N)
    S = PrimeSetSpec.residue(1, 4)
    curve = restricted_weighted_cdf(table, WeightSpec.unit(), S, norm, N)
    F = TestFunction.triangle(-1, 1)
    r = smooth_functional(curve, F)
    ref = sum(F(norm.psi(int(table.big_omega[n]))) for n in range(2, N + 1)
              if int(table.pmax[n]) % 4 == 1) / N
    assert r.empirical == pytest.approx(ref, rel=1e-12)
    assert r.target == pytest.approx(0.5 * 0.3687463803725072)
    one = smooth_functional(curve, TestFunction.one())
    assert one.empirical == pytest.approx(curve.terminal_mass)


def test_ks_distance_delta_override(table):
    c = restricted_weighted_cdf(table, WeightSpec.unit(), PrimeSetSpec.all(), NormalizationSpec.ek(10**4), 10**4)
    with pytest.raises(InvalidArgument):
        ks_distance(c, delta=1.5)


def test_phi_identity_exhaustive_small(table):
    assert all(phi_identity_check(m, n, table) for m in range(1, 120) for n in range(1, 120))


def test_omega_phi_prime_sum(table):
    assert omega_phi_prime_sum(table, 10, exact=True) == Fraction(1, 3) + Fraction(2, 5) + Fraction(2, 7)
    ref = math.fsum(sum(e for _, e in trial_factor(p - 1)) / p for p in range(3, 5001) if is_prime(p))
    assert omega_phi_prime_sum(table, 5000) == pytest.approx(ref, rel=1e-14)
    assert omega_phi_center(10**6) == pytest.approx(0.5 * math.log(math.log(10**6)) ** 2)
