"""Worked examples that need the 10^7 table, plus three stated bands that
the exact computation shows do not hold at these N (strict xfail, with the
measured values in the reason)."""

import math

import numpy as np
import pytest

from lpflab.decomposition import decomposition_check, s2_integral_report
from lpflab.dynamics import (BoundedSequence, DynSystem, Observable, br_inequality_report, orbit_average,
                             perturbation_gap, phi_correlation, t_invariance_gap)
from lpflab.ekstats import (NormalizationSpec, TestFunction, ks_distance, omega_phi_center,
                            omega_phi_prime_sum, restricted_weighted_cdf)
from lpflab.friable import dickman_rho, ivic_main_term, square_pmax_sum, tw_ratio
from lpflab.primeset import PrimeSetSpec, build_density_error, choose_y
from lpflab.sieve import WeightSpec

from conftest import BIG_LIMIT

S14 = PrimeSetSpec.residue(1, 4)


def test_unit_weight_ks_decreases(big):
    d = [ks_distance(restricted_weighted_cdf(big, WeightSpec.unit(), PrimeSetSpec.all(), NormalizationSpec.ek(N), N))
         for N in (10**4, BIG_LIMIT)]
    assert d[1] < d[0]


def test_terminal_mass_residue(big):
    c = restricted_weighted_cdf(big, WeightSpec.unit(), S14, NormalizationSpec.ek(10**6), 10**6)
    assert abs(c.terminal_mass - 0.5) <= 0.05


def test_rot3_equidistribution(big):
    r = orbit_average(big, DynSystem.finite_rotation(3), Observable.finite([1, 0, 0]), None,
                      PrimeSetSpec.all(), NormalizationSpec.ek(10**6), 10**6)
    assert abs(r.empirical - 1 / 3) <= 0.05 and r.target == pytest.approx(1 / 3)


def test_rot3_invariance_gap_trend(big):
    gap = [t_invariance_gap(big, DynSystem.finite_rotation(3), Observable.finite([1, 0, 0]), None, S14,
                            NormalizationSpec.ek(N), N) for N in (10**4, 10**6)]
    assert gap[1] < 0.1 and gap[1] < gap[0]


def test_mu_squared_tw_ratio(big):
    r = tw_ratio(big, WeightSpec.mu_squared(), dickman_rho(1.0, u_max=3), 10**6, 10**3)
    assert 0.7 <= r <= 1.3


def test_square_pmax_decreasing_in_r(big):
    vals = [square_pmax_sum(big, 10**6, r) for r in (0, 0.5, 1, 2, 3)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    mains = [ivic_main_term(10**6, r) for r in (0, 0.5, 1, 2, 3)]
    assert all(b < a for a, b in zip(mains, mains[1:]))


def test_choose_y_residue(big):
    grid = np.unique(np.geomspace(2, 10**6, 300).astype(int))
    v = build_density_error(big, S14, grid) + build_density_error(big, PrimeSetSpec.all(), grid)
    c = choose_y(10**6, v)
    u = math.log(10**6) / math.log(c.y)
    assert u == pytest.approx(c.beta) and u <= c.h


def test_br_report_large_primes(big):
    B = [int(p) for p in big.primes[big.primes > 990][:20]]
    r = br_inequality_report(big, B, BoundedSequence("liouville"), 10**6)
    assert r.lhs < r.rhs
    H = sum(1 / p for p in B)
    assert float(phi_correlation(B)) == pytest.approx(sum((p - 1) / p**2 for p in B) / H**2, rel=1e-12)


def test_decomposition_example(big):
    F = TestFunction.triangle(-1, 1)
    r = decomposition_check(big, WeightSpec.d(2), S14, F, NormalizationSpec.ek(10**5, 2), 10**5, 100)
    assert r.relative < 1e-9
    one = decomposition_check(big, WeightSpec.unit(), PrimeSetSpec.all(), TestFunction.one(),
                              NormalizationSpec.ek(10**3), 10**3, 31)
    assert one.lhs == 1000
    rep = s2_integral_report(big, WeightSpec.unit(), S14, F, NormalizationSpec.ek(10**5), 10**5, 100)
    assert abs(rep.difference) < 0.2 * rep.sum_over_p


@pytest.mark.xfail(strict=True, reason="curve(0) at N = 10^6 is exactly 0.2885 (the share of n with "
                                       "Omega(n) <= 2), 0.21 from 1/2")
def test_curve_at_zero_band(big):
    c = restricted_weighted_cdf(big, WeightSpec.unit(), PrimeSetSpec.all(), NormalizationSpec.ek(10**6), 10**6)
    assert c(0.0) == pytest.approx(0.288534, abs=1e-6)
    assert abs(c(0.0) - 0.5) <= 0.2


@pytest.mark.xfail(strict=True, reason="at x = 10^7 the ratio to (loglog x)^2/2 is 2.18; the "
                                       "O(loglog x) secondary term is still larger than the main one")
def test_omega_phi_ratio_band(big):
    ratio = omega_phi_prime_sum(big, BIG_LIMIT) / omega_phi_center(BIG_LIMIT)
    assert 2.1 < ratio < 2.3
    assert 0.5 <= ratio <= 2.0


@pytest.mark.xfail(strict=True, reason="gap grows 0.030 -> 0.054 from N = 10^4 to 10^6: psi(2n) - psi(n) "
                                       "= 1/sqrt(loglog N) is still about 0.4")
def test_perturbation_gap_trend(big):
    a = BoundedSequence("liouville")
    gaps = [perturbation_gap(big, 2, S14, TestFunction.triangle(), a, N) for N in (10**4, 10**6)]
    assert gaps[1] < gaps[0]
