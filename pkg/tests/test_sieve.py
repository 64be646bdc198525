import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpflab.errors import InvalidArgument, ResourceError
from lpflab.sieve import (FactorTable, PrimeCountAccumulator, SumAccumulator, WeightSpec,
                          build_factor_table, iter_segments, profile, stream_profiles, weight_value)

from conftest import SMALL_LIMIT, brute_phi, trial_factor

ints = st.integers(min_value=1, max_value=1000)


def test_profiles_match_trial_division(table):
    for n in range(1, 20001):
        f = trial_factor(n)
        p = profile(table, n)
        assert p.big_omega == sum(e for _, e in f)
        assert p.small_omega == len(f)
        assert p.pmax == (f[-1][0] if f else 1)
        assert p.mu == (0 if any(e > 1 for _, e in f) else (-1) ** len(f))
        assert p.liouville == (-1) ** p.big_omega


def test_worked_profiles(table):
    p = profile(table, 1)
    assert (p.big_omega, p.small_omega, p.pmax, p.phi, p.mu, p.liouville) == (0, 0, 1, 1, 1, 1)
    p = profile(table, 360)
    assert (p.big_omega, p.small_omega, p.omega1, p.pmax, p.phi) == (6, 3, 1, 5, 96)


def test_phi_against_gcd_count(table):
    for n in range(1, 600):
        assert int(table.phi[n]) == brute_phi(n)


def test_prime_count_small(table):
    assert int(table.prime_count[100]) == 25
    assert int(table.prime_count[10**6]) == 78498
    assert table.primes[:6].tolist() == [2, 3, 5, 7, 11, 13]


def test_pmax_exponent(table):
    for n in (12, 18, 50, 98, 1024, 3 * 49):
        f = trial_factor(n)
        assert int(table.pmax_exp[n]) == f[-1][1]


@given(ints, ints)
def test_liouville_completely_multiplicative(table, m, n):
    assert table.liouville[m * n] == table.liouville[m] * table.liouville[n]


@given(ints, ints)
def test_omega_additive(table, m, n):
    assert table.big_omega[m * n] == table.big_omega[m] + table.big_omega[n]


@given(ints, ints, st.sampled_from([WeightSpec.unit(), WeightSpec.mu_squared(), WeightSpec.d(2),
                                    WeightSpec.d(0.5), WeightSpec.alpha_pow_omega(3)]))
def test_weights_multiplicative(table, m, n, spec):
    if math.gcd(m, n) != 1:
        return
    w = table.weights(spec)
    assert w[m * n] == pytest.approx(w[m] * w[n], rel=1e-12)


def test_divisor_weight_counts_divisors(table):
    w = table.weights(WeightSpec.d(2))
    for n in range(1, 500):
        assert w[n] == sum(1 for d in range(1, n + 1) if n % d == 0)


def test_d_alpha_prime_power_is_binomial():
    spec = WeightSpec.d(0.5)
    for v in range(6):
        expect = math.gamma(0.5 + v) / (math.gamma(0.5) * math.factorial(v))
        assert float(spec.prime_power(v)) == pytest.approx(expect, rel=1e-13)


def test_weight_value_exact_integer(table):
    n = 360  # 2^3 3^2 5
    assert weight_value(WeightSpec.d(3), table, n) == math.comb(5, 2) * math.comb(4, 2) * 3


def test_weight_cache_is_read_only(table):
    w = table.weights(WeightSpec.unit())
    with pytest.raises(ValueError):
        w[1] = 2.0


def test_streaming_matches_table(table):
    N = 300_000
    for seg in (1 << 16, 1 << 17, 100_000):
        acc = SumAccumulator("liouville")
        stream_profiles(N, seg, acc)
        assert acc.result() == int(table.liouville[1: N + 1].sum())
        pc = PrimeCountAccumulator()
        stream_profiles(N, seg, pc)
        assert pc.result() == int(table.prime_count[N])


def test_segments_cover_range():
    starts = [b.start for b in iter_segments(200_000, 1 << 16)]
    lens = [len(b) for b in iter_segments(200_000, 1 << 16)]
    assert starts[0] == 1 and sum(lens) == 200_000


def test_dump_load_roundtrip(tmp_path):
    t = build_factor_table(5000)
    path = tmp_path / "spf.npz"
    t.dump(path)
    u = FactorTable.load(path)
    assert u.limit == t.limit
    assert np.array_equal(u.big_omega, t.big_omega)


def test_invalid_limits():
    with pytest.raises(InvalidArgument):
        build_factor_table(1)
    with pytest.raises(ResourceError):
        build_factor_table(10**9)


def test_check_range(table):
    with pytest.raises(InvalidArgument):
        table.check_range(SMALL_LIMIT + 1)
