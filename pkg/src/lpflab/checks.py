"""Self-check suites run by ``lpflab check``.

``identities`` verifies exact algebraic identities and structural
invariants; ``oracles`` compares computed values with independent
enumerations and reference constants.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .decomposition import decomposition_check
from .dynamics import (DynSystem, Observable, liouville_sum, matched_block_sets, orbit_average,
                       phi_correlation, t_invariance_gap, verify_block_sets)
from .ekstats import (NormalizationSpec, TestFunction, omega_phi_prime_sum, phi_identity_check,
                      restricted_weighted_cdf)
from .friable import dickman_rho, euler_constant, psi_f, square_pmax_sum
from .primeset import PrimeSetSpec, build_density_error, logarithmic_integral, pi_S
from .sieve import (FactorTable, PrimeCountAccumulator, SumAccumulator, WeightSpec,
                    build_factor_table, profile, stream_profiles, weight_value)

SUITES = ("identities", "oracles")
SUITE_TABLE_LIMIT = 1 << 22

# rho_1(k), k = 2..10, from an independent high-precision power-series solution
RHO1_REFERENCE = {
    2: 0.30685281944005469058,
    3: 0.048608388291131566907,
    4: 0.0049109256477608323527,
    5: 0.00035472470045603973,
    6: 1.9649696353955289652e-5,
    7: 8.7456699532939167e-7,
    8: 3.2320693042261037726e-8,
    9: 1.0162482827378365e-9,
    10: 2.7701718377259589888e-11,
}
LI_REFERENCE = {10: 5.1204357246698007, 100: 29.080977803962137, 1000: 176.56449421003473}


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _trial_division(n: int) -> list[tuple[int, int]]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


# --------------------------------------------------------------------------
# identities
# --------------------------------------------------------------------------


def check_totient_divisor_sum(table: FactorTable) -> tuple[bool, str]:
    N = 10**4
    acc = np.zeros(N + 1, dtype=np.int64)
    phi = table.phi[: N + 1].astype(np.int64)
    for d in range(1, N + 1):
        acc[d::d] += phi[d]
    bad = np.flatnonzero(acc[1:] != np.arange(1, N + 1))
    return bad.size == 0, f"sum_(d|n) phi(d) = n for n <= {N}; {bad.size} failures"


def check_liouville_multiplicative(table: FactorTable, rng: np.random.Generator) -> tuple[bool, str]:
    lam = table.liouville
    m = rng.integers(1, 2000, size=10**4)
    n = rng.integers(1, 2000, size=10**4)
    ok = np.all(lam[m] * lam[n] == lam[m * n])
    return bool(ok), "lambda(m) lambda(n) = lambda(mn) on 10^4 random pairs"


def check_weight_multiplicative(table: FactorTable, rng: np.random.Generator) -> tuple[bool, str]:
    specs = [WeightSpec.d(2), WeightSpec.d(3), WeightSpec.mu_squared(), WeightSpec.alpha_pow_omega(3),
             WeightSpec.d(Fraction(1, 2))]
    done = 0
    for spec in specs:
        w = table.weights(spec)
        while done < 2000 * (specs.index(spec) + 1):
            m, n = (int(v) for v in rng.integers(1, 2000, size=2))
            if math.gcd(m, n) != 1:
                continue
            if weight_value(spec, table, m * n) != weight_value(spec, table, m) * weight_value(spec, table, n):
                return False, f"{spec.label()} fails at ({m}, {n})"
            if not math.isclose(w[m * n], w[m] * w[n], rel_tol=1e-12):
                return False, f"{spec.label()} float table fails at ({m}, {n})"
            done += 1
    return True, f"f(mn) = f(m) f(n) on {done} coprime pairs across 5 weights"


def check_phi_identity(table: FactorTable) -> tuple[bool, str]:
    bad = sum(not phi_identity_check(m, n, table) for m in range(1, 301) for n in range(1, 301))
    return bad == 0, f"phi(mn) identity for m, n <= 300; {bad} failures"


def check_decomposition(table: FactorTable) -> tuple[bool, str]:
    F = TestFunction.triangle(-2.0, 2.0)
    worst = 0.0
    for x, y in ((10**5, 10**2), (10**6, 10**3)):
        for weight in (WeightSpec.unit(), WeightSpec.d(2), WeightSpec.mu_squared()):
            for S in (PrimeSetSpec.all(), PrimeSetSpec.residue(1, 4)):
                norm = NormalizationSpec.ek(x, float(weight.alpha))
                worst = max(worst, decomposition_check(table, weight, S, F, norm, x, y).relative)
    return worst <= 1e-9, f"worst relative residual {worst:.3g} (12 configurations)"


def check_two_point_identity(table: FactorTable) -> tuple[bool, str]:
    system = DynSystem.finite_rotation(2)
    g = Observable.finite([1.0, -1.0])
    for N in (10, 999, 12345, 10**6):
        r = orbit_average(table, system, g, None, PrimeSetSpec.all(), NormalizationSpec.ek(N), N)
        if r.empirical != liouville_sum(table, N) / N:
            return False, f"orbit average differs from the Liouville mean at N = {N}"
        gap = t_invariance_gap(table, system, g, None, PrimeSetSpec.all(), NormalizationSpec.ek(N), N)
        if not math.isclose(gap, 2 * abs(r.empirical), rel_tol=1e-12, abs_tol=1e-15):
            return False, f"T-invariance gap is not twice the Liouville mean at N = {N}"
    return True, "rot2 orbit average = Liouville mean and gap = 2|mean| at 4 values of N"


def check_orbit_constant(table: FactorTable) -> tuple[bool, str]:
    for N in (10, 10**4, 10**6):
        one = orbit_average(table, DynSystem.finite_rotation(3), Observable.finite([1, 1, 1]), None,
                            PrimeSetSpec.all(), NormalizationSpec.ek(N), N)
        gap = t_invariance_gap(table, DynSystem.finite_rotation(3), Observable.finite([2, 2, 2]),
                               TestFunction.triangle(), PrimeSetSpec.residue(1, 4), NormalizationSpec.ek(N), N)
        if one.empirical != 1.0 or gap != 0.0:
            return False, f"constant observable fails at N = {N}"
    return True, "g = 1, F = 1, S = all gives exactly 1; constant g gives zero gap"


def check_density_monotone(table: FactorTable) -> tuple[bool, str]:
    grid = np.unique(np.round(np.geomspace(2, 10**6, 400)).astype(np.int64))
    for S in (PrimeSetSpec.all(), PrimeSetSpec.residue(1, 4), PrimeSetSpec.residue(2, 3)):
        dt = build_density_error(table, S, grid)
        if np.any(np.diff(dt.e_S) < 0) or np.any(np.diff(dt.v_S) > 0):
            return False, f"monotonicity fails for {S.label()}"
    return True, "e_S non-decreasing and v_S non-increasing for 3 sets on a 400-point grid"


def check_residue_partition(table: FactorTable) -> tuple[bool, str]:
    for q in (3, 4, 5, 8):
        for x in (10, 1000, 10**6):
            total = sum(pi_S(table, PrimeSetSpec.residue(a, q), x) for a in range(q) if math.gcd(a, q) == 1)
            total += sum(1 for p in range(2, q + 1) if q % p == 0 and all(p % r for r in range(2, p)) and p <= x)
            if total != pi_S(table, PrimeSetSpec.all(), x):
                return False, f"partition fails at q = {q}, x = {x}"
    return True, "reduced residue classes partition the primes (q = 3, 4, 5, 8)"


def check_cdf_monotone(table: FactorTable) -> tuple[bool, str]:
    for weight in (WeightSpec.unit(), WeightSpec.d(2)):
        for S in (PrimeSetSpec.all(), PrimeSetSpec.residue(1, 4)):
            c = restricted_weighted_cdf(table, weight, S, NormalizationSpec.ek(10**6, float(weight.alpha)), 10**6)
            if np.any(np.diff(c.mass) < 0) or c.terminal_mass > 1 + 1e-15:
                return False, f"curve not monotone for {weight.label()}, {S.label()}"
            if S.kind == "all" and c.terminal_mass != 1.0:
                return False, "terminal mass differs from 1 for S = all"
    return True, "curves non-decreasing, terminal mass <= 1 and = 1 for S = all"


def check_segmentation(table: FactorTable) -> tuple[bool, str]:
    N = 10**6
    outs = []
    for seg in (1 << 16, 1 << 18, 1 << 20):
        outs.append(tuple(stream_profiles(N, seg, SumAccumulator(a))
                          for a in ("big_omega", "small_omega", "omega1", "liouville", "phi", "mu")))
    mem = (int(table.big_omega[1: N + 1].sum(dtype=np.int64)),
           int(table.small_omega[1: N + 1].sum(dtype=np.int64)),
           int(table.omega1[1: N + 1].sum(dtype=np.int64)),
           liouville_sum(table, N),
           int(table.phi[1: N + 1].sum(dtype=np.int64)),
           int(table.mu[1: N + 1].sum(dtype=np.int64)))
    ok = all(o == mem for o in outs)
    return ok, "streamed aggregates identical for 3 segment sizes and equal to the in-memory table"


def check_omega_phi_small(table: FactorTable) -> tuple[bool, str]:
    v = omega_phi_prime_sum(table, 10, exact=True)
    return v == Fraction(1, 3) + Fraction(2, 5) + Fraction(2, 7), f"sum Omega(p-1)/p at 10 = {v}"


def check_block_sets(table: FactorTable) -> tuple[bool, str]:
    pair = matched_block_sets(table, 2.0, 1.0, range(10, 21), 1)
    ok = verify_block_sets(table, pair)
    ok &= pair.corr1 == phi_correlation(pair.B1) and pair.corr2 == phi_correlation(pair.B2)
    return ok, f"rho = 2, j = 10..20: properties verified, corr = {float(pair.corr1):.4g}, {float(pair.corr2):.4g}"


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


def check_trial_division(table: FactorTable) -> tuple[bool, str]:
    N = 10**5
    bad = 0
    for n in range(1, N + 1):
        f = _trial_division(n)
        p = profile(table, n)
        big = sum(e for _, e in f)
        phi = 1
        for q, e in f:
            phi *= (q - 1) * q ** (e - 1)
        expect = (big, len(f), sum(1 for _, e in f if e == 1), f[-1][0] if f else 1, phi,
                  (-1) ** len(f) if big == len(f) else 0, (-1) ** big)
        got = (p.big_omega, p.small_omega, p.omega1, p.pmax, p.phi, p.mu, p.liouville)
        bad += expect != got
        if f and table.spf[n] != f[0][0]:
            bad += 1
    return bad == 0, f"profiles match trial division for n <= {N}; {bad} mismatches"


def check_prime_counts(table: FactorTable) -> tuple[bool, str]:
    streamed = stream_profiles(10**6, 1 << 16, PrimeCountAccumulator())
    direct = pi_S(table, PrimeSetSpec.all(), 10**6)
    return streamed == direct == 78498, f"pi(10^6): streamed {streamed}, table {direct}"


def check_rho(table: FactorTable) -> tuple[bool, str]:
    grid = dickman_rho(1.0, u_max=10)
    worst = max(abs(grid(k) / v - 1) for k, v in RHO1_REFERENCE.items())
    first = abs(grid(2.0) - (1 - math.log(2)))
    return worst < 1e-9 and first < 1e-8, f"worst relative error {worst:.2g} at u = 2..10"


def check_friable(table: FactorTable) -> tuple[bool, str]:
    a = psi_f(table, WeightSpec.unit(), 100, 10).value
    b = psi_f(table, WeightSpec.unit(), 10, 2).value
    brute = sum(1 for n in range(1, 101) if all(p <= 10 for p, _ in _trial_division(n)))
    return a == brute == 46 and b == 4, f"Psi(100, 10) = {a:g}, Psi(10, 2) = {b:g}"


def check_euler_constants(table: FactorTable) -> tuple[bool, str]:
    c1, _ = euler_constant(WeightSpec.unit(), primes=table.primes)
    c2, _ = euler_constant(WeightSpec.d(2), primes=table.primes)
    c3, tail = euler_constant(WeightSpec.mu_squared(), primes=table.primes)
    ok = c1 == 1.0 and c2 == 1.0 and abs(c3 - 6 / math.pi**2) <= tail
    return ok, f"C(unit) = {c1}, C(d_2) = {c2}, |C(mu^2) - 6/pi^2| = {abs(c3 - 6 / math.pi**2):.2g} <= {tail:.2g}"


def check_li(table: FactorTable) -> tuple[bool, str]:
    worst = max(abs(logarithmic_integral(x) - v) for x, v in LI_REFERENCE.items())
    return worst < 1e-10 and logarithmic_integral(2) == 0.0, f"worst Li error {worst:.2g}"


def check_square_pmax(table: FactorTable) -> tuple[bool, str]:
    N = 10**4
    running, bad = 0, 0
    for n in range(2, N + 1):
        P = _trial_division(n)[-1]
        running += P[1] >= 2
        if n in (50, 100, 1000) or n % 97 == 0 or n == N:
            bad += square_pmax_sum(table, n, 0) != running
    return bad == 0 and square_pmax_sum(table, 50, 0) == 11, f"square P+ counts match enumeration; {bad} mismatches"


def check_phi_correlation(table: FactorTable) -> tuple[bool, str]:
    B = [2, 3, 4, 6, 10, 15]
    direct = sum((Fraction(math.gcd(m, n) - 1, m * n) for m in B for n in B), Fraction(0))
    direct /= sum((Fraction(1, m) for m in B), Fraction(0)) ** 2
    v = phi_correlation([2, 3])
    return v == Fraction(17, 25) and phi_correlation(B) == direct, f"Phi-correlation of {{2, 3}} = {v}"


def check_gaussian_functional(table: FactorTable) -> tuple[bool, str]:
    F = TestFunction.triangle(-1.0, 1.0)
    closed = F.gaussian_integral()
    z = np.random.default_rng(20240611).standard_normal(2_000_000)
    mc = float(np.mean(F(z)))
    se = float(np.std(F(z))) / math.sqrt(z.size)
    return abs(closed - mc) < 5 * se, f"triangle functional {closed:.6f} vs Monte Carlo {mc:.6f} (se {se:.1g})"


IDENTITY_CHECKS: dict[str, Callable] = {
    "totient divisor sum": check_totient_divisor_sum,
    "Liouville complete multiplicativity": check_liouville_multiplicative,
    "weight multiplicativity": check_weight_multiplicative,
    "totient product identity": check_phi_identity,
    "P+ decomposition identity": check_decomposition,
    "two-point rotation identity": check_two_point_identity,
    "constant observables": check_orbit_constant,
    "e_S / v_S monotonicity": check_density_monotone,
    "residue class partition": check_residue_partition,
    "curve monotonicity": check_cdf_monotone,
    "segmentation determinism": check_segmentation,
    "Omega(p-1)/p at x = 10": check_omega_phi_small,
    "matched block sets": check_block_sets,
}

ORACLE_CHECKS: dict[str, Callable] = {
    "trial-division profiles": check_trial_division,
    "prime counts": check_prime_counts,
    "Dickman reference values": check_rho,
    "friable counts": check_friable,
    "Euler constants": check_euler_constants,
    "logarithmic integral": check_li,
    "square P+ counts": check_square_pmax,
    "Phi-correlation": check_phi_correlation,
    "Gaussian functional": check_gaussian_functional,
}


def run_suite(name: str, table: FactorTable | None = None, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}")
    if table is None or table.limit < SUITE_TABLE_LIMIT:
        table = build_factor_table(SUITE_TABLE_LIMIT)
    rng = np.random.default_rng(seed)
    checks = IDENTITY_CHECKS if name == "identities" else ORACLE_CHECKS
    out = []
    for label, fn in checks.items():
        t0 = time.perf_counter()
        args = (table, rng) if fn in (check_liouville_multiplicative, check_weight_multiplicative) else (table,)
        try:
            ok, detail = fn(*args)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(label, bool(ok), detail, time.perf_counter() - t0))
    return out
