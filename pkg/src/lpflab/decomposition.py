"""Exact finite-x splitting of restricted sums by the size of P+(n).

With h(n) = f(n) F(psi(n)),

    sum_{n<=x, P+(n) in S} h(n) = S1 + S2 + Q

where S1 collects P+(n) < y with P+(n) exactly dividing n (n = 1 included),
Q collects P+(n)^2 | n, and S2 collects P+(n) = p >= y exactly dividing n.
S2 is evaluated re-indexed as n = m p with P+(m) < p:

    S2 = sum_{y<=p<=x, p in S} sum_{m<=x/p, P+(m)<p} h(m p),

using f(m p) = f(m) f(p) and stat(m p) = stat(m) + shift(p), where the shift
is 1 for Omega and omega and Omega(p - 1) for Omega(phi(.)).  The two sides
are computed along different paths, so the residual measures floating error
only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ekstats import NormalizationSpec, TestFunction
from .errors import InvalidArgument
from .primeset import PrimeSetSpec, natural_density
from .sieve import FactorTable, WeightSpec


def _stat_array(table: FactorTable, norm: NormalizationSpec, statistic: str) -> np.ndarray:
    if norm.kind == "EP":
        return table.omega_of_phi().astype(np.int64)
    return getattr(table, statistic).astype(np.int64)


def _h_values(table: FactorTable, weight: WeightSpec, F: TestFunction, norm: NormalizationSpec,
              stop: int, statistic: str) -> np.ndarray:
    """h(n) = f(n) F(psi(n)) for 0 <= n <= stop (h(0) = 0)."""
    if norm.kind == "EP" and weight.kind != "unit":
        raise InvalidArgument("the EP statistic carries no weight; use the unit weight")
    stat = _stat_array(table, norm, statistic)[: stop + 1]
    h = table.weights(weight)[: stop + 1] * np.asarray(F(norm.psi(stat)), dtype=np.float64)
    h[0] = 0.0
    return h


def _check_xy(table: FactorTable, x: int, y: int) -> None:
    if not 2 <= y < x:
        raise InvalidArgument(f"need 2 <= y < x, got x = {x}, y = {y}")
    table.check_range(x)


@dataclass(frozen=True)
class DecompositionResult:
    x: int
    y: int
    lhs: float
    s1: float
    s2: float
    square: float

    @property
    def rhs(self) -> float:
        return math.fsum((self.s1, self.s2, self.square))

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def relative(self) -> float:
        return self.residual / abs(self.lhs) if self.lhs else self.residual


def decomposition_check(table: FactorTable, weight: WeightSpec, S: PrimeSetSpec, F: TestFunction,
                        norm: NormalizationSpec, x: int, y: int,
                        statistic: str = "big_omega") -> DecompositionResult:
    _check_xy(table, x, y)
    h = _h_values(table, weight, F, norm, x, statistic)
    sl = slice(1, x + 1)
    pmax = table.pmax[sl].astype(np.int64)
    in_S = S.pmax_mask(pmax)
    square = table.pmax_exp[sl] >= 2
    hs = h[sl]
    lhs = math.fsum(hs[in_S].tolist())
    s1 = math.fsum(hs[in_S & ~square & (pmax < y)].tolist())
    q = math.fsum(hs[in_S & square].tolist())

    # S2, re-indexed over the cofactor m <= x / y
    stat = _stat_array(table, norm, statistic)
    f = table.weights(weight)
    f_p = float(weight.prime_power(1))
    primes = table.primes
    primes = primes[(primes >= y) & (primes <= x)]
    primes = primes[S.prime_mask(primes)]
    if norm.kind == "EP":
        shifts = table.big_omega[primes - 1].astype(np.int64)
    else:
        shifts = np.ones(primes.shape[0], dtype=np.int64)
    M = x // y
    m = np.arange(1, M + 1, dtype=np.int64)
    lo = np.maximum(y, table.pmax[1: M + 1].astype(np.int64) + 1)
    hi = x // m
    terms = []
    for s in np.unique(shifts):
        group = primes[shifts == s]
        count = np.searchsorted(group, hi, side="right") - np.searchsorted(group, lo, side="left")
        count = np.maximum(count, 0)
        Fv = np.asarray(F(norm.psi(stat[1: M + 1] + s)), dtype=np.float64)
        terms.append(f_p * f[1: M + 1] * Fv * count)
    s2 = math.fsum(np.concatenate(terms).tolist()) if terms else 0.0
    return DecompositionResult(x=x, y=y, lhs=lhs, s1=s1, s2=s2, square=q)


# --------------------------------------------------------------------------
# sum over primes against delta(S) times an integral
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class S2IntegralReport:
    x: int
    y: int
    delta: float
    sum_over_p: float
    delta_times_integral: float

    @property
    def difference(self) -> float:
        return self.sum_over_p - self.delta_times_integral


def _inv_log_integrals(a: np.ndarray, b: np.ndarray, rel_tol: float) -> np.ndarray:
    """int_a^b dt / log t on many intervals at once, as int e^s / s ds over
    [log a, log b] by composite Simpson with interval doubling until every
    interval has converged to ``rel_tol``."""
    la, lb = np.log(a), np.log(b)
    width = lb - la

    def simpson(k: int) -> np.ndarray:
        s = la[:, None] + width[:, None] * np.linspace(0.0, 1.0, 2 * k + 1)[None, :]
        g = np.exp(s) / s
        w = np.ones(2 * k + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return (g @ w) * width / (6 * k)

    k = 1
    prev = simpson(k)
    while True:
        k *= 2
        cur = simpson(k)
        if np.all(np.abs(cur - prev) <= rel_tol * np.abs(cur)) or k >= 1 << 12:
            return cur + (cur - prev) / 15
        prev = cur


def s2_integral_report(table: FactorTable, weight: WeightSpec, S: PrimeSetSpec, F: TestFunction,
                       norm: NormalizationSpec, x: int, y: int, statistic: str = "big_omega",
                       rel_tol: float = 1e-10) -> S2IntegralReport:
    """sum_{y<=p<=x, p in S} Psi_h(x/p, p) against delta(S) int_y^x Psi_h(x/t, t) dt / log t.

    Psi_h(z, t) sums h(n) over n <= z with P+(n) <= t.  As a function of t
    it is constant between consecutive points of {primes} and {x/k}; the
    integral is taken piece by piece, with Psi_h evaluated exactly on each
    piece and dt/log t integrated by Simpson's rule in s = log t.
    """
    if not 2 <= y <= x:
        raise InvalidArgument(f"need 2 <= y <= x, got x = {x}, y = {y}")
    table.check_range(x)
    delta = float(natural_density(S))
    if y == x:
        return S2IntegralReport(x, y, delta, 0.0, 0.0)
    M = x // y
    h = _h_values(table, weight, F, norm, M, statistic)[1: M + 1]
    n = np.arange(1, M + 1, dtype=np.int64)
    start = np.maximum(table.pmax[1: M + 1].astype(np.int64), y)
    stop = x // n

    # exact sum over primes: n counts for p in S with max(P+(n), y) <= p <= x/n
    primes = table.primes
    primes = primes[(primes >= y) & (primes <= x)]
    primes = primes[S.prime_mask(primes)]
    cnt = np.searchsorted(primes, stop, side="right") - np.searchsorted(primes, start, side="left")
    sum_over_p = math.fsum((h * np.maximum(cnt, 0)).tolist())

    # piecewise-constant integrand
    all_primes = table.primes
    all_primes = all_primes[(all_primes > y) & (all_primes < x)].astype(np.float64)
    k = np.arange(1, M + 1, dtype=np.float64)
    quotients = x / k
    quotients = quotients[(quotients > y) & (quotients < x)]
    edges = np.unique(np.concatenate(([float(y), float(x)], all_primes, quotients)))
    mid = 0.5 * (edges[:-1] + edges[1:])
    # n contributes on the pieces whose midpoint lies in [start(n), x/n]
    first = np.searchsorted(mid, start.astype(np.float64), side="left")
    last = np.searchsorted(mid, x / n.astype(np.float64), side="right")
    diff = np.zeros(mid.shape[0] + 1)
    ok = last > first
    np.add.at(diff, first[ok], h[ok])
    np.add.at(diff, last[ok], -h[ok])
    psi_h = np.cumsum(diff[:-1])
    pieces = _inv_log_integrals(edges[:-1], edges[1:], rel_tol)
    integral = math.fsum((psi_h * pieces).tolist())
    return S2IntegralReport(x, y, delta, sum_over_p, delta * integral)

