"""Rotation systems and averages of observables along n -> T^Omega(n) x0.

Every orbit sum here depends on n only through Omega(n) (and psi(n)), so the
observable is evaluated once per attained value of Omega and the sums reduce
to weighted counts.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ekstats import NormalizationSpec, TestFunction
from .errors import ConstructionFailure, InvalidArgument
from .primeset import PrimeSetSpec, natural_density
from .sieve import DEFAULT_SEGMENT, FactorTable, SumAccumulator, stream_profiles

GOLDEN_MIN_DENOMINATOR = 10**12


# --------------------------------------------------------------------------
# systems and observables
# --------------------------------------------------------------------------


def golden_convergent(min_denominator: int = GOLDEN_MIN_DENOMINATOR) -> Fraction:
    """F_k / F_{k+1} for the first Fibonacci denominator above ``min_denominator``;
    these converge to (sqrt 5 - 1)/2."""
    a, b = 1, 1
    while b <= min_denominator:
        a, b = b, a + b
    return Fraction(a, b)


@dataclass(frozen=True)
class DynSystem:
    """x -> x + 1 mod m on Z/m, or x -> x + theta mod 1 on the circle.

    ``theta`` is a rational stand-in for an irrational angle; the orbit is a
    faithful proxy for orbits much shorter than its denominator.  Orbit
    points T^k x0 are computed as x0 + k theta in exact arithmetic.
    """

    kind: str
    m: int = 1
    x0: int | Fraction = 0
    theta: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind == "finite":
            if self.m < 1:
                raise InvalidArgument("modulus m must be >= 1")
            object.__setattr__(self, "x0", int(self.x0) % self.m)
        elif self.kind == "circle":
            theta = Fraction(self.theta)
            x0 = Fraction(self.x0)
            if not 0 <= x0 < 1:
                raise InvalidArgument("x0 must lie in [0, 1)")
            object.__setattr__(self, "theta", theta)
            object.__setattr__(self, "x0", x0)
        else:
            raise InvalidArgument(f"unknown system kind {self.kind!r}")

    @classmethod
    def finite_rotation(cls, m: int, x0: int = 0) -> "DynSystem":
        return cls("finite", m=m, x0=x0)

    @classmethod
    def circle_rotation(cls, theta: Fraction | None = None, x0: Fraction | float = 0) -> "DynSystem":
        return cls("circle", theta=golden_convergent() if theta is None else Fraction(theta),
                   x0=Fraction(x0))

    def orbit_point(self, k: int):
        if self.kind == "finite":
            return (self.x0 + k) % self.m
        z = self.x0 + k * self.theta
        return z - math.floor(z)

    def label(self) -> str:
        if self.kind == "finite":
            return f"rot{self.m}@{self.x0}"
        return f"circle({float(self.theta):.12g})@{float(self.x0):g}"


@dataclass(frozen=True)
class Observable:
    """g on a finite rotation (a vector of m values) or on the circle (a real
    trigonometric polynomial sum_j a_j e^(2 pi i j x) with a_{-j} = conj(a_j))."""

    values: tuple[float, ...] = ()
    fourier: tuple[tuple[int, complex], ...] = ()

    def __post_init__(self):
        if bool(self.values) == bool(self.fourier):
            raise InvalidArgument("give either finite values or Fourier coefficients")
        if self.values:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        else:
            coef = {int(j): complex(a) for j, a in self.fourier}
            for j, a in coef.items():
                b = coef.get(-j, 0j)
                if abs(a - b.conjugate()) > 1e-15 * max(1.0, abs(a)):
                    raise InvalidArgument("coefficients must satisfy a_{-j} = conj(a_j)")
            object.__setattr__(self, "fourier", tuple(sorted(coef.items())))

    @classmethod
    def finite(cls, values: Sequence[float]) -> "Observable":
        return cls(values=tuple(values))

    @classmethod
    def trig(cls, coefficients: Mapping[int, complex]) -> "Observable":
        return cls(fourier=tuple(coefficients.items()))

    @classmethod
    def cosine(cls, j: int = 1, amplitude: float = 1.0, mean: float = 0.0) -> "Observable":
        """mean + amplitude cos(2 pi j x)."""
        coef = {0: mean, j: amplitude / 2, -j: amplitude / 2} if j else {0: mean + amplitude}
        return cls.trig(coef)

    @property
    def is_finite(self) -> bool:
        return bool(self.values)

    def mean(self) -> float:
        """int g dmu: the average of the values, or the constant coefficient."""
        if self.is_finite:
            return math.fsum(self.values) / len(self.values)
        return dict(self.fourier).get(0, 0j).real

    def sup_norm_bound(self) -> float:
        if self.is_finite:
            return max(abs(v) for v in self.values)
        return sum(abs(a) for _, a in self.fourier)

    def __call__(self, point) -> float:
        if self.is_finite:
            return self.values[int(point)]
        z = float(point)
        return sum((a * np.exp(2j * math.pi * j * z)) for j, a in self.fourier).real

    def check_system(self, system: DynSystem) -> None:
        if system.kind == "finite" and (not self.is_finite or len(self.values) != system.m):
            raise InvalidArgument(f"observable must have {system.m} values on rot{system.m}")
        if system.kind == "circle" and self.is_finite:
            raise InvalidArgument("circle observables are given by Fourier coefficients")

    def label(self) -> str:
        if self.is_finite:
            return "(" + ",".join(f"{v:g}" for v in self.values) + ")"
        return "trig"


def orbit_values(system: DynSystem, g: Observable, k_max: int) -> np.ndarray:
    """g(T^k x0) for k = 0..k_max."""
    g.check_system(system)
    return np.array([g(system.orbit_point(k)) for k in range(k_max + 1)])


# --------------------------------------------------------------------------
# averages
# --------------------------------------------------------------------------


def cesaro_average(values: Sequence[float]) -> float:
    values = list(values)
    if not values:
        raise InvalidArgument("average over an empty set")
    return math.fsum(values) / len(values)


def log_average(B: Sequence[int], values: Sequence[float]) -> float:
    """(sum a(n)/n) / (sum 1/n) over n in B; ``values[i]`` is a(B[i])."""
    B = list(B)
    values = list(values)
    if not B:
        raise InvalidArgument("average over an empty set")
    if len(B) != len(values):
        raise InvalidArgument("B and values differ in length")
    return math.fsum(a / n for a, n in zip(values, B)) / math.fsum(1.0 / n for n in B)


def _joint_counts(table: FactorTable, S: PrimeSetSpec, norm: NormalizationSpec, N: int,
                  lo: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Restricted counts of n in [lo, N] by (statistic, Omega).  Returns the
    attained statistic values, Omega values and their counts."""
    sl = slice(lo, N + 1)
    mask = S.pmax_mask(table.pmax[sl])
    omega = table.big_omega[sl].astype(np.int64)
    stat = table.omega_of_phi()[sl].astype(np.int64) if norm.kind == "EP" else omega
    width = int(omega.max()) + 1 if omega.size else 1
    key = stat[mask] * width + omega[mask]
    counts = np.bincount(key)
    nz = np.flatnonzero(counts)
    return nz // width, nz % width, counts[nz]


def _check_orbit_args(table: FactorTable, N: int, F: TestFunction | None) -> TestFunction:
    if not N > math.e:
        raise InvalidArgument(f"N must exceed e, got {N}")
    table.check_range(N)
    return TestFunction.one() if F is None else F


@dataclass(frozen=True)
class OrbitResult:
    N: int
    set: str
    weightF: str
    system: str
    empirical: float
    target: float

    @property
    def abs_err(self) -> float:
        return abs(self.empirical - self.target)

    def row(self) -> list:
        return [self.N, self.set, self.weightF, self.system, repr(self.empirical),
                repr(self.target), repr(self.abs_err)]


ORBIT_HEADER = ["N", "set", "weightF", "system", "empirical", "target", "abs_err"]


def write_orbit_csv(path: str | Path, rows: Iterable[OrbitResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ORBIT_HEADER)
        for r in rows:
            w.writerow(r.row())


def orbit_target(system: DynSystem, g: Observable, F: TestFunction, S: PrimeSetSpec) -> float:
    """delta(S) * int F dPhi * int g dmu."""
    return float(natural_density(S)) * F.gaussian_integral() * g.mean()


def orbit_average(table: FactorTable, system: DynSystem, g: Observable, F: TestFunction | None,
                  S: PrimeSetSpec, norm: NormalizationSpec, N: int) -> OrbitResult:
    """(1/N) sum over n <= N with P+(n) in S of F(psi(n)) g(T^Omega(n) x0)."""
    F = _check_orbit_args(table, N, F)
    stat, omega, counts = _joint_counts(table, S, norm, N)
    gk = orbit_values(system, g, int(omega.max()) if omega.size else 0)
    terms = np.asarray(F(norm.psi(stat)), dtype=np.float64) * gk[omega] * counts
    return OrbitResult(N=N, set=S.label(), weightF=F.label(), system=system.label(),
                       empirical=math.fsum(terms.tolist()) / N,
                       target=orbit_target(system, g, F, S))


def t_invariance_gap(table: FactorTable, system: DynSystem, g: Observable, F: TestFunction | None,
                     S: PrimeSetSpec, norm: NormalizationSpec, N: int) -> float:
    """|int g o T dmu_N - int g dmu_N| for the measure mu_N of the orbit average."""
    F = _check_orbit_args(table, N, F)
    stat, omega, counts = _joint_counts(table, S, norm, N)
    gk = orbit_values(system, g, int(omega.max()) + 1 if omega.size else 1)
    terms = np.asarray(F(norm.psi(stat)), dtype=np.float64) * (gk[omega + 1] - gk[omega]) * counts
    return abs(math.fsum(terms.tolist())) / N


def liouville_sum(table: FactorTable | None, N: int, segment: int = DEFAULT_SEGMENT) -> int:
    """sum of lambda(n) for n <= N, from the table or by streaming."""
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if table is not None and N <= table.limit:
        odd = int(np.count_nonzero(table.big_omega[1: N + 1] & 1))
        return N - 2 * odd
    acc = SumAccumulator("liouville")
    return stream_profiles(N, segment, acc)


def liouville_mean(table: FactorTable | None, N: int, segment: int = DEFAULT_SEGMENT) -> float:
    return liouville_sum(table, N, segment) / N


# --------------------------------------------------------------------------
# Phi-correlations and matched block sets
# --------------------------------------------------------------------------


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _totient(n: int) -> int:
    out, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            out -= out // p
        p += 1
    if m > 1:
        out -= out // m
    return out


def phi_correlation(B: Iterable[int]) -> Fraction:
    """E^log_{m in B} E^log_{n in B} (gcd(m, n) - 1), exactly.

    Uses gcd(m, n) = sum over d | m, n of phi(d), so the double sum becomes
    sum_d phi(d) (sum_{m in B, d | m} 1/m)^2.
    """
    B = sorted(set(int(b) for b in B))
    if not B:
        raise InvalidArgument("B must be non-empty")
    if B[0] < 1:
        raise InvalidArgument("B must consist of positive integers")
    harmonic = sum((Fraction(1, m) for m in B), Fraction(0))
    by_divisor: dict[int, Fraction] = {}
    for m in B:
        r = Fraction(1, m)
        for d in _divisors(m):
            by_divisor[d] = by_divisor.get(d, Fraction(0)) + r
    gcd_sum = sum((_totient(d) * s * s for d, s in by_divisor.items()), Fraction(0))
    return (gcd_sum - harmonic * harmonic) / (harmonic * harmonic)


@dataclass
class BlockSetPair:
    rho: float
    eps: float
    blocks: list[dict]
    corr1: Fraction
    corr2: Fraction

    @property
    def B1(self) -> list[int]:
        return [n for b in self.blocks for n in b["B1"]]

    @property
    def B2(self) -> list[int]:
        return [n for b in self.blocks for n in b["B2"]]

    @property
    def satisfies_correlation_bound(self) -> bool:
        return self.corr1 <= Fraction(self.eps) and self.corr2 <= Fraction(self.eps)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps({"rho": self.rho, "eps": self.eps, "blocks": self.blocks,
                           "corr1": float(self.corr1), "corr2": float(self.corr2)}, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def block_bounds(rho: float, j: int) -> tuple[int, int]:
    """Integers in [rho^j, rho^(j+1)) as a half-open range [lo, hi)."""
    if float(rho).is_integer():
        r = int(rho)
        return r**j, r ** (j + 1)
    return math.ceil(rho**j), math.ceil(rho ** (j + 1))


def verify_block_sets(table: FactorTable, pair: BlockSetPair) -> bool:
    """Check (i) Omega = 1 on B1 and Omega = 2 on B2, (ii) equal counts per
    block, and that both lie in their blocks."""
    omega = table.big_omega
    for b in pair.blocks:
        lo, hi = block_bounds(pair.rho, b["j"])
        if len(b["B1"]) != len(b["B2"]):
            return False
        for n in b["B1"] + b["B2"]:
            if not lo <= n < hi:
                return False
        if any(omega[n] != 1 for n in b["B1"]) or any(omega[n] != 2 for n in b["B2"]):
            return False
    return True


def matched_block_sets(table: FactorTable, rho: float, eps: float, j_range: Iterable[int],
                       per_block: int, strict: bool = False, coprime: bool = False) -> BlockSetPair:
    """Greedy smallest-first primes and Omega = 2 numbers, matched block by block.

    In each block [rho^j, rho^(j+1)) up to ``per_block`` of each are taken
    and both lists are trimmed to the same length.  ``coprime`` skips
    candidates sharing a factor with one already chosen (lowering the
    off-diagonal gcd terms).  The pair is returned with its two
    correlations; with ``strict`` a pair whose correlations exceed ``eps``
    raises :class:`ConstructionFailure` carrying it.
    """
    if not 0 < eps <= 1:
        raise InvalidArgument("eps must lie in (0, 1]")
    if not 1 < rho <= 1 + eps:
        raise InvalidArgument("rho must lie in (1, 1 + eps]")
    if per_block < 1:
        raise InvalidArgument("per_block must be >= 1")
    js = sorted(set(int(j) for j in j_range))
    if not js or js[0] < 0:
        raise InvalidArgument("j_range must be a non-empty set of non-negative integers")
    omega = table.big_omega
    blocks = []
    used_primes: set[int] = set()
    for j in js:
        lo, hi = block_bounds(rho, j)
        if hi - 1 > table.limit:
            raise InvalidArgument(f"block j = {j} reaches {hi - 1} > table limit {table.limit}")
        seg = omega[lo:hi]
        ones = (np.flatnonzero(seg == 1) + lo).tolist()
        twos = (np.flatnonzero(seg == 2) + lo).tolist()
        b1 = ones[:per_block]
        b2: list[int] = []
        for n in twos:
            if len(b2) == per_block:
                break
            if coprime:
                p = int(table.spf[n])
                q = n // p
                if p in used_primes or q in used_primes or p == q:
                    continue
                used_primes.update((p, q))
            b2.append(n)
        k = min(len(b1), len(b2))
        blocks.append({"j": j, "B1": b1[:k], "B2": b2[:k]})
    B1 = [n for b in blocks for n in b["B1"]]
    B2 = [n for b in blocks for n in b["B2"]]
    if not B1:
        raise ConstructionFailure("no block contains both a prime and an Omega = 2 number")
    pair = BlockSetPair(rho=float(rho), eps=float(eps), blocks=blocks,
                        corr1=phi_correlation(B1), corr2=phi_correlation(B2))
    if strict and not pair.satisfies_correlation_bound:
        raise ConstructionFailure(
            f"correlations {float(pair.corr1):.4g}, {float(pair.corr2):.4g} exceed eps = {eps}",
            best=pair)
    return pair


# --------------------------------------------------------------------------
# bounded sequences and finite-N reports
# --------------------------------------------------------------------------


SEQUENCE_KINDS = ("one", "liouville", "indicator_liouville", "orbit")


@dataclass(frozen=True)
class BoundedSequence:
    """A sequence a(n) with |a| <= 1 from a closed family:

    ``one``                  a = 1
    ``liouville``            a = lambda(n)
    ``indicator_liouville``  a = 1_{P+(n) in S} lambda(n)
    ``orbit``                a = g(T^Omega(n) x0), with |g| <= 1
    """

    kind: str
    S: PrimeSetSpec | None = None
    system: DynSystem | None = None
    g: Observable | None = None

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise InvalidArgument(f"sequence kind must be one of {SEQUENCE_KINDS}")
        if self.kind == "indicator_liouville" and self.S is None:
            raise InvalidArgument("indicator_liouville needs a prime set")
        if self.kind == "orbit":
            if self.system is None or self.g is None:
                raise InvalidArgument("orbit sequences need a system and an observable")
            self.g.check_system(self.system)
            if self.g.sup_norm_bound() > 1 + 1e-12:
                raise InvalidArgument("orbit observable must satisfy |g| <= 1")

    def values(self, table: FactorTable, stop: int) -> np.ndarray:
        """a(n) for 0 <= n <= stop (a(0) = 0)."""
        table.check_range(stop)
        omega = table.big_omega[: stop + 1]
        if self.kind == "one":
            out = np.ones(stop + 1)
        elif self.kind == "orbit":
            out = orbit_values(self.system, self.g, int(omega.max()))[omega]
        else:
            out = (1.0 - 2.0 * (omega & 1)).astype(np.float64)
            if self.kind == "indicator_liouville":
                out = out * self.S.pmax_mask(table.pmax[: stop + 1])
        out[0] = 0.0
        return out

    def label(self) -> str:
        if self.kind == "indicator_liouville":
            return f"1[{self.S.label()}]*lambda"
        if self.kind == "orbit":
            return f"g({self.system.label()})"
        return self.kind


@dataclass(frozen=True)
class BRReport:
    lhs: float
    rhs: float
    N: int


def br_inequality_report(table: FactorTable, B: Iterable[int], a: BoundedSequence, N: int) -> BRReport:
    """lhs = |E_{n<=N} a(n) - E^log_{m in B} E_{n<=N/m} a(mn)| and
    rhs = sqrt(Phi-correlation of B).  Report only: the inequality bounds a
    limit superior, so nothing is asserted at finite N."""
    B = sorted(set(int(b) for b in B))
    if not B:
        raise InvalidArgument("B must be non-empty")
    if B[-1] > N:
        raise InvalidArgument("every m in B must be <= N")
    table.check_range(N)
    a_vals = a.values(table, N)
    whole = math.fsum(a_vals[1:].tolist()) / N
    inner = [math.fsum(a_vals[m: (N // m) * m + 1: m].tolist()) / (N // m) for m in B]
    lhs = abs(whole - log_average(B, inner))
    rhs = math.sqrt(float(phi_correlation(B)))
    return BRReport(lhs=lhs, rhs=rhs, N=N)


def perturbation_gap(table: FactorTable, m: int, F1: PrimeSetSpec | None, F2: TestFunction | None,
                     a: BoundedSequence, N: int, norm: NormalizationSpec | None = None) -> float:
    """|E_{n<=N} F1(P+(mn)) F2(psi(mn)) a(n) - E_{n<=N} F1(P+(n)) F2(psi(n)) a(n)|.

    F1 is the indicator of a prime set (None for F1 = 1) and psi uses the EK
    normalization at scale N unless ``norm`` is given.
    """
    if m < 1:
        raise InvalidArgument("m must be >= 1")
    table.check_range(m * N)
    norm = NormalizationSpec.ek(N) if norm is None else norm
    F2 = TestFunction.one() if F2 is None else F2
    a_vals = a.values(table, N)[1:]
    n = np.arange(1, N + 1, dtype=np.int64)

    def mean(idx: np.ndarray) -> float:
        f1 = np.ones(N) if F1 is None else F1.pmax_mask(table.pmax[idx]).astype(np.float64)
        stat = table.omega_of_phi()[idx] if norm.kind == "EP" else table.big_omega[idx]
        f2 = np.asarray(F2(norm.psi(stat)), dtype=np.float64)
        return math.fsum((f1 * f2 * a_vals).tolist()) / N

    if m == 1:
        return 0.0
    return abs(mean(m * n) - mean(n))
