"""Normalized prime-factor statistics and their comparison with the Gaussian.

Two normalizations are supported:

``EK(alpha)``  psi(n) = (Omega(n) - alpha L) / sqrt(alpha L)
``EP``         psi(n) = (Omega(phi(n)) - L^2 / 2) / (L^(3/2) / sqrt 3)

with L = log log x.  Because the statistics are integer valued, an empirical
distribution is stored exactly at the attained values of psi.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InvalidArgument
from .primeset import PrimeSetSpec, natural_density
from .sieve import Accumulator, FactorTable, ProfileBlock, WeightSpec

NORM_KINDS = ("EK", "EP")
STATISTICS = ("big_omega", "small_omega")

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# normalization
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizationSpec:
    """Centering and scaling of an integer statistic at scale ``x``."""

    kind: str
    x: float
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise InvalidArgument(f"normalization kind must be one of {NORM_KINDS}")
        if not self.x > math.e:
            raise InvalidArgument(f"normalization needs x > e so that log log x > 0, got {self.x}")
        if not self.alpha > 0:
            raise InvalidArgument(f"alpha must be positive, got {self.alpha}")
        if self.kind == "EP" and self.alpha != 1:
            raise InvalidArgument("EP normalization has no alpha")

    @classmethod
    def ek(cls, x: float, alpha: float = 1.0) -> "NormalizationSpec":
        return cls("EK", float(x), float(alpha))

    @classmethod
    def ep(cls, x: float) -> "NormalizationSpec":
        return cls("EP", float(x))

    @property
    def loglog(self) -> float:
        return math.log(math.log(self.x))

    @property
    def center(self) -> float:
        L = self.loglog
        return self.alpha * L if self.kind == "EK" else 0.5 * L * L

    @property
    def scale(self) -> float:
        L = self.loglog
        return math.sqrt(self.alpha * L) if self.kind == "EK" else L**1.5 / math.sqrt(3.0)

    def psi(self, k):
        """psi of a statistic value (scalar or array)."""
        return (np.asarray(k, dtype=np.float64) - self.center) / self.scale

    def label(self) -> str:
        return f"EK({self.alpha:g})" if self.kind == "EK" else "EP"


def ek_psi(spec: NormalizationSpec, big_omega: int) -> float:
    if spec.kind != "EK":
        raise InvalidArgument("ek_psi needs an EK normalization")
    return float(spec.psi(big_omega))


def ep_psi(spec: NormalizationSpec, omega_of_phi: int) -> float:
    if spec.kind != "EP":
        raise InvalidArgument("ep_psi needs an EP normalization")
    return float(spec.psi(omega_of_phi))


# --------------------------------------------------------------------------
# Gaussian
# --------------------------------------------------------------------------


def gaussian_cdf(t):
    """Standard normal distribution function, via the complementary error
    function so that the lower tail keeps relative accuracy."""
    if np.ndim(t) == 0:
        return 0.5 * math.erfc(-float(t) / _SQRT2)
    t = np.asarray(t, dtype=np.float64)
    return np.array([0.5 * math.erfc(-v / _SQRT2) for v in t.ravel()]).reshape(t.shape)


def gaussian_pdf(t):
    t = np.asarray(t, dtype=np.float64)
    out = _INV_SQRT_2PI * np.exp(-0.5 * t * t)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# test functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Continuous piecewise-linear F with compact support.

    ``knots`` holds the breakpoints (t_i, F(t_i)) in increasing t; F vanishes
    at the first and last knot and outside them.  ``constant`` instead gives
    the constant function, which is not compactly supported and is only
    accepted where a constant F makes sense (orbit averages with F = 1).
    """

    __test__ = False  # not a pytest class

    knots: tuple[tuple[float, float], ...] = ()
    constant: float | None = None

    def __post_init__(self):
        if self.constant is not None:
            if self.knots:
                raise InvalidArgument("a test function is either constant or given by knots")
            return
        knots = tuple((float(t), float(v)) for t, v in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) == 0:
            return
        if len(knots) < 2:
            raise InvalidArgument("need at least two knots")
        ts = [t for t, _ in knots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidArgument("knot abscissae must be strictly increasing")
        if knots[0][1] != 0 or knots[-1][1] != 0:
            raise InvalidArgument("F must vanish at the first and last knot (compact support)")
        if not all(math.isfinite(v) for _, v in knots) or not all(math.isfinite(t) for t in ts):
            raise InvalidArgument("knots must be finite")

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls()

    @classmethod
    def one(cls) -> "TestFunction":
        return cls(constant=1.0)

    @classmethod
    def triangle(cls, a: float = -1.0, b: float = 1.0, peak: float = 1.0) -> "TestFunction":
        if not b > a:
            raise InvalidArgument("triangle needs a < b")
        return cls(((a, 0.0), (0.5 * (a + b), peak), (b, 0.0)))

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def scaled(self, c: float) -> "TestFunction":
        if self.is_constant:
            return TestFunction(constant=c * self.constant)
        return TestFunction(tuple((t, c * v) for t, v in self.knots))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.is_constant:
            out = np.full(t.shape, float(self.constant))
        elif not self.knots:
            out = np.zeros(t.shape)
        else:
            ts = np.array([k[0] for k in self.knots])
            vs = np.array([k[1] for k in self.knots])
            out = np.interp(t, ts, vs, left=0.0, right=0.0)
        return float(out) if out.ndim == 0 else out

    def gaussian_integral(self) -> float:
        """int F dPhi in closed form.

        On a piece where F(t) = c0 + c1 t the integral against the standard
        normal density is c0 (Phi(b) - Phi(a)) + c1 (pdf(a) - pdf(b)).
        """
        if self.is_constant:
            return float(self.constant)
        total = []
        for (a, fa), (b, fb) in zip(self.knots, self.knots[1:]):
            c1 = (fb - fa) / (b - a)
            c0 = fa - c1 * a
            total.append(c0 * (gaussian_cdf(b) - gaussian_cdf(a)) + c1 * (gaussian_pdf(a) - gaussian_pdf(b)))
        return math.fsum(total)

    def label(self) -> str:
        if self.is_constant:
            return f"const({self.constant:g})"
        if not self.knots:
            return "zero"
        return "pl[" + " ".join(f"{t:g}:{v:g}" for t, v in self.knots) + "]"


# --------------------------------------------------------------------------
# empirical curves
# --------------------------------------------------------------------------


@dataclass
class EmpiricalCurve:
    """Normalized restricted weighted mass of {psi(n) <= t}, stored at the
    attained values of psi.

    ``stat`` are the attained statistic values, ``t`` the matching psi values
    and ``weight`` the restricted weighted mass at each of them (not yet
    normalized); ``total`` is the unrestricted sum of f(n) over n <= N.
    """

    stat: np.ndarray
    t: np.ndarray
    weight: np.ndarray
    total: float
    delta: float
    N: int
    norm: NormalizationSpec
    weight_label: str = "unit"
    set_label: str = "all"
    statistic: str = "big_omega"

    @property
    def mass(self) -> np.ndarray:
        return np.cumsum(self.weight) / self.total

    @property
    def terminal_mass(self) -> float:
        return math.fsum(self.weight.tolist()) / self.total

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.mass.tolist()))

    def __call__(self, t: float) -> float:
        """Right-continuous step evaluation."""
        i = int(np.searchsorted(self.t, t, side="right"))
        return 0.0 if i == 0 else float(self.mass[i - 1])

    def target(self) -> np.ndarray:
        return self.delta * gaussian_cdf(self.t)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mass", "target"])
            for row in zip(self.t.tolist(), self.mass.tolist(), self.target().tolist()):
                w.writerow([repr(v) for v in row])


def _statistic(table: FactorTable, norm: NormalizationSpec, statistic: str, N: int) -> np.ndarray:
    if norm.kind == "EP":
        return table.omega_of_phi()[1: N + 1]
    if statistic not in STATISTICS:
        raise InvalidArgument(f"statistic must be one of {STATISTICS}")
    return getattr(table, statistic)[1: N + 1]


def restricted_weighted_cdf(table: FactorTable, weight: WeightSpec, S: PrimeSetSpec,
                            norm: NormalizationSpec, N: int,
                            statistic: str = "big_omega") -> EmpiricalCurve:
    """Exact restricted weighted distribution of psi over n <= N.

    For an EP normalization the statistic is Omega(phi(n)), looked up in the
    same table since phi(n) <= n, and only the unit weight is allowed.
    """
    if not N > math.e:
        raise InvalidArgument(f"N must exceed e, got {N}")
    table.check_range(N)
    if norm.kind == "EP" and weight.kind != "unit":
        raise InvalidArgument("the EP statistic carries no weight; use the unit weight")
    stat = _statistic(table, norm, statistic, N)
    w = table.weights(weight)[1: N + 1]
    mask = S.pmax_mask(table.pmax[1: N + 1])
    counts, present = _kernels.compensated_bincount(stat, w, mask, int(stat.max()) + 1)
    ks = np.flatnonzero(present)
    return EmpiricalCurve(
        stat=ks,
        t=norm.psi(ks),
        weight=counts[ks],
        total=math.fsum(w.tolist()),
        delta=float(natural_density(S)),
        N=N,
        norm=norm,
        weight_label=weight.label(),
        set_label=S.label(),
        statistic="omega_phi" if norm.kind == "EP" else statistic,
    )


class CurveAccumulator(Accumulator):
    """Streaming version of :func:`restricted_weighted_cdf` for EK statistics.

    Keeps per-value masses, so ``merge`` is pointwise addition.
    """

    def __init__(self, weight: WeightSpec, S: PrimeSetSpec, norm: NormalizationSpec,
                 statistic: str = "big_omega"):
        if norm.kind != "EK":
            raise InvalidArgument("streaming curves support EK statistics only")
        if statistic not in STATISTICS:
            raise InvalidArgument(f"statistic must be one of {STATISTICS}")
        self.weight, self.S, self.norm, self.statistic = weight, S, norm, statistic
        self.restricted = np.zeros(0)
        self.present = np.zeros(0, dtype=bool)
        self.total_parts: list[float] = []
        self.N = 0

    def _grow(self, size: int) -> None:
        if size > self.restricted.shape[0]:
            self.restricted = np.pad(self.restricted, (0, size - self.restricted.shape[0]))
            self.present = np.pad(self.present, (0, size - self.present.shape[0]))

    def update(self, block: ProfileBlock) -> None:
        stat = getattr(block, self.statistic)
        w = block.weight if block.weight is not None else np.ones(len(block))
        mask = self.S.pmax_mask(block.pmax)
        c, p = _kernels.compensated_bincount(stat, np.asarray(w, dtype=np.float64), mask, int(stat.max()) + 1)
        self._grow(c.shape[0])
        self.restricted[: c.shape[0]] += c
        self.present[: p.shape[0]] |= p
        self.total_parts.append(math.fsum(w.tolist()))
        self.N = max(self.N, block.start + len(block) - 1)

    def merge(self, other: "CurveAccumulator") -> None:
        self._grow(other.restricted.shape[0])
        self.restricted[: other.restricted.shape[0]] += other.restricted
        self.present[: other.present.shape[0]] |= other.present
        self.total_parts.extend(other.total_parts)
        self.N = max(self.N, other.N)

    def result(self) -> EmpiricalCurve:
        ks = np.flatnonzero(self.present)
        return EmpiricalCurve(
            stat=ks, t=self.norm.psi(ks), weight=self.restricted[ks],
            total=math.fsum(self.total_parts), delta=float(natural_density(self.S)),
            N=self.N, norm=self.norm, weight_label=self.weight.label(),
            set_label=self.S.label(), statistic=self.statistic,
        )


# --------------------------------------------------------------------------
# distances and functionals
# --------------------------------------------------------------------------


def ks_distance(curve: EmpiricalCurve, delta: float | None = None,
                include_left_limits: bool = False) -> float:
    """sup |curve(t) - delta Phi(t)| over the jump points of the curve.

    By default the curve values at its knots are compared.  With
    ``include_left_limits`` the values just before each jump are compared
    too, which gives the full supremum over the real line.
    """
    delta = curve.delta if delta is None else float(delta)
    if not 0 <= delta <= 1:
        raise InvalidArgument("delta must lie in [0, 1]")
    if curve.t.size == 0:
        return 0.0
    target = delta * gaussian_cdf(curve.t)
    mass = curve.mass
    d = float(np.max(np.abs(mass - target)))
    if include_left_limits:
        before = np.concatenate(([0.0], mass[:-1]))
        d = max(d, float(np.max(np.abs(before - target))), float(abs(mass[-1] - delta)))
    return d


@dataclass(frozen=True)
class FunctionalResult:
    empirical: float
    target: float
    delta: float
    N: int
    weight: str
    set: str

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps({"empirical": self.empirical, "target": self.target, "delta": self.delta,
                           "N": self.N, "weight": self.weight, "set": self.set}, indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def smooth_functional(curve: EmpiricalCurve, F: TestFunction, delta: float | None = None) -> FunctionalResult:
    """Weighted empirical mean of F(psi(n)) over the restricted n, against
    delta(S) times the Gaussian mean of F."""
    delta = curve.delta if delta is None else float(delta)
    terms = np.asarray(F(curve.t), dtype=np.float64) * curve.weight
    empirical = math.fsum(terms.tolist()) / curve.total
    return FunctionalResult(empirical=empirical, target=delta * F.gaussian_integral(), delta=delta,
                            N=curve.N, weight=curve.weight_label, set=curve.set_label)


# --------------------------------------------------------------------------
# totient identities
# --------------------------------------------------------------------------


def phi_identity_check(m: int, n: int, table: FactorTable) -> bool:
    """phi(mn) = phi(m) phi(n) g / phi(g) with g = gcd(m, n), in integers."""
    if m < 1 or n < 1:
        raise InvalidArgument("m and n must be positive")
    table.check_range(m * n)
    phi = table.phi
    g = math.gcd(m, n)
    return int(phi[m * n]) * int(phi[g]) == int(phi[m]) * int(phi[n]) * g


def omega_phi_prime_sum(table: FactorTable, x: int, exact: bool = False) -> float | Fraction:
    """Sum of Omega(p - 1)/p over primes p <= x.

    ``exact`` returns a Fraction; its denominators grow like the primorial,
    so keep x modest in that mode.
    """
    table.check_range(x)
    primes = table.primes
    primes = primes[: np.searchsorted(primes, x, side="right")]
    omegas = table.big_omega[primes - 1].astype(np.int64)
    if exact:
        return sum((Fraction(int(k), int(p)) for k, p in zip(omegas, primes)), Fraction(0))
    return math.fsum((omegas / primes.astype(np.float64)).tolist())


def omega_phi_center(x: float) -> float:
    """(log log x)^2 / 2, the leading term of :func:`omega_phi_prime_sum`."""
    return 0.5 * math.log(math.log(x)) ** 2

