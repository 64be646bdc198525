"""Sets of primes, their natural densities, and the density-error functionals.

``e_S(x) = sup_{2 <= y <= x} |pi_S(y) - delta(S) Li(y)|`` and its normalized,
horizon-truncated tail supremum ``v_S(x) = max_{x <= g <= X_max} e_S(g)/g``
are tabulated by :func:`build_density_error`; :func:`choose_y` turns a
tabulated ``v`` into the slowly growing friability parameter ``y(x)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, PreconditionError
from .quadrature import gauss_legendre_nodes, gl_adaptive
from .sieve import FactorTable

SET_KINDS = ("all", "residue", "explicit")
H_FAMILY = ("log_over_loglog_sq", "loglog")


def _totient(q: int) -> int:
    result, m, p = q, q, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class PrimeSetSpec:
    """A set S of primes: all primes, a residue class a mod q, or a finite list.

    The ``all`` set is treated as *no restriction*: ``P+(n) in S`` holds for
    every n, including n = 1 whose P+ is 1.  For the other kinds 1 is never a
    member.
    """

    kind: str
    a: int = 0
    q: int = 1
    primes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise InvalidArgument(f"unknown prime-set kind {self.kind!r}")
        if self.kind == "residue":
            if self.q <= 0:
                raise InvalidArgument(f"modulus q must be >= 1, got {self.q}")
            object.__setattr__(self, "a", self.a % self.q)
        if self.kind == "explicit":
            primes = tuple(sorted(set(int(p) for p in self.primes)))
            bad = [p for p in primes if not _is_prime(p)]
            if bad:
                raise InvalidArgument(f"explicit prime sets take primes only, got {bad[:5]}")
            object.__setattr__(self, "primes", primes)

    @classmethod
    def all(cls) -> "PrimeSetSpec":
        return cls("all")

    @classmethod
    def residue(cls, a: int, q: int) -> "PrimeSetSpec":
        return cls("residue", a=a, q=q)

    @classmethod
    def explicit(cls, primes: Sequence[int]) -> "PrimeSetSpec":
        return cls("explicit", primes=tuple(primes))

    def label(self) -> str:
        if self.kind == "residue":
            return f"residue({self.a},{self.q})"
        if self.kind == "explicit":
            return "explicit(" + " ".join(map(str, self.primes)) + ")"
        return "all"

    def contains_prime(self, p: int) -> bool:
        """Membership for a prime p (the caller guarantees primality)."""
        if self.kind == "all":
            return True
        if self.kind == "residue":
            return p % self.q == self.a
        return p in self.primes

    def prime_mask(self, values: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`contains_prime` over an array of primes."""
        values = np.asarray(values, dtype=np.int64)
        if self.kind == "all":
            return np.ones(values.shape, dtype=bool)
        if self.kind == "residue":
            return values % self.q == self.a
        return np.isin(values, np.array(self.primes, dtype=np.int64))

    def pmax_mask(self, pmax: np.ndarray) -> np.ndarray:
        """Indicator of ``P+(n) in S`` given an array of P+ values."""
        pmax = np.asarray(pmax, dtype=np.int64)
        if self.kind == "all":
            return np.ones(pmax.shape, dtype=bool)
        return self.prime_mask(pmax) & (pmax >= 2)


def natural_density(spec: PrimeSetSpec) -> Fraction:
    """Exact delta(S): 1 for all primes, 1/phi(q) for a reduced residue class,
    0 for a non-reduced class or a finite set."""
    if spec.kind == "all":
        return Fraction(1)
    if spec.kind == "residue":
        if spec.q <= 0:
            raise InvalidArgument("q must be >= 1")
        if math.gcd(spec.a, spec.q) != 1:
            return Fraction(0)
        return Fraction(1, _totient(spec.q))
    return Fraction(0)


def pi_S(table: FactorTable, spec: PrimeSetSpec, x: int) -> int:
    """Number of primes p <= x in S."""
    if x > table.limit:
        raise InvalidArgument(f"x = {x} exceeds table limit {table.limit}")
    if x < 2:
        return 0
    primes = table.primes
    primes = primes[: np.searchsorted(primes, x, side="right")]
    return int(np.count_nonzero(spec.prime_mask(primes)))


def pi_S_counts(table: FactorTable, spec: PrimeSetSpec, X: int) -> np.ndarray:
    """``counts[k] = pi_S(k)`` for 0 <= k <= X."""
    if X > table.limit:
        raise InvalidArgument(f"X = {X} exceeds table limit {table.limit}")
    indicator = np.zeros(X + 1, dtype=np.int64)
    primes = table.primes[: np.searchsorted(table.primes, X, side="right")]
    indicator[primes[spec.prime_mask(primes)]] = 1
    return np.cumsum(indicator)


# --------------------------------------------------------------------------
# logarithmic integral
# --------------------------------------------------------------------------


def _li_integrand(s: np.ndarray) -> np.ndarray:
    return np.exp(s) / s


def logarithmic_integral(x: float) -> float:
    """Li(x) = integral from 2 to x of dt / log t.

    Computed on the substituted form  int_{log 2}^{log x} e^s / s ds  with
    order-16 Gauss-Legendre panels, doubled until successive estimates agree
    to 1e-12.
    """
    if not x >= 2:
        raise InvalidArgument(f"Li(x) needs x >= 2, got {x}")
    if x == 2:
        return 0.0
    return gl_adaptive(_li_integrand, math.log(2.0), math.log(x), tol=1e-13)


def li_at_integers(X: int, block: int = 1024) -> np.ndarray:
    """``out[k] = Li(k)`` for 2 <= k <= X (entries 0 and 1 are NaN).

    Unit-interval integrals use 8-point Gauss-Legendre (the integrand is
    analytic there); block totals are chained with compensated summation.
    """
    out = np.full(X + 1, np.nan)
    if X < 2:
        return out
    out[2] = 0.0
    if X == 2:
        return out
    xg, wg = gauss_legendre_nodes(8)
    k = np.arange(2, X, dtype=np.float64)
    nodes = k[:, None] + 0.5 + 0.5 * xg[None, :]
    unit = (1.0 / np.log(nodes)) @ wg * 0.5
    # Neumaier-compensated running total across blocks
    total, comp = 0.0, 0.0
    for lo in range(0, unit.shape[0], block):
        chunk = unit[lo: lo + block]
        local = np.cumsum(chunk)
        out[3 + lo: 3 + lo + chunk.shape[0]] = (total + comp) + local
        s = float(np.sum(chunk))
        t = total + s
        if abs(total) >= abs(s):
            comp += (total - t) + s
        else:
            comp += (s - t) + total
        total = t
    return out


# --------------------------------------------------------------------------
# density error table
# --------------------------------------------------------------------------


@dataclass
class DensityErrorTable:
    """Tabulated e_S and the horizon-truncated v_S on an increasing grid."""

    set_label: str
    delta: float
    xs: np.ndarray
    pi_S: np.ndarray
    delta_li: np.ndarray
    e_S: np.ndarray
    v_S: np.ndarray
    X_max: int

    def v_at(self, s: float | np.ndarray) -> np.ndarray:
        """Step evaluation of v: the value at the largest grid point <= s
        (the first grid point when s precedes the grid).  Since v is
        non-increasing this never understates v inside the grid."""
        idx = np.searchsorted(self.xs, np.asarray(s, dtype=np.float64), side="right") - 1
        return self.v_S[np.clip(idx, 0, len(self.xs) - 1)]

    def __add__(self, other: "DensityErrorTable") -> "DensityErrorTable":
        """Pointwise sum of two tables on the same grid (e.g. v_S + v_P)."""
        if not np.array_equal(self.xs, other.xs):
            raise InvalidArgument("tables must share a grid to be summed")
        return DensityErrorTable(
            set_label=f"{self.set_label}+{other.set_label}",
            delta=self.delta + other.delta,
            xs=self.xs,
            pi_S=self.pi_S + other.pi_S,
            delta_li=self.delta_li + other.delta_li,
            e_S=self.e_S + other.e_S,
            v_S=self.v_S + other.v_S,
            X_max=self.X_max,
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "pi_S", "delta_li", "e_S", "v_S"])
            for row in zip(self.xs.tolist(), self.pi_S.tolist(), self.delta_li.tolist(),
                           self.e_S.tolist(), self.v_S.tolist()):
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4])])


def e_S_running(table: FactorTable, spec: PrimeSetSpec, X: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (pi_S, delta*Li, e_S) at every integer 0..X.

    pi_S is constant on [k, k + 1) while Li increases, so the supremum over
    real y in [2, x] is attained at an integer or as a left limit at one; both
    candidates are scanned.  Entries 0 and 1 of the Li and e_S arrays are NaN.
    """
    delta = float(natural_density(spec))
    counts = pi_S_counts(table, spec, X)
    dli = delta * li_at_integers(X)
    at = np.abs(counts - dli)
    left = np.zeros_like(at)
    left[3:] = np.abs(counts[2:-1] - dli[3:])
    cand = np.maximum(at, left)
    e = np.full(X + 1, np.nan)
    e[2:] = np.maximum.accumulate(cand[2:])
    return counts, dli, e


def build_density_error(table: FactorTable, spec: PrimeSetSpec, grid: Sequence[int]) -> DensityErrorTable:
    xs = np.asarray(sorted(set(int(g) for g in grid)), dtype=np.int64)
    if xs.size == 0:
        raise InvalidArgument("grid must be non-empty")
    if xs[0] < 2 or xs[-1] > table.limit:
        raise InvalidArgument(f"grid must lie in [2, {table.limit}]")
    X = int(xs[-1])
    counts, dli, e = e_S_running(table, spec, X)
    e_grid = e[xs]
    ratio = e_grid / xs
    v = np.maximum.accumulate(ratio[::-1])[::-1]
    return DensityErrorTable(
        set_label=spec.label(),
        delta=float(natural_density(spec)),
        xs=xs,
        pi_S=counts[xs],
        delta_li=dli[xs],
        e_S=e_grid,
        v_S=v,
        X_max=X,
    )


# --------------------------------------------------------------------------
# choice of y
# --------------------------------------------------------------------------


def h_function(name: str, x: float) -> float:
    if name not in H_FAMILY:
        raise InvalidArgument(f"h must be one of {H_FAMILY}")
    L2 = math.log(math.log(x))
    if name == "loglog":
        return L2
    return math.log(x) / L2**2


def threshold_C(v: DensityErrorTable, m: int) -> int:
    """Least integer C such that v(t^(1/m)) * log t < 1/m for every tabulated
    t in (C, X_max]; 0 when no tabulated t violates the inequality."""
    t = v.xs.astype(np.float64)
    bad = v.v_at(t ** (1.0 / m)) * np.log(t) >= 1.0 / m
    if not bad.any():
        return 0
    return int(v.xs[np.flatnonzero(bad)[-1]])


@dataclass(frozen=True)
class YChoice:
    x: float
    y: float
    beta: int
    h: float
    thresholds: tuple[int, ...]


def choose_y(x: float, v: DensityErrorTable, h: str = "loglog") -> YChoice:
    """beta(x) = min(floor(sqrt(h(x))), sup{m : C(m) < x}) and y = x^(1/beta)."""
    if not (x > math.e and math.log(math.log(x)) > 1):
        raise PreconditionError("choose_y needs log log x > 1")
    if v.X_max < x:
        raise PreconditionError(f"v is tabulated to {v.X_max} < x = {x}")
    hx = h_function(h, x)
    cap = math.isqrt(int(math.floor(hx))) if hx >= 1 else 0
    if cap < 1:
        raise PreconditionError(f"h(x) = {hx:.4g} < 1 leaves no admissible beta")
    thresholds = []
    beta = 0
    for m in range(1, cap + 1):
        c = threshold_C(v, m)
        thresholds.append(c)
        if c < x:
            beta = m
        else:
            break
    if beta == 0:
        raise PreconditionError(f"x = {x} does not exceed C(1) = {thresholds[0]}")
    return YChoice(x=x, y=x ** (1.0 / beta), beta=beta, h=hx, thresholds=tuple(thresholds))
