"""Friable sums, the generalized Dickman function and related constants.

The Dickman-type function rho_alpha solves

    u rho'(u) + (1 - alpha) rho(u) + alpha rho(u - 1) = 0      (u > 1)
    rho(u) = u^(alpha - 1) / Gamma(alpha)                       (0 < u <= 1)

which is integrated here in the equivalent form

    d/du [u^(1-alpha) rho(u)] = -alpha u^(-alpha) rho(u - 1).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InvalidArgument, PreconditionError
from .quadrature import gauss_legendre_nodes
from .sieve import FactorTable, WeightSpec

DEFAULT_STEP = 2.0**-10
DEFAULT_U_MAX = 20.0
NODES_PER_CELL = 8


# --------------------------------------------------------------------------
# Dickman function
# --------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _integration_matrix(order: int) -> np.ndarray:
    """M[q, r] = integral from -1 to x_q of the r-th Lagrange basis polynomial
    on the Gauss-Legendre nodes x_0..x_{order-1}."""
    leg = np.polynomial.legendre
    x, _ = gauss_legendre_nodes(order)
    coef = np.linalg.inv(leg.legvander(x, order - 1))
    M = np.empty((order, order))
    for r in range(order):
        M[:, r] = leg.legval(x, leg.legint(coef[:, r], lbnd=-1))
    return M


def _head_integral(alpha: float, b: np.ndarray, terms: int = 40) -> np.ndarray:
    """int_0^b s^(alpha-1) (1+s)^(-alpha) ds by the binomial series (b < 1).

    Used on the first cell after u = 1, where s^(alpha-1) is singular for
    alpha < 1 and rough for non-integer alpha.
    """
    b = np.asarray(b, dtype=np.float64)
    total = np.zeros_like(b)
    coef = 1.0
    for k in range(terms):
        total += coef * b ** (alpha + k) / (alpha + k)
        coef *= (-alpha - k) / (k + 1)
    return total


@dataclass
class RhoGrid:
    """rho_alpha tabulated at u = i * step, 0 <= i <= u_max / step.

    ``values[0]`` holds the limit as u -> 0+ (inf for alpha < 1).  Calling the
    grid evaluates rho at any u in [0, u_max].  For non-integer alpha, rho
    has a (u - k)^(alpha + k - 1) component just after each integer k, which
    a polynomial on the cell cannot follow.  So the closed form is used on
    (0, 1], the Volterra form with a binomial series on (1, 1.25), and the
    window identity on the first cell after each integer k >= 2.  Elsewhere
    the stored Gauss-Legendre node values of the cell are interpolated.
    """

    alpha: float
    step: float
    u_max: float
    values: np.ndarray
    _nodes: np.ndarray = field(repr=False)
    _cellint: np.ndarray = field(repr=False)

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.step

    def _check(self, u: float) -> None:
        if not 0 <= u <= self.u_max + 1e-12:
            raise PreconditionError(f"u = {u} outside [0, {self.u_max}]")

    def _interp(self, u: float) -> float:
        """Degree-9 interpolant through the cell ends and its nodes."""
        h = self.step
        i = min(int(u / h), self.values.shape[0] - 2)
        left = i * h
        if abs(u - left) < 1e-15 * max(1.0, u):
            return float(self.values[i])
        xg, _ = gauss_legendre_nodes(self._nodes.shape[1])
        pts = np.concatenate(([left], left + 0.5 * h * (1 + xg), [left + h]))
        vals = np.concatenate(([self.values[i]], self._nodes[i], [self.values[i + 1]]))
        total = 0.0
        for j in range(pts.shape[0]):
            others = np.delete(pts, j)
            total += vals[j] * np.prod((u - others) / (pts[j] - others))
        return float(total)

    def __call__(self, u: float) -> float:
        u = float(u)
        self._check(u)
        a = self.alpha
        if u <= 1.0:
            if u == 0.0:
                return float(self.values[0])
            return u ** (a - 1) / math.gamma(a)
        if u < 1.25:
            head = float(_head_integral(a, np.array([u - 1.0]))[0])
            return u ** (a - 1) * (1.0 - a * head) / math.gamma(a)
        k = math.floor(u)
        if k >= 2 and u - k < self.step and u != k:
            return a * self.integral(u - 1.0, u) / u
        return self._interp(u)

    def integral(self, lo: float, hi: float) -> float:
        """int_lo^hi rho_alpha(t) dt for 0 <= lo <= hi <= u_max."""
        self._check(lo)
        self._check(hi)
        if hi < lo:
            raise InvalidArgument("need lo <= hi")
        a, h = self.alpha, self.step
        total = 0.0
        if lo < 1.0:
            b = min(hi, 1.0)
            total += (b**a - lo**a) / math.gamma(a + 1)
            lo = b
        if lo < hi and lo < 2.0:
            # b rho(b) - a rho(a) = alpha (int_a^b rho - int_{a-1}^{b-1} rho) on [1, 2]
            b = min(hi, 2.0)
            total += (b * self(b) - lo * self(lo)) / a + ((b - 1) ** a - (lo - 1) ** a) / math.gamma(a + 1)
            lo = b
        if lo < hi:
            i0 = math.ceil(lo / h - 1e-9)
            i1 = math.floor(hi / h + 1e-9)
            if i0 > i1:
                return total + self._partial(lo, hi)
            total += self._partial(lo, i0 * h) + self._partial(i1 * h, hi)
            total += math.fsum(self._cellint[i0:i1].tolist())
        return total

    def _partial(self, lo: float, hi: float) -> float:
        """Gauss-Legendre over part of one cell, on the cell interpolant."""
        if hi <= lo:
            return 0.0
        xg, wg = gauss_legendre_nodes(self._nodes.shape[1])
        t = lo + 0.5 * (hi - lo) * (1 + xg)
        return 0.5 * (hi - lo) * float(np.dot(wg, [self._interp(v) for v in t]))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "rho"])
            for u, r in zip(self.u.tolist(), self.values.tolist()):
                w.writerow([repr(u), repr(r)])


def dickman_rho(alpha: float, u_max: float = DEFAULT_U_MAX, step: float = DEFAULT_STEP) -> RhoGrid:
    """Tabulate rho_alpha on [0, u_max].

    ``step`` must be 1/m for an integer m >= 256 so that cells line up with
    the integers and every delayed node t - 1 is itself a stored node.  Each
    cell stores rho at 8 Gauss-Legendre nodes.

    On (1, 2] the Volterra form is integrated against the closed-form delayed
    values (the singular first cell by a binomial series).  Beyond u = 2 the
    sweep uses u rho(u) = alpha * int_{u-1}^{u} rho(t) dt, which follows from
    the equation and the value at u = 1; it sums positive terms only, so rho
    keeps full relative accuracy as it decays.
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if not 0 < step <= 2.0**-8:
        raise InvalidArgument(f"step must be in (0, 2^-8], got {step}")
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-12:
        raise InvalidArgument("step must be the reciprocal of an integer")
    if not 1 <= u_max <= 50:
        raise InvalidArgument(f"u_max must be in [1, 50], got {u_max}")
    h = 1.0 / m
    n_cells = int(math.ceil(u_max * m - 1e-9))
    Q = NODES_PER_CELL
    xg, wg = gauss_legendre_nodes(Q)
    M = _integration_matrix(Q)
    gamma = math.gamma(alpha)

    cell_left = np.arange(n_cells) * h
    nodes_t = cell_left[:, None] + 0.5 * h * (1 + xg[None, :])
    nodes = np.empty((n_cells, Q))
    values = np.empty(n_cells + 1)
    head = min(m, n_cells)
    nodes[:head] = nodes_t[:head] ** (alpha - 1) / gamma
    values[1: head + 1] = (np.arange(1, head + 1) * h) ** (alpha - 1) / gamma
    values[0] = math.inf if alpha < 1 else (1.0 if alpha == 1 else 0.0)

    # (1, 2]: Volterra form with the delayed values known in closed form
    if n_cells > m:
        idx = np.arange(m, min(2 * m, n_cells))
        t = nodes_t[idx]
        G = t ** (-alpha) * nodes[idx - m]
        cell_int = 0.5 * h * (G @ wg)
        partial = 0.5 * h * (G @ M.T)
        partial[0] = _head_integral(alpha, t[0] - 1.0) / gamma
        cell_int[0] = _head_integral(alpha, np.array([h]))[0] / gamma
        A = 1.0 / gamma
        cum = np.concatenate(([0.0], np.cumsum(cell_int)))
        values[idx + 1] = ((idx + 1) * h) ** (alpha - 1) * (A - alpha * cum[1:])
        nodes[idx] = t ** (alpha - 1) * (A - alpha * (cum[:-1, None] + partial))

    # cell integrals of rho itself, needed by the window identity
    cellint = np.zeros(n_cells)
    edges = np.arange(head + 1) * h
    cellint[:head] = (edges[1:] ** alpha - edges[:-1] ** alpha) / math.gamma(alpha + 1)
    if n_cells > m:
        top = min(2 * m, n_cells)
        cellint[m:top] = 0.5 * h * (nodes[m:top] @ wg)
        # first cell after u = 1 from (b rho(b) - a rho(a)) / alpha + int_{a-1}^{b-1} rho
        cellint[m] = ((1 + h) * values[m + 1] - values[m]) / alpha + cellint[0]

    # u > 2: u rho(u) = alpha * int_{u-1}^{u} rho(t) dt, all terms positive
    if n_cells > 2 * m:
        _kernels.rho_window_sweep(nodes, values, cellint, 2 * m, m, h, float(alpha), xg, wg, M)
    return RhoGrid(alpha=float(alpha), step=h, u_max=n_cells * h, values=values, _nodes=nodes,
                   _cellint=cellint)


# --------------------------------------------------------------------------
# Euler product constant
# --------------------------------------------------------------------------


def _local_log_factor(spec: WeightSpec, p: np.ndarray) -> np.ndarray:
    """log of (1 - 1/p)^alpha * sum_v f(p^v) / p^v, in closed form per kind."""
    a = float(spec.alpha)
    inv = 1.0 / p
    if spec.kind in ("unit", "d_alpha"):
        # the local series is (1 - 1/p)^(-alpha) exactly
        return np.zeros_like(inv)
    if spec.kind == "mu_squared":
        return np.log1p(-inv * inv)
    return a * np.log1p(-inv) + np.log1p(a / (p - 1.0))


def _tail_log_constant(spec: WeightSpec) -> float:
    """K with |log local factor| <= K / p^2 for every p > 100."""
    if spec.kind in ("unit", "d_alpha"):
        return 0.0
    if spec.kind == "mu_squared":
        return 1.0 / (1 - 1e-4)
    # (alpha-1) log(1-x) + log(1+(alpha-1)x); bound each Taylor remainder
    b = abs(float(spec.alpha) - 1.0)
    x = 0.01
    if b * x >= 0.5:
        raise InvalidArgument("alpha too large for the tail estimate at this cutoff")
    return b / (2 * (1 - x)) + b * b / (2 * (1 - b * x))


def euler_constant(spec: WeightSpec, prime_cutoff: int = 10**5,
                   primes: np.ndarray | None = None) -> tuple[float, float]:
    """C_alpha(f) = prod_p (1 - 1/p)^alpha sum_{v>=0} f(p^v)/p^v.

    Returns ``(value, tail_bound)``: the product over p <= prime_cutoff and a
    rigorous bound on the distance to the full product, from
    |log factor| <= K/p^2 and sum_{n > P} 1/n^2 < 1/P.
    """
    if prime_cutoff < 100:
        raise InvalidArgument("prime_cutoff must be >= 100")
    if primes is None:
        from .sieve import build_factor_table
        primes = build_factor_table(prime_cutoff).primes
    primes = primes[primes <= prime_cutoff].astype(np.float64)
    logs = _local_log_factor(spec, primes)
    log_value = math.fsum(logs.tolist())
    value = math.exp(log_value)
    tail_log = _tail_log_constant(spec) / prime_cutoff
    return value, value * math.expm1(tail_log)


# --------------------------------------------------------------------------
# friable sums
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FriableSum:
    x: float
    y: float
    u: float
    value: float
    weight: WeightSpec


def psi_f(table: FactorTable, spec: WeightSpec, x: int, y: int,
          weights: np.ndarray | None = None) -> FriableSum:
    """Psi_f(x, y): sum of f(n) over n <= x with P+(n) <= y (n = 1 included)."""
    if y < 1:
        raise InvalidArgument("y must be >= 1")
    if not 1 <= x <= table.limit:
        raise InvalidArgument(f"x = {x} outside [1, {table.limit}]")
    w = table.weights(spec) if weights is None else weights
    sel = table.pmax[1: x + 1] <= y
    value = math.fsum(w[1: x + 1][sel].tolist())
    u = math.log(x) / math.log(y) if y > 1 else math.inf
    return FriableSum(x=x, y=y, u=u, value=value, weight=spec)


def tw_main_term(spec: WeightSpec, rho: RhoGrid, x: float, y: float, constant: float) -> float:
    """C_alpha(f) x rho_alpha(u) (log y)^(alpha - 1)."""
    u = math.log(x) / math.log(y)
    return constant * x * rho(u) * math.log(y) ** (float(spec.alpha) - 1)


def tw_ratio(table: FactorTable, spec: WeightSpec, rho: RhoGrid, x: int, y: int,
             constant: float | None = None) -> float:
    """Psi_f(x, y) divided by its asymptotic main term."""
    if not math.isclose(float(spec.alpha), rho.alpha, rel_tol=1e-12):
        raise PreconditionError(f"weight alpha {spec.alpha} does not match rho alpha {rho.alpha}")
    if y < 2:
        raise PreconditionError("y must be >= 2")
    u = math.log(x) / math.log(y)
    if not 1 - 1e-12 <= u <= rho.u_max:
        raise PreconditionError(f"u = {u} outside [1, {rho.u_max}]")
    if constant is None:
        constant, _ = euler_constant(spec, primes=table.primes if table.limit >= 10**5 else None)
    return psi_f(table, spec, x, y).value / tw_main_term(spec, rho, x, y, constant)


# --------------------------------------------------------------------------
# square largest prime factor sums
# --------------------------------------------------------------------------


def square_pmax_sum(table: FactorTable, x: int, r: float) -> float:
    """Sum of P+(n)^(-r) over 2 <= n <= x with P+(n)^2 | n."""
    if not r > -1:
        raise InvalidArgument(f"r must exceed -1, got {r}")
    if not 1 <= x <= table.limit:
        raise InvalidArgument(f"x = {x} outside [1, {table.limit}]")
    sel = table.pmax_exp[2: x + 1] >= 2
    p = table.pmax[2: x + 1][sel].astype(np.float64)
    if r == 0:
        return float(p.shape[0])
    return math.fsum((p ** (-float(r))).tolist())


def ivic_main_term(x: float, r: float) -> float:
    """x exp{-(2r+2)^(1/2) (log x log_2 x)^(1/2) (1 + g_r(x))}.

    The (log_3 x / log_2 x)^3 correction inside the exponent is not included,
    so this is an order-of-magnitude main term only.
    """
    if not r > -1:
        raise InvalidArgument(f"r must exceed -1, got {r}")
    if not x > math.exp(math.e):
        raise InvalidArgument("x must exceed e^e so that log_3 x > 0")
    L1 = math.log(x)
    L2 = math.log(L1)
    L3 = math.log(L2)
    lr = math.log1p(r)
    g = (L3 + lr - 2 - math.log(2)) / (2 * L2) * (1 + 2 / L2) - (L3 + lr - 2) ** 2 / (8 * L2**2)
    return x * math.exp(-math.sqrt(2 * r + 2) * math.sqrt(L1 * L2) * (1 + g))
