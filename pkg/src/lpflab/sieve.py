"""Smallest-prime-factor tables and the arithmetic data derived from them.

A :class:`FactorTable` holds ``spf[n]`` for ``0 <= n <= limit`` (with the
conventions ``spf[0] = 0`` and ``spf[1] = 1``) and lazily derives the arrays
for Omega, omega, omega_1, the largest prime factor, Euler's totient, the
Moebius and Liouville functions.  :func:`stream_profiles` produces the same
data segment by segment for limits that do not fit in memory.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import InvalidArgument, ResourceError

DEFAULT_MEMORY_LIMIT = 10**8
DEFAULT_SEGMENT = 1 << 18
MIN_SEGMENT = 1 << 16
SPF_MAGIC = b"SPF1"
SPF_VERSION = 1

WEIGHT_KINDS = ("d_alpha", "mu_squared", "alpha_pow_omega", "unit")


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSpec:
    """A non-negative multiplicative weight with ``f(p) = alpha`` at every prime.

    The weight is fixed by its values on prime powers, which depend only on
    the exponent:

    ``d_alpha``          f(p^v) = binomial(alpha + v - 1, v)
    ``mu_squared``       f(p) = 1, f(p^v) = 0 for v >= 2
    ``alpha_pow_omega``  f(p^v) = alpha for v >= 1
    ``unit``             f = 1
    """

    kind: str
    alpha: float | Fraction | int = 1
    divisor_bound_k: int = 0

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise InvalidArgument(f"unknown weight kind {self.kind!r}; expected one of {WEIGHT_KINDS}")
        if isinstance(self.alpha, bool) or not isinstance(self.alpha, (int, float, Fraction)):
            raise InvalidArgument("alpha must be a real number")
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise InvalidArgument(f"alpha must be positive, got {self.alpha}")
        if self.kind in ("mu_squared", "unit") and self.alpha != 1:
            raise InvalidArgument(f"weight kind {self.kind} has alpha = 1")
        k = max(1, math.ceil(self.alpha))
        if self.divisor_bound_k == 0:
            object.__setattr__(self, "divisor_bound_k", k)
        elif self.divisor_bound_k < k:
            raise InvalidArgument(f"|f| <= d_k needs k >= {k} for alpha = {self.alpha}")

    @classmethod
    def unit(cls) -> "WeightSpec":
        return cls("unit", 1)

    @classmethod
    def mu_squared(cls) -> "WeightSpec":
        return cls("mu_squared", 1)

    @classmethod
    def d(cls, alpha) -> "WeightSpec":
        return cls("d_alpha", alpha)

    @classmethod
    def alpha_pow_omega(cls, alpha) -> "WeightSpec":
        return cls("alpha_pow_omega", alpha)

    @property
    def is_exact(self) -> bool:
        """True when every value is rational (alpha given as int or Fraction)."""
        return isinstance(self.alpha, (int, Fraction))

    def prime_power(self, v: int, exact: bool = False):
        """Return f(p^v), which is the same for every prime p."""
        if v < 0:
            raise InvalidArgument("exponent must be >= 0")
        a = Fraction(self.alpha) if exact else float(self.alpha)
        one = Fraction(1) if exact else 1.0
        if v == 0 or self.kind == "unit":
            return one
        if self.kind == "mu_squared":
            return one if v == 1 else 0 * one
        if self.kind == "alpha_pow_omega":
            return a
        value = one
        for i in range(v):
            value = value * (a + i) / (i + 1)
        return value

    def prime_power_table(self, max_exponent: int = 64) -> np.ndarray:
        return np.array([float(self.prime_power(v)) for v in range(max_exponent + 1)])

    def label(self) -> str:
        if self.kind in ("unit", "mu_squared"):
            return self.kind
        return f"{self.kind}({self.alpha})"


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ArithmeticProfile:
    n: int
    big_omega: int
    small_omega: int
    omega1: int
    pmax: int
    phi: int
    mu: int
    liouville: int


def factorize_with_spf(spf: np.ndarray, n: int) -> list[tuple[int, int]]:
    """Prime factorization of n as ``[(p, e), ...]`` with p increasing."""
    factors: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        factors.append((p, e))
    return factors


def profile_from_factors(n: int, factors: list[tuple[int, int]]) -> ArithmeticProfile:
    big = sum(e for _, e in factors)
    phi = 1
    for p, e in factors:
        phi *= (p - 1) * p ** (e - 1)
    squarefree = all(e == 1 for _, e in factors)
    return ArithmeticProfile(
        n=n,
        big_omega=big,
        small_omega=len(factors),
        omega1=sum(1 for _, e in factors if e == 1),
        pmax=factors[-1][0] if factors else 1,
        phi=phi,
        mu=(-1) ** len(factors) if squarefree else 0,
        liouville=(-1) ** big,
    )


@dataclass
class ProfileBlock:
    """Arithmetic data for the consecutive integers ``start, ..., start + len - 1``."""

    start: int
    big_omega: np.ndarray
    small_omega: np.ndarray
    omega1: np.ndarray
    pmax: np.ndarray
    phi: np.ndarray
    mu: np.ndarray
    spf: np.ndarray
    pmax_exp: np.ndarray
    weight: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.big_omega)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self), dtype=np.int64)

    @property
    def liouville(self) -> np.ndarray:
        return 1 - 2 * (self.big_omega.astype(np.int64) & 1)

    @property
    def is_prime(self) -> np.ndarray:
        return (self.spf.astype(np.int64) == self.n) & (self.n >= 2)


# --------------------------------------------------------------------------
# the table
# --------------------------------------------------------------------------


@dataclass(eq=False)
class FactorTable:
    """Smallest prime factors of every integer up to ``limit``.

    Immutable after construction; the derived arrays are computed on first
    access and cached.
    """

    limit: int
    spf: np.ndarray
    segment_size: int = DEFAULT_SEGMENT
    _primes: np.ndarray | None = field(default=None, repr=False)
    _weight_cache: dict = field(default_factory=dict, repr=False)

    @cached_property
    def _derived(self):
        return _kernels.derive_profiles(self.spf)

    @property
    def big_omega(self) -> np.ndarray:
        return self._derived[0]

    @property
    def small_omega(self) -> np.ndarray:
        return self._derived[1]

    @property
    def omega1(self) -> np.ndarray:
        return self._derived[2]

    @property
    def pmax(self) -> np.ndarray:
        return self._derived[3]

    @property
    def phi(self) -> np.ndarray:
        return self._derived[4]

    @property
    def mu(self) -> np.ndarray:
        return self._derived[5]

    @property
    def spf_exp(self) -> np.ndarray:
        """Exponent of spf[n] in n."""
        return self._derived[6]

    @property
    def pmax_exp(self) -> np.ndarray:
        """Exponent of P+(n) in n (0 for n <= 1)."""
        return self._derived[7]

    @cached_property
    def liouville(self) -> np.ndarray:
        lam = (1 - 2 * (self.big_omega.astype(np.int8) & 1)).astype(np.int8)
        lam[0] = 0
        return lam

    @cached_property
    def is_prime(self) -> np.ndarray:
        idx = np.arange(self.limit + 1, dtype=np.int64)
        mask = self.spf.astype(np.int64) == idx
        mask[:2] = False
        return mask

    @property
    def primes(self) -> np.ndarray:
        if self._primes is None:
            self._primes = np.flatnonzero(self.is_prime).astype(np.int64)
        return self._primes

    @cached_property
    def prime_count(self) -> np.ndarray:
        """``prime_count[x] = pi(x)`` for 0 <= x <= limit."""
        return np.cumsum(self.is_prime, dtype=np.int64)

    def omega_of_phi(self) -> np.ndarray:
        """Omega(phi(n)) for every n, looked up through the same table."""
        return self.big_omega[self.phi.astype(np.int64)]

    def weights(self, spec: WeightSpec) -> np.ndarray:
        """Float array of f(n) for 0 <= n <= limit (f(0) = 0).  Cached per spec;
        callers must not modify the returned array."""
        if spec not in self._weight_cache:
            if spec.kind == "unit":
                out = np.ones(self.limit + 1)
                out[0] = 0.0
            else:
                out = _kernels.multiplicative_values(self.spf, self.spf_exp, spec.prime_power_table())
            out.flags.writeable = False
            self._weight_cache[spec] = out
        return self._weight_cache[spec]

    def check_range(self, n: int, lo: int = 1) -> None:
        if not lo <= n <= self.limit:
            raise InvalidArgument(f"n = {n} outside [{lo}, {self.limit}]")

    def blocks(self, segment: int | None = None, stop: int | None = None,
               weight: WeightSpec | None = None) -> Iterator[ProfileBlock]:
        """Iterate the table as :class:`ProfileBlock` slices covering [1, stop]."""
        segment = segment or self.segment_size
        stop = self.limit if stop is None else stop
        w = self.weights(weight) if weight is not None else None
        for lo in range(1, stop + 1, segment):
            hi = min(lo + segment, stop + 1)
            sl = slice(lo, hi)
            yield ProfileBlock(
                start=lo,
                big_omega=self.big_omega[sl],
                small_omega=self.small_omega[sl],
                omega1=self.omega1[sl],
                pmax=self.pmax[sl],
                phi=self.phi[sl],
                mu=self.mu[sl],
                spf=self.spf[sl],
                pmax_exp=self.pmax_exp[sl],
                weight=None if w is None else w[sl],
            )

    # binary dump -----------------------------------------------------------

    def dump(self, path: str | Path) -> None:
        """Write the spf array: 16-byte header (b"SPF1", u32 version, u64 N) then
        N + 1 little-endian u32 entries for n = 0..N."""
        with open(path, "wb") as fh:
            fh.write(SPF_MAGIC + struct.pack("<IQ", SPF_VERSION, self.limit))
            fh.write(self.spf.astype("<u4", copy=False).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "FactorTable":
        with open(path, "rb") as fh:
            header = fh.read(16)
            if len(header) != 16 or header[:4] != SPF_MAGIC:
                raise InvalidArgument(f"{path}: not an SPF1 file")
            version, limit = struct.unpack("<IQ", header[4:])
            if version != SPF_VERSION:
                raise InvalidArgument(f"{path}: unsupported version {version}")
            spf = np.frombuffer(fh.read(), dtype="<u4").astype(np.uint32)
        if spf.shape[0] != limit + 1:
            raise InvalidArgument(f"{path}: truncated ({spf.shape[0]} entries, expected {limit + 1})")
        return cls(limit=int(limit), spf=spf)


def build_factor_table(N: int, memory_limit: int = DEFAULT_MEMORY_LIMIT,
                       segment_size: int = DEFAULT_SEGMENT) -> FactorTable:
    """Linear (Euler) sieve for spf[n], 2 <= n <= N, in O(N) time."""
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidArgument(f"N must be an integer >= 2, got {N!r}")
    if N > memory_limit:
        raise ResourceError(f"N = {N} exceeds the in-memory limit {memory_limit}; use stream_profiles")
    if N >= 2**32:
        raise ResourceError("spf entries are 32-bit; N must be < 2**32")
    spf, primes = _kernels.linear_sieve(int(N))
    return FactorTable(limit=int(N), spf=spf, segment_size=segment_size, _primes=primes)


def profile(table: FactorTable, n: int) -> ArithmeticProfile:
    table.check_range(n)
    return profile_from_factors(n, factorize_with_spf(table.spf, n))


def weight_value(spec: WeightSpec, table: FactorTable, n: int, exact: bool | None = None):
    """f(n) as the product of f(p^v) over the prime powers exactly dividing n.

    Returns a :class:`~fractions.Fraction` when ``exact`` (default: whenever
    alpha is rational), else a float.
    """
    table.check_range(n)
    if exact is None:
        exact = spec.is_exact
    value = Fraction(1) if exact else 1.0
    for _, e in factorize_with_spf(table.spf, n):
        value *= spec.prime_power(e, exact=exact)
    return value


# --------------------------------------------------------------------------
# streaming
# --------------------------------------------------------------------------


class Accumulator:
    """Consumer for :func:`stream_profiles`.

    Subclasses implement :meth:`update`; :meth:`merge` combines two partial
    accumulators (needed only when segments are processed separately).
    """

    weight: WeightSpec | None = None

    def update(self, block: ProfileBlock) -> None:
        raise NotImplementedError

    def merge(self, other: "Accumulator") -> None:
        raise NotImplementedError

    def result(self):
        raise NotImplementedError


class SumAccumulator(Accumulator):
    """Integer sum of one integer-valued block attribute (exact)."""

    def __init__(self, attribute: str):
        self.attribute = attribute
        self.total = 0

    def update(self, block):
        self.total += int(np.sum(getattr(block, self.attribute), dtype=np.int64))

    def merge(self, other):
        self.total += other.total

    def result(self):
        return self.total


class PrimeCountAccumulator(Accumulator):
    def __init__(self):
        self.count = 0

    def update(self, block):
        self.count += int(np.count_nonzero(block.is_prime))

    def merge(self, other):
        self.count += other.count

    def result(self):
        return self.count


def _base_primes(N: int) -> np.ndarray:
    r = math.isqrt(N) + 1
    _, primes = _kernels.linear_sieve(max(r, 2))
    return primes


def iter_segments(N: int, segment: int = DEFAULT_SEGMENT,
                  weight: WeightSpec | None = None) -> Iterator[ProfileBlock]:
    """Yield :class:`ProfileBlock` segments covering [1, N] without an spf table."""
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if segment < MIN_SEGMENT:
        raise InvalidArgument(f"segment must be >= {MIN_SEGMENT}")
    base = _base_primes(N)
    table = (weight or WeightSpec.unit()).prime_power_table()
    for lo in range(1, N + 1, segment):
        hi = min(lo + segment, N + 1)
        try:
            arrays = _kernels.segment_profiles(lo, hi, base, table)
        except MemoryError as exc:
            raise ResourceError(str(exc)) from exc
        bo, so, o1, pm, ph, mu, spf, pe, w = arrays
        yield ProfileBlock(lo, bo, so, o1, pm, ph, mu, spf, pe, w if weight is not None else None)


def stream_profiles(N: int, segment: int, consumer: Accumulator):
    """Feed the profile of every n in [1, N] to ``consumer`` exactly once.

    Blocks arrive in increasing order.  Returns ``consumer.result()``.
    """
    for block in iter_segments(N, segment, getattr(consumer, "weight", None)):
        consumer.update(block)
    return consumer.result()
