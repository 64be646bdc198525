import math

import numpy as np
import pytest
from hypothesis import settings

from lpflab.sieve import build_factor_table

settings.register_profile("lab", max_examples=60, deadline=None)
settings.load_profile("lab")

SMALL_LIMIT = 1 << 20


BIG_LIMIT = 10**7


@pytest.fixture(scope="session")
def table():
    return build_factor_table(SMALL_LIMIT)


@pytest.fixture(scope="session")
def big():
    return build_factor_table(BIG_LIMIT)


def trial_factor(n: int) -> list[tuple[int, int]]:
    """Factor n by trial division; the reference for every sieve oracle."""
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


def is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def brute_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def pmax_of(n: int) -> int:
    f = trial_factor(n)
    return f[-1][0] if f else 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
