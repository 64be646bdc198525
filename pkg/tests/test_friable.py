import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpflab.errors import InvalidArgument, PreconditionError
from lpflab.friable import (dickman_rho, euler_constant, ivic_main_term, psi_f, square_pmax_sum,
                            tw_main_term, tw_ratio)
from lpflab.quadrature import gauss_legendre_nodes
from lpflab.sieve import WeightSpec

from conftest import pmax_of, trial_factor

mpmath.mp.dps = 30
ALPHAS = (0.5, 1.0, 2.0)


def rho1_on_2_3(u):
    """Closed form of rho_1 on [2, 3] via the dilogarithm."""
    u = mpmath.mpf(u)
    return float(1 - (1 - mpmath.log(u - 1)) * mpmath.log(u) + mpmath.polylog(2, 1 - u)
                 + mpmath.pi**2 / 12)


@pytest.fixture(scope="module")
def grids():
    return {a: dickman_rho(a, u_max=40) for a in ALPHAS}


def test_rho1_closed_forms(grids):
    g = grids[1.0]
    assert g(0.5) == 1.0
    assert g(2.0) == pytest.approx(1 - math.log(2), abs=1e-13)
    for u in (1.25, 1.5, 1.999):
        assert g(u) == pytest.approx(1 - math.log(u), rel=1e-12)
    for u in (2.0, 2.3, 2.5, 2.77, 3.0):
        assert g(u) == pytest.approx(rho1_on_2_3(u), rel=1e-11)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rho_head(grids, alpha):
    g = grids[alpha]
    for u in (0.1, 0.5, 1.0):
        assert g(u) == pytest.approx(u ** (alpha - 1) / math.gamma(alpha), rel=1e-14)


def rho_head_exact(alpha, u):
    """rho_alpha on (0, 2] in closed form, from solving the delay equation
    against the known values on (0, 1]."""
    u = mpmath.mpf(u)
    if u <= 1:
        return u ** (alpha - 1) / mpmath.gamma(alpha)
    if alpha == 0.5:
        return (1 - mpmath.acosh(mpmath.sqrt(u))) / mpmath.sqrt(mpmath.pi * u)
    if alpha == 1.0:
        return 1 - mpmath.log(u)
    if alpha == 2.0:
        return 3 * u - 2 * u * mpmath.log(u) - 2
    raise ValueError(alpha)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rho_on_1_2_closed_form(grids, alpha):
    g = grids[alpha]
    for u in (1.00001, 1.0001, 1.001, 1.1, 1.26, 1.5, 1.9, 2.0):
        assert g(u) == pytest.approx(float(rho_head_exact(alpha, u)), rel=1e-12)


def laplace(g, s):
    """int_0^{u_max} e^{-su} rho(u) du: exact on [0, 2], Gauss-Legendre over
    the stored node values beyond."""
    a = g.alpha
    head = mpmath.quad(lambda u: mpmath.exp(-s * u) * rho_head_exact(a, u), [0, 1, 2])
    xg, wg = gauss_legendre_nodes(g._nodes.shape[1])
    m2 = 2 * round(1 / g.step)
    left = np.arange(m2, g._nodes.shape[0]) * g.step
    t = left[:, None] + 0.5 * g.step * (1 + xg[None, :])
    tail = 0.5 * g.step * np.sum((g._nodes[m2:] * np.exp(-s * t)) @ wg)
    return float(head) + tail


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("s", [0.0, 1.0, 3.0])
def test_rho_laplace_transform(grids, alpha, s):
    # the transform of rho_alpha is exp(alpha gamma - alpha Ein(s))
    ein = mpmath.e1(s) + mpmath.log(s) + mpmath.euler if s else 0
    expect = float(mpmath.exp(alpha * mpmath.euler - alpha * ein))
    assert laplace(grids[alpha], s) == pytest.approx(expect, rel=1e-11)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rho_window_identity(grids, alpha):
    g = grids[alpha]
    for u in (2.0005, 2.5, 3.0005, 5.0, 9.75, 20.0, 35.0):
        breaks = sorted(set(np.linspace(u - 1, u, 9).tolist()) | set(range(math.ceil(u - 1), math.floor(u) + 1)))
        integral = mpmath.quad(g, breaks)
        assert u * g(u) == pytest.approx(alpha * float(integral), rel=1e-9)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rho_integral(grids, alpha):
    g = grids[alpha]
    assert g.integral(0, 40) == pytest.approx(float(mpmath.exp(alpha * mpmath.euler)), rel=1e-11)
    assert g.integral(0.3, 1.7) == pytest.approx(
        float(mpmath.quad(lambda u: rho_head_exact(alpha, u), [0.3, 1, 1.7])), rel=1e-12)
    assert g.integral(4.2, 4.2) == 0.0


@pytest.mark.parametrize("alpha", ALPHAS)
def test_rho_step_halving(alpha):
    a = dickman_rho(alpha, u_max=10, step=2.0**-9)
    b = dickman_rho(alpha, u_max=10, step=2.0**-10)
    assert np.max(np.abs(a.values[1:] - b.values[2::2])) < 1e-12


def test_rho_positive_and_decreasing_for_alpha_le_1(grids):
    for a in (0.5, 1.0):
        v = grids[a].values[1:]
        assert np.all(v > 0) and np.all(np.diff(v) <= 0)


def test_rho_arguments():
    with pytest.raises(InvalidArgument):
        dickman_rho(0.0)
    with pytest.raises(InvalidArgument):
        dickman_rho(1.0, step=0.3)
    with pytest.raises(InvalidArgument):
        dickman_rho(1.0, u_max=60)
    with pytest.raises(PreconditionError):
        dickman_rho(1.0, u_max=5)(6.0)


def test_rho_csv(tmp_path):
    g = dickman_rho(1.0, u_max=3)
    g.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "u,rho" and len(lines) == g.values.shape[0] + 1


@given(st.integers(2, 3000), st.integers(2, 60))
def test_psi_f_brute(table, x, y):
    spec = WeightSpec.d(2)
    expect = sum(math.prod(e + 1 for _, e in trial_factor(n)) for n in range(1, x + 1) if pmax_of(n) <= y)
    assert psi_f(table, spec, x, y).value == expect


def test_psi_100_10(table):
    assert psi_f(table, WeightSpec.unit(), 100, 10).value == 46


def test_euler_constants(table):
    assert euler_constant(WeightSpec.unit(), primes=table.primes)[0] == 1.0
    assert euler_constant(WeightSpec.d(2), primes=table.primes)[0] == 1.0
    c, tail = euler_constant(WeightSpec.mu_squared(), primes=table.primes)
    assert abs(c - 6 / math.pi**2) <= tail


def test_euler_constant_alpha_pow_omega(table):
    # alpha^omega at alpha = 1 is the indicator-free unit weight
    c, _ = euler_constant(WeightSpec.alpha_pow_omega(1), primes=table.primes)
    assert c == pytest.approx(1.0, abs=1e-15)


def test_tw_ratio(table):
    rho = dickman_rho(1.0, u_max=5)
    r = tw_ratio(table, WeightSpec.unit(), rho, 10**6, 10**3)
    assert 0.8 <= r <= 1.2
    main = tw_main_term(WeightSpec.unit(), rho, 10**6, 10**3, 1.0)
    assert main == pytest.approx(10**6 * (1 - math.log(2)), rel=1e-12)
    with pytest.raises(PreconditionError):
        tw_ratio(table, WeightSpec.d(2), rho, 10**6, 10**3)


def test_square_pmax_sum_brute(table):
    running = 0
    for x in range(2, 3001):
        f = trial_factor(x)
        running += f[-1][1] >= 2
        if x % 97 == 0:
            assert square_pmax_sum(table, x, 0) == running
    expect = math.fsum(pmax_of(n) ** -1.5 for n in range(2, 3001) if trial_factor(n)[-1][1] >= 2)
    assert square_pmax_sum(table, 3000, 1.5) == pytest.approx(expect, rel=1e-13)


def test_square_pmax_worked(table):
    assert square_pmax_sum(table, 50, 0) == 11


def test_ivic_domain():
    with pytest.raises(InvalidArgument):
        ivic_main_term(10, 0)
    with pytest.raises(InvalidArgument):
        ivic_main_term(10**6, -1)
    assert 0 < ivic_main_term(10**6, 0) < 10**6
