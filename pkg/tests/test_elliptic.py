import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from psthree.elliptic import (
    QuadraticProblem,
    agm,
    ellipk,
    incomplete_integral,
    lambda_n,
    u_n_reference,
)
from psthree.errors import DomainError


def K_series(k):
    """Hypergeometric series pi/2 sum ((2n)!/(4^n n!^2))^2 k^(2n)."""
    total, term, n = 0.0, 1.0, 0
    while term > 1e-18:
        total += term
        n += 1
        term *= ((2 * n - 1) / (2 * n)) ** 2 * k * k
    return math.pi / 2 * total


def test_agm_trivial():
    assert agm(1.0, 1.0) == 1.0


@pytest.mark.parametrize("a, b", [(1.0, 0.5), (3.0, 7.0), (1e-3, 2.0)])
def test_agm_one_step_invariance(a, b):
    assert_allclose(agm(a, b), agm((a + b) / 2, math.sqrt(a * b)), rtol=1e-14)


@pytest.mark.parametrize("a, b", [(0.0, 1.0), (-1.0, 2.0)])
def test_agm_domain(a, b):
    with pytest.raises(DomainError):
        agm(a, b)


@pytest.mark.parametrize("k", np.round(np.arange(0.1, 1.0, 0.1), 1))
def test_K_matches_series(k):
    assert_allclose(ellipk(k), K_series(k), rtol=1e-12)


def test_K_at_zero_and_monotone():
    assert ellipk(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    ks = np.linspace(0, 0.99, 50)
    assert np.all(np.diff([ellipk(k) for k in ks]) > 0)
    with pytest.raises(DomainError):
        ellipk(1.0)


@pytest.mark.parametrize("k", [0.05, 0.5, 0.9])
def test_K_matches_scipy(k):
    assert_allclose(ellipk(k), special.ellipk(k * k), rtol=1e-14)


def test_quadratic_problem_domain():
    with pytest.raises(DomainError):
        QuadraticProblem(1.0)


def test_golden_first_eigenvalue():
    prob = QuadraticProblem(3.0)
    assert prob.k == 0.5
    golden = 1 + 1 / math.cosh(2 * math.pi * ellipk(0.5) / ellipk(math.sqrt(0.75)))
    assert_allclose(lambda_n(prob, 1), golden, rtol=1e-15)


@pytest.mark.parametrize("C", [1.5, 3.0, 5.0, 20.0])
def test_lambda_n_decreasing_below_two(C):
    prob = QuadraticProblem(C)
    lams = np.array([lambda_n(prob, n) for n in range(1, 30)])
    # strict decrease where lambda_n - 1 is representable next to 1 in double precision
    resolved = lams - 1 > 1e-12
    assert np.all(np.diff(lams[resolved]) < 0)
    assert np.all(np.diff(lams) <= 0)
    assert np.all((lams >= 1) & (lams < 2))
    assert lams[-1] - 1 < 1e-12
    with pytest.raises(ValueError):
        lambda_n(prob, 0)


@pytest.mark.parametrize("C", [2.0, 3.0, 5.0])
def test_lambda_n_functional_relation(C):
    prob = QuadraticProblem(C)
    # only n with lambda_n - 1 >= 1e-5: below that, rounding of lambda_n next to 1 alone exceeds 1e-10
    ns = [n for n in range(1, 40) if lambda_n(prob, n) - 1 >= 1e-5]
    assert len(ns) >= 2
    rates = [math.acosh(1 / (lambda_n(prob, n) - 1)) / n for n in ns]
    assert_allclose(rates, 2 * math.pi * prob.tau, rtol=1e-10)


@pytest.mark.parametrize("C", [2.0, 3.0, 5.0])
def test_incomplete_integral_against_scipy(C):
    # substitution s = 1/sqrt(1 - k'^2 sin^2 phi) maps the integral to F(phi | k'^2)
    prob = QuadraticProblem(C)
    k = prob.k
    kp2 = 1 - k * k
    X = np.linspace(1.0, 1 / k, 23)
    phi = np.arcsin(np.sqrt(np.clip((1 - 1 / X ** 2) / kp2, 0, 1)))
    assert_allclose(incomplete_integral(prob, X), special.ellipkinc(phi, kp2), rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_u_n_endpoints_and_zeros(n):
    prob = QuadraticProblem(3.0)
    assert_allclose(u_n_reference(prob, n, np.array([-1.0, 1.0])), 0.0, atol=1e-10)
    x = np.linspace(-1, 1, 4001)[1:-1]
    u = u_n_reference(prob, n, x)
    assert np.sum(np.sign(u[:-1]) * np.sign(u[1:]) < 0) == n - 1


def test_u_n_domain():
    with pytest.raises(ValueError):
        u_n_reference(QuadraticProblem(3.0), 1, 1.5)


def test_full_integral_equals_Kprime():
    prob = QuadraticProblem(3.0)
    assert_allclose(incomplete_integral(prob, 1 / prob.k), prob.values.Kp, rtol=1e-10)
