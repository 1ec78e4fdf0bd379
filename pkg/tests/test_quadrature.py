import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from psthree.errors import KernelError
from psthree.quadrature import (
    ChebyshevGrid,
    assemble_galerkin,
    chebyshev_T,
    full_kernel,
    pv_cauchy_of_basis,
    smooth_kernel_eval,
    smooth_kernel_from_preimages,
)
from psthree.rational_map import (
    Mobius,
    RationalMap,
    gauge_transform,
    ps3_instance,
    quadratic_map,
    random_gauge,
)

X20 = np.random.default_rng(0).uniform(-0.95, 0.95, 20)


def pv_oracle(n, x):
    """Adaptive PV quadrature (QAWC) of sqrt(1 - t^2) U_{n-1}(t)/(t - x)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, _ = integrate.quad(lambda t: np.sin(n * np.arccos(t)), -1, 1, weight="cauchy",
                              wvar=x, limit=400, epsabs=1e-14, epsrel=1e-13)
    return v


def test_pv_odd_integrand_vanishes_at_zero():
    assert_allclose(pv_cauchy_of_basis(1, 0.0), 0.0, atol=1e-15)


@pytest.mark.parametrize("n, x, expected", [
    (1, 0.5, -np.pi / 2),
    (3, 0.3, -np.pi * (4 * 0.027 - 0.9)),
])
def test_pv_examples(n, x, expected):
    assert_allclose(pv_cauchy_of_basis(n, x), expected, rtol=1e-14)
    assert_allclose(pv_oracle(n, x), expected, rtol=1e-10)


@pytest.mark.parametrize("n", range(1, 11))
def test_pv_matches_adaptive_oracle(n):
    got = pv_cauchy_of_basis(n, X20)
    ref = np.array([pv_oracle(n, x) for x in X20])
    assert_allclose(got, ref, rtol=1e-8)


def test_pv_rejects_n_zero():
    with pytest.raises(ValueError):
        pv_cauchy_of_basis(0, 0.1)


def test_chebyshev_T_recurrence():
    x = np.linspace(-1, 1, 9)
    T = chebyshev_T(np.arange(5), x)
    assert_allclose(T[:, 2], 2 * x ** 2 - 1, atol=1e-14)
    assert_allclose(T[:, 4], 2 * x * T[:, 3] - T[:, 2], atol=1e-14)


@pytest.mark.parametrize("C", [1.5, 3.0, 7.0])
def test_quadratic_smooth_kernel(C):
    rng = np.random.default_rng(1)
    t, x = rng.uniform(-1, 1, (2, 200))
    assert_allclose(smooth_kernel_eval(quadratic_map(C), t, x), 1 / (t + x + 2 * C), rtol=1e-12)


def _cubic_maps():
    R = ps3_instance(5.0)
    L1, L2 = random_gauge(np.random.default_rng(4))
    return [ps3_instance(2.0), R, ps3_instance(10.0), gauge_transform(R, L1, L2), quadratic_map(3.0)]


@pytest.mark.parametrize("R", _cubic_maps())
def test_decomposition_identity(R):
    rng = np.random.default_rng(2)
    t, x = rng.uniform(-1, 1, (2, 1000))
    lhs = 1 / (t - x) + smooth_kernel_eval(R, t, x)
    rhs = full_kernel(R, t, x)
    # compare in the scale of the singular part to avoid cancellation artefacts near t = x
    err = np.abs(lhs - rhs) / (1 + np.abs(rhs))
    assert np.max(err) < 1e-9


@pytest.mark.parametrize("R", _cubic_maps()[:4])
def test_kernel_agrees_with_preimage_reference(R):
    t = np.linspace(-1, 1, 33)
    for x in (-0.7, 0.1, 0.85):
        ref = smooth_kernel_from_preimages(R, t, x)
        assert np.max(np.abs(ref.imag)) < 1e-12 * (1 + np.max(np.abs(ref)))
        assert_allclose(smooth_kernel_eval(R, t, x), ref.real, rtol=1e-9, atol=1e-12)


def test_kernel_finite_on_the_diagonal():
    R = ps3_instance(5.0)
    x = np.linspace(-1, 1, 21)
    assert np.all(np.isfinite(smooth_kernel_eval(R, x, x)))


def test_kernel_error_at_singular_point():
    # x^2 sends -x to the same value, so kappa(., 0.5) has a pole at t = -0.5
    R = RationalMap((0.0, 0.0, 1.0), (1.0,))
    with pytest.raises(KernelError):
        smooth_kernel_eval(R, -0.5, 0.5)


def test_identity_map_gives_zero_matrix():
    G = assemble_galerkin(RationalMap.identity(), 16)
    assert np.all(G.matrix == 0)


def test_grid_order_and_weights():
    g = ChebyshevGrid.for_truncation(10)
    assert g.order == 36
    assert_allclose(np.sum(g.weights), np.pi)
    with pytest.raises(ValueError):
        ChebyshevGrid.for_truncation(10, order=20)


@pytest.mark.parametrize("R", [quadratic_map(3.0), ps3_instance(5.0)])
def test_doubling_quadrature_order(R):
    A = assemble_galerkin(R, 32).matrix
    B = assemble_galerkin(R, 32, order=2 * (2 * 32 + 16)).matrix
    assert np.max(np.abs(A - B)) < 1e-10


def test_odd_map_decouples_into_parity_blocks():
    # R(x) = 4x - x^3 is odd, so kappa(-t, -x) = -kappa(t, x) and modes of opposite parity do not mix
    A = assemble_galerkin(RationalMap((0.0, 4.0, 0.0, -1.0), (1.0,)), 24).matrix
    m, n = np.meshgrid(np.arange(24), np.arange(24), indexing="ij")
    assert np.max(np.abs(A[(m + n) % 2 == 1])) < 1e-13 * np.max(np.abs(A))
    assert np.max(np.abs(A[(m + n) % 2 == 0])) > 1e-3


def test_reflected_quadratic_is_parity_conjugate():
    N = 24
    R = quadratic_map(3.0)
    flip = Mobius(-1.0, 0.0, 0.0, 1.0)
    A = assemble_galerkin(R, N).matrix
    Af = assemble_galerkin(gauge_transform(R, flip, flip), N).matrix
    P = np.diag((-1.0) ** np.arange(N))
    assert_allclose(Af, P @ A @ P, atol=1e-13)
