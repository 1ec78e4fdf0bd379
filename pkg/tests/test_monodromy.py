import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from psthree.errors import DegeneratePair, ExcludedParameter
from psthree.monodromy import (
    EPS,
    GENERATORS,
    MobiusC,
    build,
    chi_generator,
    chi_of_t,
    default_lambda_grid,
    fixed_points_chi_d,
    j_eval,
    j_scale,
    p_from_w,
    selfcheck,
    w_from_p,
)

LAMS = [1.05, 1.5, 1.9, 2.7, 4.0]


def _rand_w(rng, n):
    return rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))


def _rand_pairs(rng, n):
    pp = rng.normal(size=n) + 1j * rng.normal(size=n)
    pm = rng.normal(size=n) + 1j * rng.normal(size=n)
    return pp, pm


def test_build_at_two():
    s = build(2.0)
    assert s.delta == 2.0
    assert_allclose(s.mu, 0.5, rtol=1e-15)


def test_mu_tends_to_one():
    assert abs(build(1 + 1e-9).mu - 1) < 1e-8


@pytest.mark.parametrize("lam", [0.0, 1.0, 3.0])
def test_excluded_parameters(lam):
    with pytest.raises(ExcludedParameter):
        build(lam)


def test_unknown_generator():
    with pytest.raises(ValueError):
        build(2.0).generator("D1")
    with pytest.raises(ValueError):
        chi_generator(build(2.0), "D1")


def test_j_examples():
    s = build(2.0)
    assert j_eval(s, [1, 0, 0]) == 1
    assert j_eval(s, [1, 1, 1]) == -3


@pytest.mark.parametrize("lam", LAMS)
def test_j_conserved_by_generators(lam):
    s = build(lam)
    W = _rand_w(np.random.default_rng(0), 1000)
    for g in GENERATORS:
        M = s.generator(g)
        assert_allclose(M @ M, np.eye(3), atol=1e-13)
        diff = np.abs(j_eval(s, W @ M.T) - j_eval(s, W)) / j_scale(s, W)
        assert np.max(diff) < 1e-12


@pytest.mark.parametrize("lam", LAMS)
def test_transfer_matrix_maps_standard_form(lam):
    s = build(lam)
    V = _rand_w(np.random.default_rng(1), 200)
    assert_allclose(j_eval(s, V @ s.K.T), V[:, 0] * V[:, 2] - V[:, 1] ** 2, atol=1e-11)


@pytest.mark.parametrize("lam", LAMS)
def test_w_p_round_trip(lam):
    s = build(lam)
    rng = np.random.default_rng(2)
    pp, pm = _rand_pairs(rng, 50)
    r = complex(rng.normal(), rng.normal())
    W = w_from_p(s, pp, pm, r)
    assert_allclose(j_eval(s, W), np.full(50, r * r), rtol=1e-10, atol=1e-10)
    qp, qm = p_from_w(s, W, r)
    assert_allclose(qp, pp, rtol=1e-9)
    assert_allclose(qm, pm, rtol=1e-9)


def test_w_from_p_handles_infinite_coordinate():
    s = build(1.5)
    r = 0.7 + 0.2j
    W = w_from_p(s, np.inf, 0.3 - 0.1j, r)
    qp, qm = p_from_w(s, W, r)
    assert np.isinf(qp)
    assert_allclose(qm, 0.3 - 0.1j, rtol=1e-12)


def test_swap_negates_w():
    s = build(1.5)
    pp, pm = _rand_pairs(np.random.default_rng(3), 10)
    r = 0.3 + 1.1j
    assert_allclose(w_from_p(s, pm, pp, r), -w_from_p(s, pp, pm, r), atol=1e-13)


def test_coincident_pair_rejected():
    with pytest.raises(DegeneratePair):
        w_from_p(build(1.5), 0.5 + 0.5j, 0.5 + 0.5j, 1.0)


def test_cone_case_gives_equal_coordinates():
    s = build(1.5)
    # V = (1, v, v^2) has J = 0 in standard form
    v = 0.4 - 0.3j
    W = s.K @ np.array([1, v, v * v])
    assert abs(j_eval(s, W)) < 1e-12
    pp, pm = p_from_w(s, W, 0.0)
    assert_allclose(pp, pm, atol=1e-12)
    assert_allclose(pp, v, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(1.01, 2.99), a=st.complex_numbers(max_magnitude=3, allow_nan=False),
       b=st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_p_from_w_formulas_agree(lam, a, b):
    """Both expressions of each coordinate give the same value on the quadric."""
    s = build(lam)
    if abs(a - b) < 1e-3:
        return
    r = 0.8 - 0.6j
    W = w_from_p(s, a, b, r)
    V = s.K_inv @ W
    size = np.max(np.abs(V)) + abs(r)
    for sign, ref in ((1, a), (-1, b)):
        scale = 1 + abs(ref)
        for num, den in ((V[1] + sign * 1j * r, V[0]), (V[2], V[1] - sign * 1j * r)):
            if abs(den) > 1e-6 * size:  # the other expression is 0/0 there
                assert abs(num / den - ref) / scale < 1e-8


# -- chi ---------------------------------------------------------------------------------

def test_chi_d_pole_at_mu():
    s = build(1.5)
    assert np.isinf(chi_generator(s, "D")(s.mu))


@pytest.mark.parametrize("g", GENERATORS)
def test_chi_generators_involutive(g):
    s = build(1.7)
    chi = chi_generator(s, g)
    assert (chi @ chi).isclose(MobiusC.identity())


def test_green_blue_product_is_rotation():
    s = build(1.7)
    rot = chi_generator(s, "D2") @ chi_generator(s, "D3")
    p = np.array([0.3 + 0.2j, -1.1 + 0.5j, 2.0])
    assert_allclose(rot(p), EPS * p, rtol=1e-14)
    assert (rot @ rot @ rot).isclose(MobiusC.identity())
    T = chi_of_t(s, rot)
    prod = s.D2 @ s.D3
    assert min(np.max(np.abs(T - prod)), np.max(np.abs(T + prod))) < 1e-12


def test_chi_of_identity():
    assert_allclose(chi_of_t(build(1.5), MobiusC.identity()), np.eye(3), atol=1e-14)


@pytest.mark.parametrize("g", GENERATORS)
@pytest.mark.parametrize("lam", LAMS)
def test_chi_lifts_back_to_generator(g, lam):
    s = build(lam)
    T = chi_of_t(s, chi_generator(s, g))
    M = s.generator(g)
    assert min(np.max(np.abs(T - M)), np.max(np.abs(T + M))) < 1e-10 * max(1, abs(s.delta))


@pytest.mark.parametrize("lam", LAMS)
def test_chi_of_t_preserves_J(lam):
    s = build(lam)
    rng = np.random.default_rng(5)
    for _ in range(100):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) < 0.2:
            continue
        T = chi_of_t(s, MobiusC.from_matrix(m))
        W = _rand_w(rng, 1)[0]
        assert abs(j_eval(s, T @ W) - j_eval(s, W)) / j_scale(s, T @ W) < 1e-10


def test_mobius_normalization():
    M = MobiusC(2, 0, 0, 0.5)
    assert_allclose([M.a, M.d], [2, 0.5])
    N = MobiusC(-4, 0, 0, -1)
    assert N.a.real > 0
    assert_allclose(N.a * N.d - N.b * N.c, 1)
    with pytest.raises(ValueError):
        MobiusC(1, 2, 2, 4)


def test_mobius_inverse_and_infinity():
    M = MobiusC(1, 2, 3, 7)
    p = 0.4 + 0.9j
    assert_allclose(M.inverse()(M(p)), p, rtol=1e-14)
    assert_allclose(M(np.inf), 1 / 3, rtol=1e-14)


@pytest.mark.parametrize("lam", [1.2, 1.5, 1.99, 2.5])
def test_fixed_points_of_chi_d(lam):
    s = build(lam)
    fp = fixed_points_chi_d(s)
    assert_allclose(fp * fp - 2 * s.mu * fp + 1, 0, atol=1e-13)
    assert_allclose(np.abs(fp), 1, atol=1e-13)
    assert_allclose(chi_generator(s, "D")(fp), fp, atol=1e-12)


# -- battery --------------------------------------------------------------------------

def test_selfcheck_default_grid_passes():
    rep = selfcheck()
    assert rep.passed, rep.failures[:3]
    assert len({r.lam for r in rep.records}) == 50
    assert not rep.skipped


def test_selfcheck_skips_excluded_values():
    rep = selfcheck([1.5, 3.0, 1.0])
    assert [lam for lam, _ in rep.skipped] == [3.0, 1.0]
    assert rep.passed


def test_selfcheck_detects_injected_error():
    rep = selfcheck([1.5, 1.8], inject_error=True)
    assert not rep.passed
    # a sign flip in the first row keeps D involutive but breaks the form
    assert "j_conservation" in {r.name for r in rep.failures}


def test_selfcheck_is_reproducible():
    a = selfcheck(default_lambda_grid(5), seed=3).worst()
    b = selfcheck(default_lambda_grid(5), seed=3).worst()
    assert a == b


def test_eps_is_cube_root_of_unity():
    assert abs(EPS ** 3 - 1) < 1e-15
    assert abs(EPS - cmath.exp(2j * cmath.pi / 3)) == 0


def test_zero_vector_is_on_the_singular_locus():
    from psthree.errors import OnSingularLocus

    with pytest.raises(OnSingularLocus):
        p_from_w(build(1.5), np.zeros(3), 0.0)
