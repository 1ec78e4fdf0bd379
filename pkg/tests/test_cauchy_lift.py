import copy
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from conftest import Instance
from psthree.cauchy_lift import (
    CauchyTransform,
    EigenLift,
    SheetAtlas,
    analyze_pair,
    boundary_residuals,
    bvp_residuals,
    classify,
    const_star,
    interior_points,
    j_constancy,
    kappa_spread,
    map_boundary_residuals,
    mirror_residual,
    phi,
    phi_boundary,
    reconstruct_u,
    reconstruction_error,
    w_vector,
    winding_report,
)
from psthree.errors import (
    AssignmentError,
    ExcludedParameter,
    NotAnEigenpair,
    NotInComponent,
    Unclassified,
)
from psthree.monodromy import j_eval
from psthree.pants import predicted_zero_count, riemann_hurwitz_check
from psthree.rational_map import normalized_cubic, ps3_instance
from psthree.spectral import EigenPair, eigenfunction_eval, zero_report


def _cauchy_oracle(c, x):
    """Adaptive quadrature of int u(t)/(t - x) dt with u = sum c_n sin(n arccos t)."""
    n = np.arange(1, len(c) + 1)

    def u(t):
        return np.sum(c * np.sin(n * np.arccos(t)))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: (u(t) / (t - x)).real, -1, 1, limit=200, epsabs=1e-13)[0]
        im = integrate.quad(lambda t: (u(t) / (t - x)).imag, -1, 1, limit=200, epsabs=1e-13)[0]
    return re + 1j * im


@pytest.fixture(scope="module")
def symmetric_instance():
    """A middle segment of the same map family; its converged pair is of symmetric type."""
    return Instance("a=5 middle", ps3_instance(5.0, segment=(0.3, 0.6)))


# -- Cauchy transform ------------------------------------------------------------------

def test_zero_coefficients_give_constant():
    tr = CauchyTransform(np.zeros(5), 0.7)
    assert_allclose(phi(tr, np.array([2.0, 0.3 + 1j, np.inf])), 0.7, atol=0)


def test_transform_at_infinity_is_the_constant():
    tr = CauchyTransform(np.array([0.4, -1.2, 0.3]), 0.25 - 0.1j)
    assert phi(tr, np.inf) == 0.25 - 0.1j
    assert abs(phi(tr, 1e8) - tr.const) < 1e-7


@pytest.mark.parametrize("x", [2.0, -1.5, 0.3 + 0.4j, -0.8 - 0.05j, 5j])
def test_transform_matches_quadrature(x):
    c = np.array([0.5, -0.3, 0.2, 0.1, -0.05])
    got = phi(CauchyTransform(c, 0.0), x)
    assert_allclose(got, _cauchy_oracle(c, x), rtol=1e-9, atol=1e-11)


def test_sokhotskii_plemelj_jump():
    c = np.random.default_rng(3).normal(size=12) / np.arange(1, 13) ** 2
    tr = CauchyTransform(c, 1.3)
    t = np.linspace(-0.99, 0.99, 57)
    jump = (phi_boundary(tr, t, 1) - phi_boundary(tr, t, -1)) / (2j * np.pi)
    assert_allclose(jump, eigenfunction_eval(c, t), atol=1e-12)


def test_boundary_values_are_limits():
    c = np.array([0.3, 0.1, -0.2])
    tr = CauchyTransform(c, 0.0)
    t = np.linspace(-0.9, 0.9, 7)
    for side in (1, -1):
        assert_allclose(phi(tr, t + side * 1e-9j), phi_boundary(tr, t, side), atol=1e-7)


def test_transform_rejects_points_on_the_cut():
    with pytest.raises(ValueError):
        phi(CauchyTransform(np.ones(2)), np.array([0.5, 3.0]))


# -- const* ---------------------------------------------------------------------------------

def test_const_star_well_defined_for_eigenpairs(ps3_instances):
    for inst in ps3_instances:
        for p in inst.converged:
            assert kappa_spread(p, inst.atlas) < 1e-6
            assert np.isfinite(const_star(p, inst.atlas))


def test_random_vector_is_not_an_eigenpair(instance_a5):
    c = np.random.default_rng(0).normal(size=64) / np.arange(1, 65) ** 2
    fake = EigenPair(lam=instance_a5.converged[0].lam, coefficients=c, residual=0.0)
    assert kappa_spread(fake, instance_a5.atlas) > 1e-2
    with pytest.raises(NotAnEigenpair):
        const_star(fake, instance_a5.atlas)


@pytest.mark.parametrize("lam", [1.0, 3.0])
def test_const_star_excluded_lambda(instance_a5, lam):
    with pytest.raises(ExcludedParameter):
        const_star(instance_a5.converged[0], instance_a5.atlas, lam)


# -- sheet atlas -------------------------------------------------------------------------------

def test_atlas_rejects_inadmissible_map():
    with pytest.raises(NotInComponent):
        SheetAtlas(normalized_cubic(0.4))


@pytest.mark.parametrize("color", ["red", "blue", "green"])
@pytest.mark.parametrize("side", [1, -1])
def test_batched_labels_match_scalar_labels(instance_a5, color, side):
    atlas = instance_a5.atlas
    ys = atlas.slot_points(color, 9)
    x, cut = atlas.real_labels_many(ys, side)
    for i, y in enumerate(ys):
        lab = atlas.real_labels(float(y), side)
        assert_allclose(x[i], lab.x, rtol=1e-9, atol=1e-12)
        assert cut[i] == lab.cut_side


def test_labels_are_preimages(instance_a5):
    atlas = instance_a5.atlas
    for y in interior_points(12, seed=4):
        x = np.array(atlas.labels(y).x)
        assert_allclose(atlas.R(x), y, rtol=1e-10)


def test_red_slot_preimage_on_the_cut(instance_a5):
    atlas = instance_a5.atlas
    x, cut = atlas.real_labels_many(atlas.slot_points("red", 11), 1)
    assert np.all(np.abs(x[:, 0].imag) == 0)
    assert np.all(np.abs(x[:, 0].real) <= 1)
    assert np.all(cut != 0)


def test_batch_across_value_arcs_is_rejected(instance_a5):
    atlas = instance_a5.atlas
    ys = np.concatenate([atlas.slot_points("red", 2), atlas.slot_points("blue", 2)])
    with pytest.raises(AssignmentError):
        atlas.real_labels_many(ys)


def test_lower_half_plane_labels_are_conjugate(instance_a5):
    atlas = instance_a5.atlas
    y = 0.4 + 0.9j
    assert_allclose(atlas.labels(np.conj(y)).x, np.conj(atlas.labels(y).x), atol=0)


# -- lift diagnostics per converged pair ---------------------------------------------------

def _all_converged(instances):
    return [(inst, p) for inst in instances for p in inst.converged]


def test_every_instance_has_antisymmetric_pairs(ps3_instances):
    for inst in ps3_instances:
        assert len(inst.antisymmetric()) >= 1, inst.name


def test_j_constancy(ps3_instances):
    for inst, p in _all_converged(ps3_instances):
        assert j_constancy(inst.lift(p)) < 1e-6, (inst.name, p.index)


def test_boundary_relations(ps3_instances):
    for inst, p in _all_converged(ps3_instances):
        res = boundary_residuals(inst.lift(p))
        assert set(res) == {"red", "blue", "green"}
        assert max(res.values()) < 1e-6, (inst.name, p.index, res)


def test_riemann_hilbert_relations(ps3_instances):
    for inst, p in _all_converged(ps3_instances):
        assert max(bvp_residuals(inst.lift(p)).values()) < 1e-5, (inst.name, p.index)


def test_boundary_values_on_circle_and_lines(ps3_instances):
    for inst in ps3_instances:
        for p in inst.antisymmetric():
            assert max(map_boundary_residuals(inst.lift(p)).values()) < 1e-5, (inst.name, p.index)


def test_mirror_symmetry(ps3_instances):
    for inst in ps3_instances:
        for p in inst.antisymmetric():
            lift = inst.lift(p)
            assert mirror_residual(lift) < 1e-5
            ys = interior_points(16, seed=6)[:8]
            pp, pm = lift.p(ys)
            qp, _ = lift.p(np.conj(ys))
            fin = np.isfinite(qp) & np.isfinite(pm) & (np.abs(pm) > 1e-8)
            assert np.all(np.abs(qp[fin] * np.conj(pm[fin]) - 1) < 1e-6 * (1 + np.abs(qp[fin])))


def test_symmetric_pair_is_classified_and_skips_geometry(symmetric_instance):
    inst = symmetric_instance
    assert inst.converged
    sym = [p for p in inst.converged if inst.lift(p).symmetry == "symmetric"]
    assert sym
    res = inst.analysis(sym[0])
    assert res.passed, res.failed
    assert res.winding is None
    assert any("skipped" in n for n in res.notes)
    assert mirror_residual(inst.lift(sym[0])) < 1e-5
    with pytest.raises(ValueError):
        winding_report(inst.lift(sym[0]))


def test_classify_and_w_vector(instance_a5):
    p = instance_a5.converged[0]
    assert classify(p, instance_a5.atlas) == instance_a5.lift(p).symmetry
    s = w_vector(p, instance_a5.atlas, None, 0.2 + 0.7j)
    lift = instance_a5.lift(p)
    assert_allclose(s.W, lift.W(0.2 + 0.7j), rtol=1e-12)
    assert_allclose(j_eval(lift.system, s.W), lift.J0, rtol=1e-6)


def test_cone_case_is_unclassified(lift_a5):
    lift = copy.copy(lift_a5)
    lift.J0 = 0j
    with pytest.raises(Unclassified):
        lift.symmetry


# -- windings and zero law ---------------------------------------------------------------------

def test_zero_law_and_counting(ps3_instances):
    for inst in ps3_instances:
        for p in inst.antisymmetric():
            w = winding_report(inst.lift(p))
            assert w.S_monotone
            zr = zero_report(p)
            assert not zr.ambiguous
            assert zr.total == w.m + 1 == w.predicted_zeros
            d = w.descriptor()
            assert d is not None
            assert predicted_zero_count(d) == zr.total
            riemann_hurwitz_check(w.d_r, w.d_g, w.d_b, interior_branch=w.fashion == 1,
                                  d_b_minus=w.d_minus if w.d_minus is not None else 1)


def test_windings_are_gauge_invariant(ps3_instances):
    base, gauged = ps3_instances[1], ps3_instances[3]
    for p in base.antisymmetric():
        k = int(np.argmin([abs(q.lam - p.lam) for q in gauged.antisymmetric()]))
        q = gauged.antisymmetric()[k]
        assert abs(q.lam - p.lam) < 1e-7
        assert winding_report(base.lift(p)).m == winding_report(gauged.lift(q)).m


def test_full_analysis_passes(ps3_instances):
    for inst, p in _all_converged(ps3_instances):
        res = inst.analysis(p)
        assert res.passed, (inst.name, p.index, res.failed, res.notes)


def test_analysis_of_non_eigenpair_stops_early(instance_a5):
    c = np.random.default_rng(1).normal(size=64) / np.arange(1, 65) ** 2
    res = analyze_pair(EigenPair(lam=1.5, coefficients=c, residual=0.0), instance_a5.atlas)
    assert res.failed == ["const_star"]
    assert res.symmetry is None


# -- reconstruction --------------------------------------------------------------------------

def test_reconstruction_matches_eigenfunction(ps3_instances):
    for inst in ps3_instances:
        for p in inst.antisymmetric():
            assert reconstruction_error(inst.lift(p)) < 1e-4


def test_mismatched_lambda_fails_reconstruction(instance_a5):
    p = instance_a5.antisymmetric()[0]
    wrong = 1 + 1.05 * (p.lam - 1)
    lift = EigenLift(p, instance_a5.atlas, lam=wrong, check=False)
    assert reconstruction_error(lift) > 1e-2


def test_reconstruction_vanishes_at_the_ends(lift_a5):
    x = np.cos(np.pi * (np.arange(200) + 0.5) / 200)
    rec = reconstruct_u(lift_a5, x=x)
    ref = eigenfunction_eval(lift_a5.pair, x)
    alpha = np.vdot(rec, ref) / np.vdot(rec, rec)
    ends = alpha * reconstruct_u(lift_a5, x=np.array([-1 + 1e-6, 1 - 1e-6]))
    assert np.max(np.abs(ends)) < 1e-2 * np.max(np.abs(ref))


@pytest.mark.parametrize("x", [1.0, -1.0, 1.5])
def test_reconstruction_domain(lift_a5, x):
    with pytest.raises(ValueError):
        reconstruct_u(lift_a5, x=np.array([x]))
