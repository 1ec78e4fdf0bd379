"""Lift of an eigenfunction to its Cauchy transform, the vector W and the coordinates p+-.

Given an eigenpair (lambda, c) of a cubic admissible map R the module builds

* the Cauchy transform Phi(x) = -pi sum c_n J(x)^n + const*,  J(x) = x - sqrt(x^2 - 1),
* the vector W(y) = (Phi(x_1), Phi(x_2), Phi(x_3)) over the pants, where x_s is
  the preimage of y lying in component O_s,
* the invariant J0 = J(W), the coordinates p+(y), p-(y) and the symmetry type,
* boundary residuals, winding numbers along the slots and the reconstruction
  of u from p+-.

Sheet assignment
----------------
On the real axis the labels follow from the real critical structure: real
preimages are labeled by the arc of critical points containing them
((b2, b3) and (b4, b1) belong to O1, (b1, b2) to O2, (b3, b4) to O3).  Over a
(1:2) arc the complex pair consists of x_1 and the preimage that swaps with
it (x_2 on the blue slot, x_3 on the green one), and x_1(y + i0) lies on the
side sign(R') of the real axis.  Off the real axis the labeled roots are
continued along a straight path from a real base point, with step control
that keeps every root much closer to its predecessor than to any other root.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssignmentError,
    AtBranchPoint,
    CountingViolation,
    ExcludedParameter,
    NotAnEigenpair,
    NotInComponent,
    StructureDegenerate,
    Unclassified,
    WindingError,
)
from .monodromy import EPS, MonodromySystem, build, chi_generator, j_eval, j_scale, p_from_w
from .pants import SewingDescriptor, red_slot, predicted_zero_count, riemann_hurwitz_check
from .rational_map import (
    CriticalStructure,
    RationalMap,
    angle,
    chordal,
    validate_ps3_component,
)
from .spectral import EigenPair, eigenfunction_eval, zero_report

TWO_PI = 2 * math.pi
# arc (b_k, b_{k+1}) -> component index (0 for O1, 1 for O2, 2 for O3)
_ARC_COMPONENT = {0: 1, 1: 0, 2: 2, 3: 0}
_PERMS = list(itertools.permutations(range(3)))


# ----------------------------------------------------------------------------
# Cauchy transform
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CauchyTransform:
    """Phi(x) = -pi sum c_n J(x)^n + const."""

    coefficients: np.ndarray
    const: complex = 0.0


def _joukowski_inverse(x: np.ndarray) -> np.ndarray:
    """J(x) = 1/(x + sqrt(x - 1) sqrt(x + 1)), the branch with |J| < 1 off [-1, 1]."""
    with np.errstate(divide="ignore", invalid="ignore"):
        G = x + np.sqrt(x - 1) * np.sqrt(x + 1)
        J = 1 / G
    return np.where(np.isfinite(x), J, 0)


def _series(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """sum_n c_n z^n by Horner's rule."""
    acc = np.zeros_like(z)
    for cn in c[::-1]:
        acc = (acc + cn) * z
    return acc


def _on_cut(x: np.ndarray) -> np.ndarray:
    return np.isfinite(x) & (x.imag == 0) & (np.abs(x.real) <= 1)


def phi(transform: CauchyTransform, x) -> np.ndarray:
    """Phi at points off the cut [-1, 1] (infinity allowed)."""
    x = np.asarray(x, dtype=complex)
    if np.any(_on_cut(x)):
        raise ValueError("point on the cut [-1, 1]; use phi_boundary")
    val = -np.pi * _series(np.asarray(transform.coefficients, dtype=float), _joukowski_inverse(x))
    return val + transform.const


def phi_boundary(transform: CauchyTransform, t, side: int) -> np.ndarray:
    """Boundary values Phi(t + i0 side) on the cut, from J(t +- i0) = exp(-+ i arccos t)."""
    t = np.asarray(t, dtype=float)
    z = np.exp(-1j * side * np.arccos(np.clip(t, -1, 1)))
    return -np.pi * _series(np.asarray(transform.coefficients, dtype=float), z) + transform.const


# ----------------------------------------------------------------------------
# sheet assignment
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledPreimages:
    """Preimages (x_1, x_2, x_3) of a point y; ``cut_side`` is the side of the
    cut on which x_1 sits when it lies on [-1, 1] (0 otherwise)."""

    y: complex
    x: tuple
    cut_side: int = 0


class SheetAtlas:
    """Labeling of preimages by component, shared by all eigenpairs of a map."""

    def __init__(self, R: RationalMap):
        rep = validate_ps3_component(R)
        if not rep.passed:
            raise NotInComponent(f"map is not admissible: {rep.failed}")
        self.R = R
        self.structure: CriticalStructure = rep.structure
        self.sigma = 1 if float(R.derivative(0.0)) > 0 else -1
        self.red = red_slot(R)
        self._cache: dict = {}

    # -- slots ---------------------------------------------------------------
    def slot(self, color: str) -> tuple:
        a = self.structure.a
        return {"red": self.red, "blue": (a[0], a[1]), "green": (a[2], a[3])}[color]

    def slot_points(self, color: str, n: int) -> np.ndarray:
        """n points of a slot, clustered at its ends (Chebyshev-like in the cyclic coordinate)."""
        lo, hi = self.slot(color)
        phi_ = math.pi * (np.arange(n) + 0.5) / n
        return _arc_points(lo, hi, (1 - np.cos(phi_)) / 2)

    # -- real axis -----------------------------------------------------------
    def real_labels(self, y: float, side: int = 1) -> LabeledPreimages:
        """Labeled preimages of y + i0 side for real y off the branch values."""
        cs = self.structure
        k = cs.arc_index_of_value(y)
        roots = self.R.preimages(y)
        out = [None, None, None]
        cut_side = 0
        if k in (1, 3):
            for z in roots:
                if np.isfinite(z) and z.imag != 0:
                    raise AssignmentError(f"complex preimage over a (3:0) value {y!r}")
                comp = _ARC_COMPONENT[cs.arc_index_of_point(z.real if np.isfinite(z) else np.inf)]
                if out[comp] is not None:
                    raise AssignmentError(f"two preimages of {y!r} in one component")
                out[comp] = complex(z)
            x1 = out[0]
            if np.isfinite(x1) and abs(x1.real) <= 1:
                cut_side = side * (1 if float(self.R.derivative(x1.real)) > 0 else -1)
        else:
            real = [z for z in roots if not np.isfinite(z) or z.imag == 0]
            cplx = [z for z in roots if np.isfinite(z) and z.imag != 0]
            if len(real) != 1 or len(cplx) != 2:
                raise AssignmentError(f"unexpected root pattern over the (1:2) value {y!r}")
            r = real[0]
            comp = _ARC_COMPONENT[cs.arc_index_of_point(r.real if np.isfinite(r) else np.inf)]
            partner = 2 if k == 0 else 1  # blue: x3 real, x1 <-> x2; green: x2 real, x1 <-> x3
            if comp != partner:
                raise AssignmentError(f"real preimage of {y!r} lies in the wrong component")
            want = side * self.sigma
            up = [z for z in cplx if np.sign(z.imag) == want][0]
            other = [z for z in cplx if z is not up][0]
            out[partner] = complex(r)
            out[0] = complex(up)
            out[3 - partner] = complex(other)
        return LabeledPreimages(y=complex(y), x=tuple(out), cut_side=cut_side)

    def real_labels_many(self, ys, side: int = 1):
        """Vectorized real_labels for real points of a single value arc.

        Returns the labeled roots with shape (n, 3) and the cut side of x_1
        (0 where x_1 is off the cut).  Rows whose polynomial drops degree
        (y = R(infinity)) go through the scalar path.
        """
        ys = np.asarray(ys, dtype=float)
        cs = self.structure
        ang_a = np.array([angle(v) for v in cs.a])
        k = _arc_index(2 * np.arctan(ys), ang_a)
        if np.any(k != k[0]):
            raise AssignmentError("points of one batch must share a value arc")
        k = int(k[0])
        roots, ok = _batch_roots(self.R, ys)
        out = np.empty((ys.size, 3), dtype=complex)
        cut = np.zeros(ys.size, dtype=int)
        # mirrored coordinates turn downward point arcs into upward ones
        o = -cs.orientation
        ang_b = o * np.array([angle(v) for v in cs.b])
        comp_of_arc = np.array([_ARC_COMPONENT[j] for j in range(4)])
        r = roots[ok]
        if k in (1, 3):
            if np.any(r.imag != 0):
                raise AssignmentError("complex preimage over a (3:0) arc")
            comp = comp_of_arc[_arc_index(o * 2 * np.arctan(r.real), ang_b)]
            if np.any(np.sort(comp, axis=1) != np.arange(3)):
                raise AssignmentError("two preimages in one component")
            lab = np.empty_like(r)
            np.put_along_axis(lab, comp, r, axis=1)
            x1 = lab[:, 0].real
            on = np.abs(x1) <= 1
            c = np.zeros(x1.size, dtype=int)
            c[on] = side * np.where(self.R.derivative(x1[on]) > 0, 1, -1)
            out[ok], cut[ok] = lab, c
        else:
            is_real = r.imag == 0
            if np.any(is_real.sum(axis=1) != 1):
                raise AssignmentError("unexpected root pattern over a (1:2) arc")
            ri = np.argmax(is_real, axis=1)
            rows = np.arange(r.shape[0])
            real_root = r[rows, ri].real
            partner = 2 if k == 0 else 1
            comp = comp_of_arc[_arc_index(o * 2 * np.arctan(real_root), ang_b)]
            if np.any(comp != partner):
                raise AssignmentError("real preimage lies in the wrong component")
            want = side * self.sigma
            im = np.where(is_real, 0.0, r.imag)
            ui = np.argmax(np.sign(im) == want, axis=1)
            oi = 3 - ri - ui
            lab = np.empty_like(r)
            lab[:, partner] = r[rows, ri]
            lab[:, 0] = r[rows, ui]
            lab[:, 3 - partner] = r[rows, oi]
            out[ok] = lab
        for i in np.flatnonzero(~ok):
            lp = self.real_labels(float(ys[i]), side)
            out[i], cut[i] = lp.x, lp.cut_side
        return out, cut

    # -- off the real axis ---------------------------------------------------
    def labels(self, y: complex) -> LabeledPreimages:
        """Labeled preimages of a non-real point y (lower half-plane by conjugation)."""
        y = complex(y)
        if y.imag == 0:
            return self.real_labels(y.real, 1)
        if y.imag < 0:
            up = self.labels(y.conjugate())
            return LabeledPreimages(y=y, x=tuple(np.conj(np.asarray(up.x))))
        key = (y.real, y.imag)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        base = self._base_point(y.real)
        x = np.asarray(self.real_labels(base, 1).x, dtype=complex)
        if base == y.real:
            x = self._track(complex(base), x, y)
        else:
            # near a branch value: go up, across and down, staying off the real axis
            h = max(y.imag, 0.5 * (1 + abs(y.real)), 0.5 * (1 + abs(base)))
            path = [complex(base), complex(base, h), complex(y.real, h), y]
            for y0, y1 in zip(path[:-1], path[1:]):
                x = self._track(y0, x, y1)
        res = LabeledPreimages(y=y, x=tuple(x))
        self._cache[key] = res
        return res

    def _base_point(self, yr: float) -> float:
        a = self.structure.a
        if all(chordal(yr, v) > 0.05 for v in a):
            return yr
        k = None
        for j in range(4):
            if chordal(yr, a[j]) <= 0.05:
                k = j
        lo, hi = a[(k - 1) % 4], a[k]
        cand1 = _arc_points(lo, hi, np.array([0.5]))[0]
        lo, hi = a[k], a[(k + 1) % 4]
        cand2 = _arc_points(lo, hi, np.array([0.5]))[0]
        best = cand1 if chordal(yr, cand1) < chordal(yr, cand2) else cand2
        return float(best)

    def _track(self, y0: complex, x0: np.ndarray, y1: complex) -> np.ndarray:
        s, h = 0.0, 0.125
        x = x0
        while s < 1.0:
            h = min(h, 1.0 - s)
            y = y0 + (s + h) * (y1 - y0)
            r = self.R.preimages(y)
            perm = _match(x, r)
            if perm is None:
                h *= 0.5
                if h < 1e-12:
                    raise AssignmentError(f"continuation to {y1!r} stalled")
                continue
            x = r[list(perm)]
            s += h
            h = min(2 * h, 0.25)
        return x


def _arc_index(theta: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Index k of the cyclic arc (bounds[k], bounds[k+1]) containing each angle."""
    lo = bounds
    span = (np.roll(bounds, -1) - bounds) % TWO_PI
    rel = (np.asarray(theta)[..., None] - lo) % TWO_PI
    inside = (rel > 0) & (rel < span)
    if not np.all(inside.any(axis=-1)):
        raise AtBranchPoint("point coincides with an arc endpoint")
    return np.argmax(inside, axis=-1)


def _batch_roots(R: RationalMap, ys: np.ndarray):
    """Roots of P - y Q for many y at once (companion eigenvalues).

    Returns (roots, ok); rows with ``ok`` False drop degree and are left to the
    scalar solver.  Real targets get the same real-axis snapping as the scalar path.
    """
    d = R.degree
    P = np.pad(R.P, (0, d + 1 - R.P.size))
    Q = np.pad(R.Q, (0, d + 1 - R.Q.size))
    C = P[None, :] - np.asarray(ys)[:, None] * Q[None, :]
    lead = C[:, d]
    ok = np.abs(lead) > 1e-12 * np.max(np.abs(C), axis=1)
    roots = np.full((ys.size, d), np.nan + 0j)
    if np.any(ok):
        mon = C[ok, :d] / lead[ok, None]
        comp = np.zeros((mon.shape[0], d, d), dtype=mon.dtype)
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1
        comp[:, :, -1] = -mon
        r = np.linalg.eigvals(comp).astype(complex)
        if not np.iscomplexobj(ys):
            near = np.abs(r.imag) < 1e-9 * (1 + np.abs(r.real))
            r = np.where(near, r.real + 0j, r)
        roots[ok] = r
    return roots, ok


def _arc_points(lo, hi, frac) -> np.ndarray:
    l = angle(lo)
    span = (angle(hi) - l) % TWO_PI
    th = l + span * np.asarray(frac)
    th = (th + math.pi) % TWO_PI - math.pi
    return np.tan(th / 2)


def _match(x: np.ndarray, r: np.ndarray):
    sep = min(chordal(r[i], r[j]) for i in range(3) for j in range(i + 1, 3))
    best, best_d = None, np.inf
    for perm in _PERMS:
        d = max(chordal(x[i], r[perm[i]]) for i in range(3))
        if d < best_d:
            best, best_d = perm, d
    if best_d < 0.25 * sep:
        return best
    return None


# ----------------------------------------------------------------------------
# per-eigenpair lift
# ----------------------------------------------------------------------------

def _probe_points(n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.cos((2 * j - 1) * np.pi / (2 * n))


def _check_lambda(lam: float) -> None:
    for bad in (1.0, 3.0):
        if abs(lam - bad) < 1e-12:
            raise ExcludedParameter(f"lambda = {bad:g} is excluded")


def kappa_samples(pair: EigenPair, atlas: SheetAtlas, lam: float, n_probes: int = 32):
    """Values of delta (Phi0(x2) + Phi0(x3)) - (Phi0(x+) + Phi0(x-)) at probe points, and their scale."""
    _check_lambda(lam)
    delta = 2.0 / (lam - 1.0)
    c = pair.coefficients
    tr0 = CauchyTransform(c, 0.0)
    n = np.arange(1, c.size + 1)
    kap, scale = [], []
    for x0 in _probe_points(n_probes):
        lab = atlas.real_labels(float(atlas.R(x0)), 1)
        other = phi(tr0, np.array(lab.x[1:]))
        jump = -2 * np.pi * np.sum(c * np.cos(n * math.acos(x0)))
        kap.append(delta * np.sum(other) - jump)
        scale.append(abs(delta) * np.sum(np.abs(other)) + abs(jump))
    return np.array(kap), float(max(scale))


def const_star(pair: EigenPair, R: RationalMap | SheetAtlas, lam: float | None = None,
               n_probes: int = 32, tol: float = 1e-6, check: bool = True) -> complex:
    """Constant of the Cauchy transform: kappa/(2 - 2 delta), kappa being x0-independent.

    Raises
    ------
    NotAnEigenpair
        If the relative spread of kappa over the probes exceeds `tol`.
    ExcludedParameter
        For lambda in {1, 3}.
    """
    atlas = R if isinstance(R, SheetAtlas) else SheetAtlas(R)
    lam = pair.lam if lam is None else float(lam)
    kap, scale = kappa_samples(pair, atlas, lam, n_probes)
    spread = float(np.max(np.abs(kap - np.mean(kap))) / scale) if scale > 0 else 0.0
    if check and spread > tol:
        raise NotAnEigenpair(f"kappa varies by {spread:.3g} (relative) across probes")
    delta = 2.0 / (lam - 1.0)
    return complex(np.mean(kap) / (2 - 2 * delta))


def kappa_spread(pair: EigenPair, R: RationalMap | SheetAtlas, lam: float | None = None,
                 n_probes: int = 32) -> float:
    atlas = R if isinstance(R, SheetAtlas) else SheetAtlas(R)
    lam = pair.lam if lam is None else float(lam)
    kap, scale = kappa_samples(pair, atlas, lam, n_probes)
    return float(np.max(np.abs(kap - np.mean(kap))) / scale) if scale > 0 else 0.0


@dataclass(frozen=True, eq=False)
class WSample:
    y: complex
    W: np.ndarray
    x: tuple


@dataclass(frozen=True)
class StructureSample:
    y: complex
    p_plus: complex
    p_minus: complex


def interior_points(n: int, seed: int = 1, radius: float = 0.9) -> np.ndarray:
    """n/2 points of the upper half-plane (Cayley image of a disc) and their conjugates."""
    rng = np.random.default_rng(seed)
    m = n // 2
    r = radius * np.sqrt(rng.uniform(0, 1, m))
    t = rng.uniform(0, TWO_PI, m)
    z = r * np.exp(1j * t)
    y = 1j * (1 + z) / (1 - z)
    return np.concatenate([y, np.conj(y)])


class EigenLift:
    """Analytic objects attached to one eigenpair.

    Parameters
    ----------
    pair : EigenPair
    R : RationalMap or SheetAtlas
    lam : float, optional
        Spectral parameter used in the algebra (defaults to ``pair.lam``;
        a different value gives the mismatched negative control).
    check : bool
        Verify that const* is well defined.
    """

    def __init__(self, pair: EigenPair, R, lam: float | None = None, check: bool = True,
                 const_tol: float = 1e-6):
        self.atlas = R if isinstance(R, SheetAtlas) else SheetAtlas(R)
        self.pair = pair
        self.lam = pair.lam if lam is None else float(lam)
        self.system: MonodromySystem = build(self.lam)
        self.const = const_star(pair, self.atlas, self.lam, tol=const_tol, check=check)
        self.transform = CauchyTransform(pair.coefficients, self.const)
        self.anchor = self._anchor()
        W0 = self.W(self.anchor)
        self.J0 = complex(j_eval(self.system, W0))
        self.J0_scale = float(j_scale(self.system, W0))
        root = complex(np.sqrt(self.J0))
        if abs(self.J0) > 1e-12 * self.J0_scale:
            pp, pm = p_from_w(self.system, W0, root)
            if _imag(pp) < _imag(pm):
                root = -root
        self.J0root = root

    def _anchor(self) -> complex:
        lo, hi = self.atlas.red
        mid = float(_arc_points(lo, hi, np.array([0.5]))[0])
        half = abs(float(_arc_points(lo, hi, np.array([1.0]))[0]) - mid)
        return complex(mid, 2 * max(1.0, half))

    # -- sampling -------------------------------------------------------------
    def W_labeled(self, lab: LabeledPreimages) -> np.ndarray:
        x = np.asarray(lab.x, dtype=complex)
        out = np.empty(3, dtype=complex)
        if lab.cut_side:
            out[0] = phi_boundary(self.transform, x[0].real, lab.cut_side)
            out[1:] = phi(self.transform, x[1:])
        else:
            out[:] = phi(self.transform, x)
        return out

    def W(self, y: complex, side: int = 1) -> np.ndarray:
        """W at an interior point, or at y + i0 side for real y."""
        y = complex(y)
        lab = self.atlas.real_labels(y.real, side) if y.imag == 0 else self.atlas.labels(y)
        return self.W_labeled(lab)

    def w_sample(self, y: complex, side: int = 1) -> WSample:
        y = complex(y)
        lab = self.atlas.real_labels(y.real, side) if y.imag == 0 else self.atlas.labels(y)
        return WSample(y=y, W=self.W_labeled(lab), x=lab.x)

    def W_many(self, ys, side: int = 1) -> np.ndarray:
        ys = np.atleast_1d(ys)
        if np.iscomplexobj(ys) and np.any(ys.imag != 0):
            return np.array([self.W(y, side) for y in ys])
        x, cut = self.atlas.real_labels_many(np.real(ys), side)
        out = np.empty_like(x)
        on = cut != 0
        out[on, 0] = phi_boundary(self.transform, x[on, 0].real, cut[on])
        out[~on, 0] = phi(self.transform, x[~on, 0])
        out[:, 1:] = phi(self.transform, x[:, 1:])
        return out

    def p(self, ys, side: int = 1):
        W = self.W_many(ys, side)
        return p_from_w(self.system, W, self.J0root)

    def structure_sample(self, y: complex, side: int = 1) -> StructureSample:
        pp, pm = p_from_w(self.system, self.W(y, side), self.J0root)
        return StructureSample(y=complex(y), p_plus=complex(pp), p_minus=complex(pm))

    # -- classification --------------------------------------------------------
    @property
    def symmetry(self) -> str:
        """'antisymmetric' when (delta + 2) J0 < 0, 'symmetric' when positive."""
        if abs(self.J0) <= 1e-10 * self.J0_scale:
            raise Unclassified("J0 vanishes (cone case)")
        s = (self.system.delta + 2) * self.J0.real
        return "antisymmetric" if s < 0 else "symmetric"


def _imag(p) -> float:
    return float(np.imag(p)) if np.isfinite(p) else 0.0


def classify(pair: EigenPair, R, lam: float | None = None) -> str:
    """Symmetry type of an eigenpair from the sign of (delta + 2) J0."""
    return EigenLift(pair, R, lam).symmetry


def w_vector(pair: EigenPair, R, lam: float | None, y: complex) -> WSample:
    return EigenLift(pair, R, lam).w_sample(y)


# ----------------------------------------------------------------------------
# residuals
# ----------------------------------------------------------------------------

SLOT_MATRIX = {"red": "D", "blue": "D3", "green": "D2"}


def j_constancy(lift: EigenLift, n: int = 64, seed: int = 1) -> float:
    """Relative standard deviation of J(W(y)) over interior sample points."""
    Ws = lift.W_many(interior_points(n, seed))
    J = j_eval(lift.system, Ws)
    return float(np.std(J) / abs(np.mean(J)))


def boundary_residuals(lift: EigenLift, n: int = 16, eta: float = 1e-10) -> dict:
    """max |W(y + i eta') - D_* W(y - i eta')| / max |W| on each slot.

    The one-sided values are taken at distance eta' = eta (1 + |y|) from the
    slot through the interior labeling, so the residual also tests that the
    real-axis labels are the limits of the interior ones.
    """
    out = {}
    for color, g in SLOT_MATRIX.items():
        ys = lift.atlas.slot_points(color, n)
        off = 1j * eta * (1 + np.abs(ys))
        Wp = lift.W_many(ys + off)
        Wm = lift.W_many(ys - off)
        M = lift.system.generator(g)
        out[color] = float(np.max(np.abs(Wp - Wm @ M.T)) / np.max(np.abs(np.concatenate([Wp, Wm]))))
    return out


def bvp_residuals(lift: EigenLift, n: int = 16) -> dict:
    """Chordal residual of p+-(y + i0) = chi(D_*) p-+(y - i0) on each slot."""
    out = {}
    for color, g in SLOT_MATRIX.items():
        ys = lift.atlas.slot_points(color, n)
        pp_u, pm_u = lift.p(ys, 1)
        pp_l, pm_l = lift.p(ys, -1)
        chi = chi_generator(lift.system, g)
        r = max(np.max(chordal(pp_u, chi(pm_l))), np.max(chordal(pm_u, chi(pp_l))))
        out[color] = float(r)
    return out


def map_boundary_residuals(lift: EigenLift, n: int = 16) -> dict:
    """Distance of boundary values of p+- from C (red), eps R (green) and eps^2 R (blue)."""
    mu = lift.system.mu
    out = {}
    for color in ("red", "blue", "green"):
        ys = lift.atlas.slot_points(color, n)
        vals = np.concatenate([*lift.p(ys, 1), *lift.p(ys, -1)])
        if color == "red":
            r = np.abs(np.abs(vals - 1 / mu) ** 2 - (1 / mu ** 2 - 1))
        else:
            rot = np.conj(EPS) if color == "green" else np.conj(EPS ** 2)
            fin = np.isfinite(vals)
            v = np.where(fin, vals, 0)
            r = np.where(fin, np.abs(np.imag(rot * v)) / (1 + np.abs(v)), 0.0)
        out[color] = float(np.max(r))
    return out


def mirror_residual(lift: EigenLift, n: int = 16, seed: int = 2) -> float:
    """Chordal residual of p+(conj y) = 1/conj(p-+(y)) at interior points.

    The antisymmetric type pairs p+ with p-; the symmetric type pairs p+ with p+.
    """
    ys = interior_points(2 * n, seed)[:n]
    pp, pm = lift.p(ys)
    qp, _ = lift.p(np.conj(ys))
    partner = pm if lift.symmetry == "antisymmetric" else pp
    with np.errstate(divide="ignore"):
        target = 1 / np.conj(partner)
    return float(np.max(chordal(qp, target)))


# ----------------------------------------------------------------------------
# windings
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotWinding:
    """Turns of p+ along the closed boundary loop of a colored slot."""

    net: int
    forward_turns: float
    backward_turns: float
    reversals: int
    critical_values: tuple


@dataclass(frozen=True)
class WindingReport:
    """Winding data of an antisymmetric eigenpair.

    m is the winding of p around the center of C along both sides of the
    red slot; d_g and d_b are the boundary degrees of the green and blue
    loops (for a fold on a loop, the forward degree d+ with d- = 1).
    """

    m: int
    d_r: int
    d_g: int
    d_b: int
    fashion: int | None
    d_minus: int | None
    green: SlotWinding
    blue: SlotWinding
    samples: int
    S_monotone: bool

    @property
    def predicted_zeros(self) -> int:
        return self.m + 1

    def descriptor(self) -> SewingDescriptor | None:
        if self.fashion is None:
            return None
        h = (None, None)
        src = self.blue if self.fashion == 2 else self.green if self.fashion == 3 else None
        if src is not None and len(src.critical_values) == 2:
            h = tuple(sorted(src.critical_values))
        return SewingDescriptor(fashion=self.fashion, m1=self.d_g - 1, m2=self.d_b - 1,
                                h1=h[0], h2=h[1])


def _red_S(lift: EigenLift, n: int) -> np.ndarray:
    ys = lift.atlas.slot_points("red", n)
    c = 1 / lift.system.mu
    up, _ = lift.p(ys, 1)
    lo, _ = lift.p(ys, -1)
    return np.unwrap(np.angle(lo - c)) - np.unwrap(np.angle(up - c))


def _loop_values(lift: EigenLift, color: str, n: int) -> np.ndarray:
    ys = lift.atlas.slot_points(color, n)
    up, _ = lift.p(ys, 1)
    lo, _ = lift.p(ys[::-1], -1)
    return np.concatenate([up, lo])


def _slot_winding(lift: EigenLift, color: str, n: int) -> SlotWinding:
    rot = np.conj(EPS) if color == "green" else np.conj(EPS ** 2)
    vals = _loop_values(lift, color, n)
    fin = np.isfinite(vals)
    w = np.where(fin, (rot * np.where(fin, vals, 0)).real, np.inf)
    psi = np.unwrap(np.append(2 * np.arctan(w), 2 * np.arctan(w[0])))
    steps = np.diff(psi)
    fwd = float(np.sum(steps[steps > 0]) / TWO_PI)
    bwd = float(-np.sum(steps[steps < 0]) / TWO_PI)
    if fwd < bwd:
        fwd, bwd, steps = bwd, fwd, -steps
    sig = np.sign(steps[np.abs(steps) > 1e-12])
    turn_idx = np.flatnonzero(sig != np.roll(sig, 1))
    crit = ()
    if turn_idx.size:
        big = np.flatnonzero(np.abs(steps) > 1e-12)
        pts = vals[big[turn_idx] % vals.size]
        scale = -EPS ** 2 if color == "blue" else -EPS
        crit = tuple(float((p / scale).real) for p in pts if np.isfinite(p))
    net = int(round(fwd - bwd))
    return SlotWinding(net=abs(net), forward_turns=fwd, backward_turns=bwd,
                       reversals=int(turn_idx.size), critical_values=crit)


def _lift_of(pair, R, lam) -> EigenLift:
    if isinstance(pair, EigenLift):
        return pair
    if R is None:
        raise ValueError("a map (or SheetAtlas) is required")
    return EigenLift(pair, R, lam)


def winding_report(pair, R=None, lam: float | None = None, samples: int = 2048,
                   max_samples: int = 32768) -> WindingReport:
    """Windings of p along the three slots, refined until the integers stabilize.

    `pair` is an EigenPair (with R and optionally lambda) or a prepared EigenLift.

    Raises
    ------
    WindingError
        If S(y) is not monotone at the finest resolution, or the integers do
        not stabilize.
    """
    lift = _lift_of(pair, R, lam)
    if lift.symmetry != "antisymmetric":
        raise ValueError("winding analysis applies to antisymmetric eigenpairs")
    prev = None
    n = samples
    while True:
        S = _red_S(lift, n)
        S = S - S[0]
        direction = np.sign(S[-1]) or 1.0
        mono = bool(np.min(direction * np.diff(S)) > -1e-8)
        m = int(round(abs(S[-1]) / TWO_PI))
        green = _slot_winding(lift, "green", n)
        blue = _slot_winding(lift, "blue", n)
        key = (m, green.net, blue.net, green.reversals, blue.reversals)
        if mono and key == prev:
            break
        prev = key if mono else None
        n *= 2
        if n > max_samples:
            raise WindingError("winding numbers did not stabilize (or S is not monotone)")
    fashion, d_g, d_b, d_minus = _fashion(green, blue)
    return WindingReport(m=m, d_r=m, d_g=d_g, d_b=d_b, fashion=fashion, d_minus=d_minus,
                         green=green, blue=blue, samples=n, S_monotone=mono)


def _fashion(green: SlotWinding, blue: SlotWinding):
    """Fashion from the location of the branch point of p.

    No reversal on either colored loop: the branch point is interior (fashion
    1).  Two reversals on the blue (green) loop: both critical points sit on
    the blue (green) boundary, fashion 2 (3); there the forward degree is
    d+ = floor(forward turns) + 1 and the backward one d- = ceil(backward turns).
    """
    if green.reversals == 0 and blue.reversals == 0:
        return 1, green.net, blue.net, None
    if green.reversals == 0 and blue.reversals == 2:
        return 2, green.net, int(math.floor(blue.forward_turns)) + 1, int(math.ceil(blue.backward_turns))
    if blue.reversals == 0 and green.reversals == 2:
        return 3, int(math.floor(green.forward_turns)) + 1, blue.net, int(math.ceil(green.backward_turns))
    return None, green.net, blue.net, None


# ----------------------------------------------------------------------------
# reconstruction of u from p+-
# ----------------------------------------------------------------------------

def reconstruct_u(pair, R=None, lam: float | None = None, x=None) -> np.ndarray:
    """2 pi u(x) = sqrt((delta + 2) J0/3) (p+ p- - mu (p+ + p-) + 1)/(p+ - p-) at y = R(x) + i0.

    The result carries an arbitrary global complex factor relative to u.
    `pair` is an EigenPair (with R and optionally lambda) or a prepared EigenLift.

    Raises
    ------
    StructureDegenerate
        If p+ = p- at a requested point.
    """
    lift = _lift_of(pair, R, lam)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) >= 1):
        raise ValueError("x must lie in (-1, 1)")
    ys = lift.atlas.R(x)
    pp, pm = lift.p(ys, 1)
    mu = lift.system.mu
    if np.any(np.abs(pp - pm) <= 1e-14 * (1 + np.abs(pp))):
        raise StructureDegenerate("p+ and p- coincide")
    pref = np.sqrt((lift.system.delta + 2) * lift.J0 / 3 + 0j)
    return pref * (pp * pm - mu * (pp + pm) + 1) / (pp - pm) / TWO_PI


def reconstruction_error(lift: EigenLift, n: int = 200) -> float:
    """Relative L2 discrepancy of reconstruct_u against u after optimal scalar alignment."""
    x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    ref = eigenfunction_eval(lift.pair, x)
    rec = reconstruct_u(lift, x=x)
    alpha = np.vdot(rec, ref) / np.vdot(rec, rec)
    return float(np.linalg.norm(ref - alpha * rec) / np.linalg.norm(ref))


# ----------------------------------------------------------------------------
# full per-eigenpair analysis
# ----------------------------------------------------------------------------

DEFAULT_TOLERANCES = {
    "const_star": 1e-6,
    "j_constancy": 1e-6,
    "boundary": 1e-6,
    "bvp": 1e-5,
    "map_boundary": 1e-5,
    "mirror": 1e-5,
    "reconstruction": 1e-4,
}


@dataclass
class PairAnalysis:
    index: int
    lam: float
    symmetry: str | None = None
    J0: complex | None = None
    const_star: complex | None = None
    kappa_spread: float | None = None
    j_spread: float | None = None
    boundary_residuals: dict = field(default_factory=dict)
    bvp_residuals: dict = field(default_factory=dict)
    map_boundary_residuals: dict = field(default_factory=dict)
    mirror_residual: float | None = None
    winding: WindingReport | None = None
    observed_zeros: int | None = None
    predicted_zeros: int | None = None
    reconstruction_error: float | None = None
    descriptor: SewingDescriptor | None = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def failed(self) -> list:
        return [k for k, v in self.checks.items() if not v]

    @property
    def passed(self) -> bool:
        return not self.failed


def analyze_pair(pair: EigenPair, atlas: SheetAtlas, tolerances: dict | None = None) -> PairAnalysis:
    """Run every lift diagnostic on one eigenpair and record named pass/fail checks.

    Symmetric pairs only get J0, classification and the algebraic residuals;
    the geometric suite (windings, zero law, reconstruction) is reserved for
    antisymmetric pairs.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    out = PairAnalysis(index=pair.index, lam=pair.lam)
    out.kappa_spread = kappa_spread(pair, atlas)
    out.checks["const_star"] = out.kappa_spread <= tol["const_star"]
    if not out.checks["const_star"]:
        out.notes.append("kappa is not constant: input is not an eigenpair")
        return out
    lift = EigenLift(pair, atlas, check=False)
    out.const_star = lift.const
    out.J0 = lift.J0
    try:
        out.symmetry = lift.symmetry
    except Unclassified:
        out.symmetry = "unclassified"
        out.checks["classified"] = False
        return out
    out.j_spread = j_constancy(lift)
    out.checks["j_constancy"] = out.j_spread <= tol["j_constancy"]
    out.boundary_residuals = boundary_residuals(lift)
    out.checks["boundary_relations"] = max(out.boundary_residuals.values()) <= tol["boundary"]
    out.bvp_residuals = bvp_residuals(lift)
    out.checks["bvp"] = max(out.bvp_residuals.values()) <= tol["bvp"]
    out.mirror_residual = mirror_residual(lift)
    out.checks["mirror_symmetry"] = out.mirror_residual <= tol["mirror"]
    if out.symmetry != "antisymmetric":
        out.notes.append("symmetric pair: geometric suite skipped")
        return out
    out.checks["locus"] = (1 - 1e-6 <= pair.lam < 2) or abs(pair.lam - 3) <= 1e-3
    out.map_boundary_residuals = map_boundary_residuals(lift)
    out.checks["map_boundary"] = max(out.map_boundary_residuals.values()) <= tol["map_boundary"]
    try:
        w = winding_report(lift)
    except WindingError as exc:
        out.checks["winding"] = False
        out.notes.append(str(exc))
        return out
    out.winding = w
    out.checks["winding"] = w.S_monotone
    zr = zero_report(pair)
    out.observed_zeros = zr.total
    out.predicted_zeros = w.predicted_zeros
    out.checks["zero_law"] = (not zr.ambiguous) and zr.total == w.m + 1
    desc = w.descriptor()
    out.descriptor = desc
    if desc is None:
        out.checks["fashion"] = False
        out.notes.append("branch point location of p could not be determined")
    else:
        out.checks["descriptor_zero_count"] = predicted_zero_count(desc) == zr.total
        try:
            riemann_hurwitz_check(w.d_r, w.d_g, w.d_b, interior_branch=w.fashion == 1,
                                  d_b_minus=w.d_minus if w.d_minus is not None else 1)
            out.checks["riemann_hurwitz"] = True
        except CountingViolation as exc:
            out.checks["riemann_hurwitz"] = False
            out.notes.append(str(exc))
    try:
        out.reconstruction_error = reconstruction_error(lift)
        out.checks["reconstruction"] = out.reconstruction_error <= tol["reconstruction"]
    except StructureDegenerate as exc:
        out.checks["reconstruction"] = False
        out.notes.append(str(exc))
    return out
