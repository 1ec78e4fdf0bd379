"""Real rational maps of degree at most three.

The module provides the `RationalMap` and `Mobius` value types, projective
preimage computation, the critical structure of a cubic map, validation of
the equation's admissible component and the reconstruction of a cubic map
from four prescribed real branch values.

Infinity is a first-class point: it is represented by ``complex(inf, 0)``
(or ``float('inf')`` for real quantities) so that preimage lists always have
exactly ``degree`` entries.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize

from .errors import (
    AtBranchPoint,
    DegenerateMap,
    InvalidGauge,
    NotInComponent,
    ReconstructionFailed,
)

INF = float("inf")

# relative size below which a leading coefficient is treated as an exact zero
_TRIM_RTOL = 1e-13
# roots with |Im| below this (relative) are snapped to the real axis
_REAL_SNAP = 1e-9
_RESULTANT_MIN = 1e-10


# ----------------------------------------------------------------------------
# small projective helpers
# ----------------------------------------------------------------------------

def is_inf(z) -> np.ndarray | bool:
    """Elementwise test for the point at infinity."""
    return ~np.isfinite(z)


def chordal(z, w):
    """Chordal distance on the Riemann sphere (handles infinity)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi, wi = is_inf(z), is_inf(w)
    with np.errstate(invalid="ignore", over="ignore"):
        zf = np.where(zi, 0, z)
        wf = np.where(wi, 0, w)
        both = 2 * np.abs(zf - wf) / np.sqrt((1 + np.abs(zf) ** 2) * (1 + np.abs(wf) ** 2))
        one_z = 2 / np.sqrt(1 + np.abs(wf) ** 2)
        one_w = 2 / np.sqrt(1 + np.abs(zf) ** 2)
    out = np.where(zi & wi, 0.0, np.where(zi, one_z, np.where(wi, one_w, both)))
    return out if out.ndim else float(out)


def angle(y) -> float:
    """Cyclic coordinate 2*arctan(y) on the extended real line, infinity -> pi."""
    if not np.isfinite(y):
        return math.pi
    return 2.0 * math.atan(float(np.real(y)))


def cyclic_between(y, lo, hi) -> bool:
    """True if y lies strictly inside the arc running upward from lo to hi."""
    t, l, h = angle(y), angle(lo), angle(hi)
    two_pi = 2 * math.pi
    return 0.0 < (t - l) % two_pi < (h - l) % two_pi


def arc_midpoint(lo, hi) -> float:
    """Midpoint of the upward arc from lo to hi, measured in the cyclic coordinate."""
    l = angle(lo)
    span = (angle(hi) - l) % (2 * math.pi)
    return _from_angle(l + span / 2)


def _from_angle(phi: float) -> float:
    phi = (phi + math.pi) % (2 * math.pi) - math.pi
    if abs(abs(phi) - math.pi) < 1e-15:
        return INF
    return math.tan(phi / 2)


def _trim(c: np.ndarray, scale: float | None = None) -> np.ndarray:
    c = np.asarray(c)
    c = c.astype(complex if np.iscomplexobj(c) else float)
    if scale is None:
        scale = float(np.max(np.abs(c))) if c.size else 0.0
    k = c.size
    while k > 1 and abs(c[k - 1]) <= _TRIM_RTOL * scale:
        k -= 1
    return c[:k].copy()


def projective_roots(coeffs, degree: int, snap: bool = True) -> np.ndarray:
    """Roots of a polynomial regarded as having formal degree `degree`.

    Missing degree is filled with infinite roots.  With `snap`, roots whose
    imaginary part is below ``1e-9 * (1 + |Re|)`` are moved to the real axis.
    """
    c = _trim(coeffs)
    d = c.size - 1
    if d > degree:
        raise ValueError("polynomial degree exceeds the formal degree")
    if d <= 0:
        if c.size == 0 or c[0] == 0:
            raise DegenerateMap("identically zero polynomial has no finite root set")
        roots = np.empty(0, dtype=complex)
    else:
        roots = np.roots(c[::-1]).astype(complex)
    if snap:
        near = np.abs(roots.imag) < _REAL_SNAP * (1 + np.abs(roots.real))
        roots = np.where(near, roots.real + 0j, roots)
    out = np.concatenate([roots, np.full(degree - d, complex(INF, 0.0))])
    return _sort_points(out)


def _sort_points(z: np.ndarray) -> np.ndarray:
    fin = np.where(np.isfinite(z), z, 0)
    order = np.lexsort((fin.imag, fin.real, ~np.isfinite(z)))
    return z[order]


def _sylvester_resultant(p: np.ndarray, q: np.ndarray) -> float:
    m, n = p.size - 1, q.size - 1
    if m == 0:
        return float(p[0] ** n)
    if n == 0:
        return float(q[0] ** m)
    size = m + n
    S = np.zeros((size, size))
    for i in range(n):
        S[i, i:i + m + 1] = p[::-1]
    for i in range(m):
        S[n + i, i:i + n + 1] = q[::-1]
    return float(np.linalg.det(S))


# ----------------------------------------------------------------------------
# Mobius maps
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Mobius:
    """Real linear fractional map x -> (alpha*x + beta)/(gamma*x + delta)."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        scale = max(abs(self.alpha), abs(self.beta), abs(self.gamma), abs(self.delta))
        if scale == 0 or abs(self.det) <= 1e-14 * scale * scale:
            raise InvalidGauge("Mobius map with vanishing determinant")

    @property
    def det(self) -> float:
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.gamma, self.delta]])

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def affine(cls, scale: float, shift: float) -> "Mobius":
        return cls(scale, shift, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def interval_automorphism(cls, t: float, flip: bool = False) -> "Mobius":
        """Map of [-1, 1] onto itself: x -> (x + t)/(1 + t x), optionally reflected."""
        if not -1 < t < 1:
            raise InvalidGauge("parameter must lie in (-1, 1)")
        s = -1.0 if flip else 1.0
        return cls(s, t, s * t, 1.0)

    @classmethod
    def from_points(cls, src: Sequence[float], dst: Sequence[float]) -> "Mobius":
        """Unique real Mobius map sending three distinct points `src` to `dst`."""
        A = _to_01inf(*src)
        B = _to_01inf(*dst)
        return cls.from_matrix(np.linalg.solve(B, A) * 1.0).normalized()

    def normalized(self) -> "Mobius":
        m = self.matrix / math.sqrt(abs(self.det))
        return Mobius.from_matrix(m)

    def __call__(self, x):
        x = np.asarray(x)
        cplx = np.iscomplexobj(x)
        xv = x.astype(complex)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            num = self.alpha * xv + self.beta
            den = self.gamma * xv + self.delta
            val = num / den
        inf_in = ~np.isfinite(xv)
        at_inf = (self.alpha / self.gamma) if self.gamma != 0 else complex(INF, 0)
        val = np.where(inf_in, at_inf, val)
        val = np.where(~inf_in & (den == 0), complex(INF, 0), val)
        if not cplx:
            val = np.where(np.isfinite(val), val.real, INF).astype(float)
        return val if val.ndim else val[()]

    def compose(self, other: "Mobius") -> "Mobius":
        """self o other."""
        return Mobius.from_matrix(self.matrix @ other.matrix)

    __matmul__ = compose

    def inverse(self) -> "Mobius":
        a, b, c, d = self.alpha, self.beta, self.gamma, self.delta
        return Mobius(d, -b, -c, a)

    def preserves_interval(self, tol: float = 1e-12) -> bool:
        """True if the map sends [-1, 1] onto itself."""
        ends = np.array([self(-1.0), self(1.0)], dtype=float)
        if not np.all(np.isfinite(ends)):
            return False
        if not (abs(ends[0] + ends[1]) < tol and abs(abs(ends[0]) - 1) < tol):
            return False
        if self.gamma != 0 and abs(-self.delta / self.gamma) <= 1:
            return False
        mid = self(0.0)
        return bool(np.isfinite(mid) and abs(mid) < 1)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "delta": self.delta}


def _to_01inf(z1, z2, z3) -> np.ndarray:
    """Matrix of the Mobius map sending (z1, z2, z3) to (0, 1, inf)."""
    f1, f2, f3 = (np.isfinite(z) for z in (z1, z2, z3))
    if f1 and f2 and f3:
        return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=float)
    if not f3:
        return np.array([[1.0, -z1], [0.0, z2 - z1]])
    if not f1:
        return np.array([[0.0, z2 - z3], [1.0, -z3]])
    return np.array([[1.0, -z1], [1.0, -z3]])


# ----------------------------------------------------------------------------
# rational maps
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalMap:
    """Real rational function P/Q with ascending-power coefficient tuples.

    Degrees 1 to 3 are accepted; degree 1 only appears as the identity-like
    degenerate case of the kernel (no extra preimages).
    """

    num: tuple
    den: tuple

    def __post_init__(self):
        p = np.asarray(self.num, dtype=float).ravel()
        q = np.asarray(self.den, dtype=float).ravel()
        if p.size == 0 or q.size == 0:
            raise DegenerateMap("empty coefficient list")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
            raise DegenerateMap("non-finite coefficients")
        scale = max(np.max(np.abs(p)), np.max(np.abs(q)))
        if np.max(np.abs(q)) == 0:
            raise DegenerateMap("zero denominator")
        p, q = _trim(p, scale), _trim(q, scale)
        object.__setattr__(self, "num", tuple(float(v) for v in p))
        object.__setattr__(self, "den", tuple(float(v) for v in q))
        d = max(p.size, q.size) - 1
        if np.max(np.abs(p)) == 0 or d < 1:
            raise DegenerateMap("constant map")
        if d > 3:
            raise DegenerateMap("degree above 3 is not supported")
        pn = p / np.max(np.abs(p))
        qn = q / np.max(np.abs(q))
        if abs(_sylvester_resultant(pn, qn)) <= _RESULTANT_MIN:
            raise DegenerateMap("numerator and denominator share a root")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, d: dict) -> "RationalMap":
        return cls(tuple(d["num"]), tuple(d["den"]))

    def to_dict(self) -> dict:
        return {"num": list(self.num), "den": list(self.den)}

    @classmethod
    def identity(cls) -> "RationalMap":
        return cls((0.0, 1.0), (1.0,))

    # -- basic data ---------------------------------------------------------
    @property
    def P(self) -> np.ndarray:
        return np.asarray(self.num)

    @property
    def Q(self) -> np.ndarray:
        return np.asarray(self.den)

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def _padded(self) -> tuple[np.ndarray, np.ndarray]:
        d = self.degree
        return np.pad(self.P, (0, d + 1 - self.P.size)), np.pad(self.Q, (0, d + 1 - self.Q.size))

    def __call__(self, x):
        """Evaluate R(x); poles (and infinity mapping to infinity) give ``inf``."""
        x = np.asarray(x)
        cplx = np.iscomplexobj(x)
        xv = x.astype(complex)
        inf_in = ~np.isfinite(xv)
        xf = np.where(inf_in, 0, xv)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            pv = npoly.polyval(xf, self.P)
            qv = npoly.polyval(xf, self.Q)
            val = pv / qv
        p, q = self._padded()
        at_inf = p[-1] / q[-1] if q[-1] != 0 else complex(INF, 0)
        val = np.where(qv == 0, complex(INF, 0), val)
        val = np.where(inf_in, at_inf, val)
        if not cplx:
            val = np.where(np.isfinite(val), val.real, INF).astype(float)
        return val if val.ndim else val[()]

    eval = __call__

    def critical_numerator(self) -> np.ndarray:
        """Coefficients of P'Q - PQ' (ascending)."""
        P, Q = self.P, self.Q
        return npoly.polysub(npoly.polymul(npoly.polyder(P), Q), npoly.polymul(P, npoly.polyder(Q)))

    def derivative(self, x):
        """R'(x) for finite x."""
        x = np.asarray(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return npoly.polyval(x, self.critical_numerator()) / npoly.polyval(x, self.Q) ** 2

    def preimages(self, y) -> np.ndarray:
        """All solutions of P(x) = y Q(x), with multiplicity, padded with infinity."""
        if not np.isfinite(y):
            return projective_roots(self.Q, self.degree)
        if np.isreal(y):
            return projective_roots(npoly.polysub(self.P, complex(y).real * self.Q), self.degree)
        return projective_roots(_cpoly_sub(self.P, y, self.Q), self.degree, snap=False)

    # -- composition ----------------------------------------------------------
    def precompose(self, L: Mobius) -> "RationalMap":
        """R o L."""
        d = self.degree
        u = np.array([L.beta, L.alpha])
        v = np.array([L.delta, L.gamma])
        p, q = self._padded()
        pow_u = [np.array([1.0])]
        pow_v = [np.array([1.0])]
        for _ in range(d):
            pow_u.append(npoly.polymul(pow_u[-1], u))
            pow_v.append(npoly.polymul(pow_v[-1], v))
        num = np.zeros(d + 1)
        den = np.zeros(d + 1)
        for j in range(d + 1):
            term = npoly.polymul(pow_u[j], pow_v[d - j])[: d + 1]
            num[: term.size] += p[j] * term
            den[: term.size] += q[j] * term
        return _normalized_map(num, den)

    def postcompose(self, L: Mobius) -> "RationalMap":
        """L o R."""
        p, q = self._padded()
        return _normalized_map(L.alpha * p + L.beta * q, L.gamma * p + L.delta * q)


def _cpoly_sub(P, y, Q):
    n = max(P.size, Q.size)
    return np.pad(P, (0, n - P.size)).astype(complex) - y * np.pad(Q, (0, n - Q.size))


def _normalized_map(num, den) -> RationalMap:
    scale = max(np.max(np.abs(num)), np.max(np.abs(den)))
    return RationalMap(tuple(np.asarray(num) / scale), tuple(np.asarray(den) / scale))


def quadratic_map(C: float) -> RationalMap:
    """The degree-2 map x + (x^2 - 1)/(2C)."""
    return RationalMap((-1.0 / (2 * C), 1.0, 1.0 / (2 * C)), (1.0,))


# ----------------------------------------------------------------------------
# critical structure
# ----------------------------------------------------------------------------

class PointType(enum.Enum):
    """Real-preimage type of a real value under a cubic map."""

    THREE_ZERO = "3:0"
    ONE_TWO = "1:2"


class ComponentLabel(enum.Enum):
    """Components of the lifted pants on the covering sphere."""

    O1 = 1
    O2 = 2
    O3 = 3


def _real_preimage_count(R: RationalMap, y) -> int:
    r = R.preimages(y)
    return int(np.sum(~np.isfinite(r) | (r.imag == 0)))


def _point_type(R: RationalMap, y) -> PointType:
    return PointType.THREE_ZERO if _real_preimage_count(R, y) == 3 else PointType.ONE_TWO


@dataclass(frozen=True)
class CriticalStructure:
    """Labeled branch values a, critical points b and co-preimages c of a cubic map.

    Labels are such that (a1, a2) and (a3, a4) are the (1:2) arcs, taken
    upward along the extended real line, and the anchor value (by default
    R(0)) lies in the (3:0) arc (a2, a3).
    """

    a: tuple
    b: tuple
    c: tuple
    orientation: int = 1

    def arc_index_of_point(self, x) -> int:
        """Index k of the arc from b_{k+1} to b_{k+2} containing a real point x.

        Point arcs run upward when R has degree -1 on the real circle (as the
        normalized cubic does) and downward when the degree is +1.
        """
        for k in range(4):
            lo, hi = self.b[k], self.b[(k + 1) % 4]
            if self.orientation > 0:
                lo, hi = hi, lo
            if cyclic_between(x, lo, hi):
                return k
        raise AtBranchPoint("point coincides with a critical point")

    def arc_index_of_value(self, y) -> int:
        """Index k of the arc (a_{k+1}, a_{k+2}) containing a real value y."""
        for k in range(4):
            if cyclic_between(y, self.a[k], self.a[(k + 1) % 4]):
                return k
        raise AtBranchPoint("value coincides with a branch value")

    def to_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "c": list(self.c),
                "orientation": self.orientation}


def critical_points(R: RationalMap) -> np.ndarray:
    """Critical points (roots of P'Q - PQ', padded with infinity to 2d - 2)."""
    return projective_roots(R.critical_numerator(), 2 * R.degree - 2)


def critical_structure(R: RationalMap, anchor: float | None = None) -> CriticalStructure:
    """Critical structure of a cubic map with four distinct real branch values.

    Parameters
    ----------
    R : RationalMap
        Map of degree 3.
    anchor : float, optional
        Value that must fall in the (3:0) arc (a2, a3).  Defaults to R(0).  When
        the anchor is unusable (at a branch value or inside a (1:2) arc) the
        labeling falls back to a1 being the first start of a (1:2) arc in
        increasing cyclic coordinate, which is the normalized convention
        a = (0, 1, a, inf) for x^2 L(x).

    Raises
    ------
    NotInComponent
        Degree other than 3, complex or coincident critical values, or a
        branch pattern that does not alternate between the two types.
    """
    if R.degree != 3:
        raise NotInComponent("critical structure requires a map of degree 3")
    bs = critical_points(R)
    if np.any(np.isfinite(bs) & (bs.imag != 0)):
        raise NotInComponent("complex critical points")
    bs = np.where(np.isfinite(bs), bs.real, INF).astype(float)
    avals = np.asarray(R(bs), dtype=float)
    for i in range(4):
        for j in range(i + 1, 4):
            if chordal(avals[i], avals[j]) < 1e-9:
                raise NotInComponent("coincident critical values")
    order = np.argsort([angle(v) for v in avals])
    av, bv = avals[order], bs[order]
    types = [_point_type(R, arc_midpoint(av[k], av[(k + 1) % 4])) for k in range(4)]
    if not all(types[k] != types[(k + 1) % 4] for k in range(4)):
        raise NotInComponent("branch arcs do not alternate between (3:0) and (1:2)")

    if anchor is None:
        anchor = float(R(0.0))
    start = None
    if np.isfinite(anchor) and all(chordal(anchor, v) > 1e-9 for v in av):
        for k in range(4):
            if types[k] is PointType.THREE_ZERO and cyclic_between(anchor, av[k], av[(k + 1) % 4]):
                start = (k - 1) % 4
    if start is None:
        start = next(k for k in range(4) if types[k] is PointType.ONE_TWO)
    idx = [(start + i) % 4 for i in range(4)]
    a = tuple(float(av[i]) for i in idx)
    b = tuple(float(bv[i]) for i in idx)

    cs = []
    for a_s, b_s in zip(a, b):
        pre = R.preimages(a_s)
        dist = chordal(pre, b_s)
        simple = pre[int(np.argmax(dist))]
        if np.isfinite(simple) and simple.imag != 0:
            raise NotInComponent("co-preimage is not real")
        cs.append(float(simple.real) if np.isfinite(simple) else INF)
    return CriticalStructure(a=a, b=b, c=tuple(cs), orientation=_circle_degree(R, a[0], a[1]))


def _circle_degree(R: RationalMap, lo: float, hi: float) -> int:
    """Degree of R on the real circle, read off at the single real preimage over a (1:2) arc."""
    y = arc_midpoint(lo, hi)
    pre = R.preimages(y)
    real = [z for z in pre if np.isfinite(z) and z.imag == 0]
    if len(real) != 1:
        raise NotInComponent("(1:2) arc without a unique real preimage")
    return 1 if float(R.derivative(real[0].real)) > 0 else -1


def classify_point(R: RationalMap, y: float, tol: float = 1e-9) -> PointType:
    """Type (3:0) or (1:2) of a real value y under a cubic map."""
    if R.degree != 3:
        raise NotInComponent("point types are defined for cubic maps")
    crit = critical_points(R)
    vals = R(crit.astype(complex))
    if np.any(chordal(vals, complex(y) if np.isfinite(y) else complex(INF, 0)) < tol):
        raise AtBranchPoint(f"value {y!r} is a branch value")
    return _point_type(R, y)


# ----------------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------------

@dataclass
class ComponentReport:
    """Per-condition outcome of the admissible-component validation."""

    checks: dict = field(default_factory=dict)
    messages: dict = field(default_factory=dict)
    structure: CriticalStructure | None = None

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())

    @property
    def failed(self) -> list:
        return [k for k, v in self.checks.items() if not v]


def _nondegenerate_on_interval(R: RationalMap) -> tuple[bool, str]:
    poles = projective_roots(R.Q, max(len(R.den) - 1, 0)) if len(R.den) > 1 else np.empty(0)
    for z in poles:
        if np.isfinite(z) and z.imag == 0 and -1 <= z.real <= 1:
            return False, f"pole at {z.real:.6g} in [-1, 1]"
    W = R.critical_numerator()
    if np.max(np.abs(W)) == 0:
        return False, "derivative vanishes identically"
    zs = projective_roots(W, max(W.size - 1, 0)) if W.size > 1 else np.empty(0)
    for z in zs:
        if np.isfinite(z) and z.imag == 0 and -1 <= z.real <= 1:
            return False, f"R' vanishes at {z.real:.6g}"
    xs = np.cos(np.linspace(0, np.pi, 2001))
    d = R.derivative(xs)
    if not (np.all(d > 0) or np.all(d < 0)):
        return False, "R' changes sign on [-1, 1]"
    return True, ""


def validate_equation_map(R: RationalMap) -> ComponentReport:
    """Conditions making the integral equation well posed for any degree.

    The map must be finite and locally invertible on [-1, 1], and no other
    preimage of a point of R([-1, 1]) may fall on [-1, 1].  Degree-3 maps are
    additionally run through `validate_ps3_component`.
    """
    if R.degree == 3:
        return validate_ps3_component(R)
    rep = ComponentReport()
    ok, msg = _nondegenerate_on_interval(R)
    rep.checks["nondegenerate"] = ok
    if msg:
        rep.messages["nondegenerate"] = msg
    if ok and R.degree == 2:
        xs = np.linspace(-1, 1, 257)
        clash = False
        for x0 in xs:
            pre = R.preimages(R(x0))
            other = pre[np.argsort(np.abs(pre - x0))[1:]]
            if np.any(np.isfinite(other) & (np.abs(other.imag) == 0) & (np.abs(other.real) <= 1)):
                clash = True
                break
        rep.checks["injective_on_interval"] = not clash
        if clash:
            rep.messages["injective_on_interval"] = "another preimage falls on [-1, 1]"
    return rep


def validate_ps3_component(R: RationalMap) -> ComponentReport:
    """Check that a cubic map lies in the admissible component.

    Conditions: degree 3; critical structure exists with branch values off
    ``{-1, 1}``; no critical point in [-1, 1]; [-1, 1] inside the arc
    (b2, b3) free of other critical points; R' nonzero on [-1, 1].
    Every failed condition is reported separately.
    """
    rep = ComponentReport()
    rep.checks["degree"] = R.degree == 3
    if not rep.checks["degree"]:
        rep.messages["degree"] = f"degree {R.degree}, expected 3"
    ok, msg = _nondegenerate_on_interval(R)
    rep.checks["nondegenerate"] = ok
    if msg:
        rep.messages["nondegenerate"] = msg
    if R.degree != 3:
        return rep
    try:
        cs = critical_structure(R)
    except NotInComponent as exc:
        rep.checks["critical_structure"] = False
        rep.messages["critical_structure"] = str(exc)
        return rep
    rep.structure = cs
    rep.checks["critical_structure"] = True
    touching = [a for a in cs.a if np.isfinite(a) and min(abs(a - 1), abs(a + 1)) < 1e-12]
    rep.checks["branch_values_off_endpoints"] = not touching
    if touching:
        rep.messages["branch_values_off_endpoints"] = "a branch value equals -1 or 1"
    inside = [b for b in cs.b if np.isfinite(b) and -1 <= b <= 1]
    rep.checks["critical_points_off_interval"] = not inside
    if inside:
        rep.messages["critical_points_off_interval"] = f"critical point(s) {inside} in [-1, 1]"
    b2, b3 = cs.b[1], cs.b[2]
    others = (cs.b[0], cs.b[3])
    # arc between b2 and b3 that is free of the other critical points
    lo, hi = (b2, b3) if not any(cyclic_between(o, b2, b3) for o in others) else (b3, b2)
    within = all(cyclic_between(x, lo, hi) for x in (-1.0, 0.0, 1.0)) and not inside
    rep.checks["interval_between_b2_b3"] = within
    if not within:
        rep.messages["interval_between_b2_b3"] = "[-1, 1] is not inside the arc (b2, b3)"
    return rep


# ----------------------------------------------------------------------------
# gauges
# ----------------------------------------------------------------------------

def gauge_transform(R: RationalMap, L1: Mobius, L2: Mobius) -> RationalMap:
    """Return L2 o R o L1; both maps must send [-1, 1] onto itself."""
    for name, L in (("L1", L1), ("L2", L2)):
        if not L.preserves_interval():
            raise InvalidGauge(f"{name} does not map [-1, 1] onto itself")
    return R.precompose(L1).postcompose(L2)


# ----------------------------------------------------------------------------
# reconstruction of the cubic map from its branch values
# ----------------------------------------------------------------------------

def b_of_c(c):
    """Critical point b of the normalized cubic as a function of its pole c."""
    return c * (3 * c - 2) / (2 * c - 1)


def a_of_c(c):
    """Branch value a of the normalized cubic as a function of its pole c."""
    return c * (3 * c - 2) ** 3 / (2 * c - 1)


def normalized_cubic(c: float) -> RationalMap:
    """x^2 L(x) with L(x) = 1 + 2(c - 1)(x - 1)/(x - c)."""
    return RationalMap((0.0, 0.0, 2 - 3 * c, 2 * c - 1), (-c, 1.0))


def _rel_close(u, v, tol) -> bool:
    if not np.isfinite(u) or not np.isfinite(v):
        return not np.isfinite(u) and not np.isfinite(v)
    return abs(u - v) <= tol * max(1.0, abs(v))


def reconstruct_from_a(a: float) -> tuple[float, float, RationalMap]:
    """Normalized cubic with critical values {0, 1, a, inf}.

    Returns
    -------
    c, b, Rnorm
        Pole c in (1/3, 1/2), critical point b > 1 and the map x^2 L(x).

    Raises
    ------
    ReconstructionFailed
        If a <= 1 or the a-posteriori check of the critical structure fails.
    """
    if not (np.isfinite(a) and a > 1):
        raise ReconstructionFailed(f"branch value a={a!r} must exceed 1")
    lo, hi = 1 / 3 + 1e-9, 1 / 2 - 1e-9
    f = lambda c: a_of_c(c) - a  # noqa: E731
    if f(lo) >= 0 or f(hi) <= 0:
        raise ReconstructionFailed(f"no pole c in the bracket for a={a!r}")
    c = optimize.bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=400)
    b = b_of_c(c)
    Rn = normalized_cubic(c)
    try:
        cs = critical_structure(Rn)
    except NotInComponent as exc:
        raise ReconstructionFailed(str(exc)) from exc
    ok = (all(_rel_close(u, v, 1e-9) for u, v in zip(cs.a, (0.0, 1.0, a, INF)))
          and all(_rel_close(u, v, 1e-9) for u, v in zip(cs.b, (0.0, 1.0, b, INF))))
    if not ok:
        raise ReconstructionFailed(f"critical structure check failed: {cs}")
    return float(c), float(b), Rn


def _check_cyclic(points: Sequence[float]) -> None:
    ang = [angle(p) for p in points]
    rel = [(t - ang[0]) % (2 * math.pi) for t in ang]
    if len(set(rel)) != 4 or not all(rel[i] < rel[i + 1] for i in range(3)):
        raise ReconstructionFailed("branch values must be distinct and cyclically ordered")


def assemble_full_map(a1: float, a2: float, a3: float, a4: float,
                      red_segment_choice: str = "annulus") -> RationalMap:
    """Cubic map with branch values a1..a4 whose interval [-1, 1] sits in the annulus.

    The normalized map for ``a = L_a(a3)`` is pulled back along an affine
    chart of its increasing branch on (1, b) and pushed forward by the
    inverse of ``L_a``, so that R(-1) = -1 and R(1) = 1.

    Parameters
    ----------
    a1, a2, a3, a4 : float
        Branch values in cyclic order; [-1, 1] must lie in the arc (a2, a3).
    red_segment_choice : {"annulus"}
        Which preimage component carries [-1, 1].  Only the annulus branch is
        supported; the other components are outside the scope of the package.
    """
    if red_segment_choice != "annulus":
        raise ReconstructionFailed("only the annulus preimage component is supported")
    pts = [float(v) for v in (a1, a2, a3, a4)]
    _check_cyclic(pts)
    if not all(cyclic_between(x, pts[1], pts[2]) for x in (-1.0, 0.0, 1.0)):
        raise ReconstructionFailed("[-1, 1] must lie inside the arc (a2, a3)")
    La = Mobius.from_points((pts[0], pts[1], pts[3]), (0.0, 1.0, INF))
    a = float(La(pts[2]))
    c, b, Rn = reconstruct_from_a(a)
    y_lo, y_hi = float(La(-1.0)), float(La(1.0))
    if not (1 < min(y_lo, y_hi) and max(y_lo, y_hi) < a):
        raise ReconstructionFailed("image of [-1, 1] is not inside (1, a)")

    def branch(y):
        return optimize.brentq(lambda s: float(Rn(s)) - y, 1.0, b, xtol=1e-15, rtol=1e-15)

    try:
        s_m, s_p = branch(y_lo), branch(y_hi)
    except ValueError as exc:
        raise ReconstructionFailed("preimage component not found") from exc
    B = Mobius.affine((s_p - s_m) / 2, (s_p + s_m) / 2)
    R = Rn.precompose(B).postcompose(La.inverse())
    cs = critical_structure(R)
    if not all(_rel_close(u, v, 1e-8) for u, v in zip(cs.a, pts)):
        raise ReconstructionFailed(f"round trip mismatch: {cs.a} vs {tuple(pts)}")
    return R


def ps3_instance(a: float, segment: tuple[float, float] = (0.75, 0.97)) -> RationalMap:
    """Admissible cubic map built from the normalized cubic for a given a.

    The interval [-1, 1] is sent affinely onto ``[1 + f1 (b - 1), 1 + f2 (b - 1)]``
    inside the annulus branch (1, b), and the image is rescaled affinely back
    to [-1, 1].
    """
    f1, f2 = segment
    if not 0 < f1 < f2 < 1:
        raise ReconstructionFailed("segment fractions must satisfy 0 < f1 < f2 < 1")
    c, b, Rn = reconstruct_from_a(a)
    s1, s2 = 1 + f1 * (b - 1), 1 + f2 * (b - 1)
    R = Rn.precompose(Mobius.affine((s2 - s1) / 2, (s2 + s1) / 2))
    y1, y2 = float(R(-1.0)), float(R(1.0))
    return R.postcompose(Mobius.affine(2 / (y2 - y1), -(y2 + y1) / (y2 - y1)))


def random_gauge(rng: np.random.Generator, spread: float = 0.6) -> tuple[Mobius, Mobius]:
    """Pair of random interval automorphisms (with random reflections)."""
    t1, t2 = rng.uniform(-spread, spread, size=2)
    f1, f2 = rng.integers(0, 2, size=2).astype(bool)
    return Mobius.interval_automorphism(t1, f1), Mobius.interval_automorphism(t2, f2)


__all__ = [
    "INF", "Mobius", "RationalMap", "CriticalStructure", "ComponentLabel", "PointType",
    "ComponentReport", "chordal", "angle", "cyclic_between", "arc_midpoint",
    "projective_roots", "critical_points", "critical_structure", "classify_point",
    "validate_ps3_component", "validate_equation_map", "gauge_transform",
    "reconstruct_from_a", "assemble_full_map", "ps3_instance", "normalized_cubic",
    "quadratic_map", "a_of_c", "b_of_c", "random_gauge", "is_inf",
]
