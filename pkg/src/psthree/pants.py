"""Pants with colored slots, their moduli, the circle/annulus data and counting laws.

A map R in the admissible component determines a sphere with three real
slots: red [-1, 1], blue [a1, a2] and green [a3, a4].  Its conformal class
has three real moduli; here they are the images of a2, a3, a4 under the
real Mobius map sending (r1, r2, a1) to (-1, 1, 0), (r1, r2) being the red slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CountingViolation, InvalidPants, NotInComponent
from .rational_map import Mobius, RationalMap, angle, validate_ps3_component

TWO_PI = 2 * math.pi
FASHIONS = (1, 2, 3, 12, 13)


def _fmt(v: float) -> float | str:
    return v if math.isfinite(v) else "inf"


def red_slot(R: RationalMap) -> tuple:
    """Image arc R([-1, 1]) oriented upward in the cyclic coordinate."""
    lo, hi = float(R(-1.0)), float(R(1.0))
    return (lo, hi) if float(R.derivative(0.0)) > 0 else (hi, lo)


@dataclass(frozen=True)
class PantsClass:
    """Three disjoint arcs of the extended real line: red, blue (a1, a2), green (a3, a4).

    Arcs run upward in the cyclic coordinate 2 arctan(y) from their first to
    their second endpoint.  The red slot is (-1, 1) unless given otherwise.
    """

    a1: float
    a2: float
    a3: float
    a4: float
    red: tuple = (-1.0, 1.0)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "red", tuple(float(v) for v in self.red))
        pts = self.endpoints
        ang = np.array([angle(p) for p in pts])
        for i in range(6):
            for j in range(i + 1, 6):
                if abs((ang[i] - ang[j] + math.pi) % TWO_PI - math.pi) < 1e-14:
                    raise InvalidPants("slot endpoints must be distinct")
        for name, (lo, hi) in self.slots.items():
            span = (angle(hi) - angle(lo)) % TWO_PI
            for p in pts:
                if 0 < (angle(p) - angle(lo)) % TWO_PI < span:
                    raise InvalidPants(f"{name} slot overlaps another slot")

    @property
    def slots(self) -> dict:
        return {"red": self.red, "blue": (self.a1, self.a2), "green": (self.a3, self.a4)}

    @property
    def endpoints(self) -> tuple:
        return (*self.red, self.a1, self.a2, self.a3, self.a4)

    def transformed(self, L: Mobius) -> "PantsClass":
        """Image under an orientation preserving real Mobius map."""
        if L.det <= 0:
            raise InvalidPants("only orientation preserving maps act on colored pants")
        img = [float(L(v)) for v in self.endpoints]
        return PantsClass(*img[2:], red=(img[0], img[1]))

    def to_dict(self) -> dict:
        return {"red": [_fmt(v) for v in self.red], "blue": [_fmt(self.a1), _fmt(self.a2)],
                "green": [_fmt(self.a3), _fmt(self.a4)]}


def pants_of(R: RationalMap) -> PantsClass:
    """Pants determined by an admissible map (red slot R([-1, 1])).

    Raises
    ------
    NotInComponent
        If the map fails the admissibility checks.
    InvalidPants
        If the slots are not disjoint.
    """
    rep = validate_ps3_component(R)
    if not rep.passed:
        raise NotInComponent(f"map is not admissible: {rep.failed}")
    return PantsClass(*rep.structure.a, red=red_slot(R))


@dataclass(frozen=True)
class ModuliTriple:
    """Images of (a2, a3, a4) under the real Mobius map (r1, r2, a1) -> (-1, 1, 0), red = (r1, r2)."""

    values: tuple

    def to_dict(self) -> dict:
        return {"moduli": [_fmt(v) for v in self.values]}


def moduli(P: PantsClass) -> ModuliTriple:
    L = Mobius.from_points((*P.red, P.a1), (-1.0, 1.0, 0.0))
    return ModuliTriple(values=tuple(float(L(v)) for v in (P.a2, P.a3, P.a4)))


def equivalent(P1: PantsClass, P2: PantsClass, rtol: float = 1e-8) -> bool:
    """Same conformal class with colors, compared through the moduli (relative tolerance per entry)."""
    for u, v in zip(moduli(P1).values, moduli(P2).values):
        if math.isinf(u) or math.isinf(v):
            if not (math.isinf(u) and math.isinf(v)):
                return False
            continue
        if abs(u - v) > rtol * max(1.0, abs(u), abs(v)):
            return False
    return True


# ----------------------------------------------------------------------------
# circle and annulus
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleData:
    """Circle C = {|p - 1/mu|^2 = 1/mu^2 - 1} and the lines eps R, eps^2 R.

    The annulus alpha is bounded by eps R and C, its mirror image by eps^2 R
    and C.  ``certificate`` is the distance from the center to the lines minus
    the radius; it is positive exactly when C misses both lines.
    """

    lam: float
    mu: float
    center: float
    radius: float
    certificate: float

    @property
    def disjoint(self) -> bool:
        return self.certificate > 0

    def in_alpha(self, p: complex) -> bool:
        """p lies between the line eps R and C: on the side of the line facing C, outside C."""
        p = complex(p)
        outside = abs(p - self.center) > self.radius
        return bool(outside and (p * np.exp(-2j * np.pi / 3)).imag < 0)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "center": self.center, "radius": self.radius,
                "certificate": self.certificate, "disjoint": self.disjoint}


def circle_data(lam: float) -> CircleData:
    """Circle data for lambda in (1, 3); the certificate is reported, not enforced."""
    lam = float(lam)
    if not 1 < lam < 3:
        raise ValueError("lambda must lie in (1, 3) for a real circle")
    mu = math.sqrt((3 - lam) / (2 * lam))
    center = 1 / mu
    radius = math.sqrt(max(center * center - 1, 0.0))
    cert = center * math.sin(math.pi / 3) - radius
    return CircleData(lam=lam, mu=mu, center=center, radius=radius, certificate=cert)


# ----------------------------------------------------------------------------
# sewing descriptors and counting
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SewingDescriptor:
    """Combinatorial label of a sewn pants.

    fashion 1 has an interior branch point h = h1 + i h2; fashions 2 and 3 have
    two boundary critical values 0 < h1 < h2; the intermediate fashions 12
    and 13 have a single h.  m1, m2 >= 0 count extra sheets.
    """

    fashion: int
    m1: int
    m2: int
    h1: float | None = None
    h2: float | None = None

    def __post_init__(self):
        if self.fashion not in FASHIONS:
            raise ValueError(f"fashion must be one of {FASHIONS}")
        if self.m1 < 0 or self.m2 < 0:
            raise ValueError("m1, m2 must be nonnegative")
        if self.fashion in (2, 3) and self.h1 is not None and self.h2 is not None:
            if not 0 < self.h1 < self.h2:
                raise ValueError("boundary critical values must satisfy 0 < h1 < h2")

    def adjacent(self) -> "SewingDescriptor":
        """Identify an intermediate fashion with its neighbour: 12 -> 2 (m2 + 1), 13 -> 3 (m1 + 1)."""
        if self.fashion == 12:
            return SewingDescriptor(2, self.m1, self.m2 + 1, self.h1, self.h2)
        if self.fashion == 13:
            return SewingDescriptor(3, self.m1 + 1, self.m2, self.h1, self.h2)
        return self

    def to_dict(self) -> dict:
        return {"fashion": self.fashion, "m1": self.m1, "m2": self.m2, "h1": self.h1, "h2": self.h2}


def predicted_zero_count(d: SewingDescriptor) -> int:
    """Zeros of the eigenfunction on [-1, 1], endpoints included."""
    d = d.adjacent()
    return d.m1 + d.m2 + (3 if d.fashion == 1 else 2)


@dataclass(frozen=True)
class CountingReport:
    N: int
    interior_branch: bool
    d_r: int
    d_g: int
    d_b: int
    d_b_minus: int | None = None


def riemann_hurwitz_check(d_r: int, d_g: int, d_b: int, interior_branch: bool = True,
                          d_b_minus: int = 1) -> CountingReport:
    """Degree identities of the covering by the sewn surface.

    Interior branch point: d_r + d_g + d_b = 2N with d_r = d_g + d_b = N.
    Boundary critical points: d_r + d_g + d_b + d_b_minus = 2N with
    d_r + d_b_minus = d_g + d_b = N and d_b_minus = 1 (d_b is the forward degree).

    Raises
    ------
    CountingViolation
        If an identity fails.
    """
    for v in (d_r, d_g, d_b):
        if int(v) != v or v < 1:
            raise CountingViolation("degrees must be positive integers")
    if interior_branch:
        N = d_r
        if d_g + d_b != N:
            raise CountingViolation(f"d_r = {d_r} differs from d_g + d_b = {d_g + d_b}")
        return CountingReport(N=N, interior_branch=True, d_r=d_r, d_g=d_g, d_b=d_b)
    if d_b_minus != 1:
        raise CountingViolation(f"backward degree d_b- = {d_b_minus}, expected 1")
    N = d_g + d_b
    if d_r + d_b_minus != N or d_r + d_g + d_b + d_b_minus != 2 * N:
        raise CountingViolation(f"d_r + d_b- = {d_r + d_b_minus} differs from d_g + d_b+ = {N}")
    return CountingReport(N=N, interior_branch=False, d_r=d_r, d_g=d_g, d_b=d_b, d_b_minus=d_b_minus)


@dataclass(frozen=True)
class HyperellipticData:
    """Branch points of the double of the pants: y^2 = (x^2 - 1) prod (x - a_s), infinity dropped."""

    points: tuple

    @classmethod
    def of(cls, P: PantsClass) -> "HyperellipticData":
        return cls(points=tuple(sorted(P.endpoints, key=lambda v: (math.isinf(v), v))))

    def matches(self, P: PantsClass) -> bool:
        return sorted(self.points, key=lambda v: (math.isinf(v), v)) == sorted(
            P.endpoints, key=lambda v: (math.isinf(v), v))


__all__ = [
    "PantsClass", "ModuliTriple", "CircleData", "SewingDescriptor", "HyperellipticData",
    "CountingReport", "pants_of", "moduli", "equivalent", "circle_data",
    "predicted_zero_count", "riemann_hurwitz_check", "red_slot",
]
