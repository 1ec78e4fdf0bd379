"""Monodromy matrices, the invariant quadratic form and the spinor map.

For a spectral parameter lambda the three slot matrices act on
W = (W1, W2, W3) and preserve

    J(W) = W1^2 + W2^2 + W3^2 - delta (W1 W2 + W1 W3 + W2 W3),  delta = 2/(lambda - 1).

The linear change W = K V turns J into V1 V3 - V2^2, whose two rulings give the
coordinates p+ and p-.  Linear fractional maps act on these coordinates
through chi.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegeneratePair, ExcludedParameter, InvariantViolation, OnSingularLocus
from .rational_map import chordal

EPS = cmath.exp(2j * cmath.pi / 3)
GENERATORS = ("D", "D2", "D3")


@dataclass(frozen=True, eq=False)
class MonodromySystem:
    """All lambda-dependent algebraic data."""

    lam: float
    delta: float
    mu: complex
    D: np.ndarray
    D2: np.ndarray
    D3: np.ndarray
    K: np.ndarray
    K_inv: np.ndarray
    eps: complex = EPS

    @property
    def gram(self) -> np.ndarray:
        """Symmetric matrix G with J(W) = W^T G W."""
        return np.eye(3) - 0.5 * self.delta * (np.ones((3, 3)) - np.eye(3))

    def generator(self, which: str) -> np.ndarray:
        try:
            return {"D": self.D, "D2": self.D2, "D3": self.D3}[which]
        except KeyError:
            raise ValueError(f"unknown generator {which!r}; the first slot index is unused") from None


def build(lam: float, verify: bool = True) -> MonodromySystem:
    """Monodromy data for a spectral parameter lambda not in {0, 1, 3}.

    Raises
    ------
    ExcludedParameter
        For lambda in {0, 1, 3}, where delta, K or mu degenerate.
    """
    lam = float(lam)
    for bad in (0.0, 1.0, 3.0):
        if abs(lam - bad) < 1e-12:
            raise ExcludedParameter(f"lambda = {bad:g} is excluded")
    delta = 2.0 / (lam - 1.0)
    mu = cmath.sqrt((3.0 - lam) / (2.0 * lam))
    D = np.array([[-1.0, delta, delta], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    D2 = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    D3 = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    F = np.array([[1, 1, 1], [1, EPS ** 2, EPS], [1, EPS, EPS ** 2]], dtype=complex)
    Pm = np.array([[0, 1 / mu, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
    K = F @ Pm / cmath.sqrt(3 * delta + 6)
    system = MonodromySystem(lam=lam, delta=delta, mu=mu, D=D, D2=D2, D3=D3, K=K,
                             K_inv=np.linalg.inv(K))
    if verify:
        G = system.gram
        for name in GENERATORS:
            M = system.generator(name)
            if np.max(np.abs(M @ M - np.eye(3))) > 1e-12:
                raise InvariantViolation(f"{name} is not an involution")
            if np.max(np.abs(M.T @ G @ M - G)) > 1e-12 * max(1.0, abs(delta)) ** 2:
                raise InvariantViolation(f"{name} does not preserve J")
    return system


def j_eval(system: MonodromySystem, W) -> np.ndarray:
    """J(W) for vectors stacked along the last axis."""
    W = np.asarray(W)
    w1, w2, w3 = W[..., 0], W[..., 1], W[..., 2]
    return w1 * w1 + w2 * w2 + w3 * w3 - system.delta * (w1 * w2 + w1 * w3 + w2 * w3)


def j_scale(system: MonodromySystem, W) -> np.ndarray:
    """Natural magnitude of J(W), used to express residuals relatively."""
    W = np.asarray(W)
    return (1 + abs(system.delta)) * np.sum(np.abs(W) ** 2, axis=-1)


def p_from_w(system: MonodromySystem, W, J0root: complex):
    """Stereographic coordinates (p+, p-) of W on the quadric J = J0.

    p+- = (V2 +- i r)/V1 = V3/(V2 -+ i r), with V = K^{-1} W and r = J0root.
    Of the two expressions the one with the larger denominator is used; if
    both denominators vanish but a numerator does not, the coordinate is
    infinite.

    Raises
    ------
    OnSingularLocus
        If both expressions are of the form 0/0.
    """
    W = np.asarray(W, dtype=complex)
    V = W @ system.K_inv.T
    v1, v2, v3 = V[..., 0], V[..., 1], V[..., 2]
    ir = 1j * np.asarray(J0root, dtype=complex)
    scale = np.sqrt(np.sum(np.abs(V) ** 2, axis=-1)) + np.abs(ir)
    out = []
    for s in (1, -1):
        d1, n1 = v1, v2 + s * ir
        d2, n2 = v2 - s * ir, v3
        tiny = 1e-14 * scale
        pole = (np.abs(d1) <= tiny) & (np.abs(d2) <= tiny)
        if np.any(pole & (np.abs(n1) <= tiny) & (np.abs(n2) <= tiny)):
            raise OnSingularLocus("both expressions for p are of the form 0/0")
        use_first = np.abs(d1) >= np.abs(d2)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(use_first, n1 / np.where(use_first, d1, 1), n2 / np.where(use_first, 1, d2))
        p = np.where(pole, complex(np.inf, 0), p)
        out.append(p if p.ndim else complex(p))
    return out[0], out[1]


def w_from_p(system: MonodromySystem, pp, pm, J0root: complex) -> np.ndarray:
    """Point of the quadric J = J0 with coordinates (p+, p-).

    Raises
    ------
    DegeneratePair
        If p+ = p- (the two rulings coincide).
    """
    pp = np.asarray(pp, dtype=complex)
    pm = np.asarray(pm, dtype=complex)
    ir2 = 2j * np.asarray(J0root, dtype=complex)
    fin_p, fin_m = np.isfinite(pp), np.isfinite(pm)
    if np.any(~fin_p & ~fin_m):
        raise DegeneratePair("both coordinates at infinity")
    ppf = np.where(fin_p, pp, 0)
    pmf = np.where(fin_m, pm, 0)
    diff = ppf - pmf
    if np.any(fin_p & fin_m & (np.abs(diff) <= 1e-14 * (1 + np.abs(ppf)))):
        raise DegeneratePair("p+ and p- coincide")
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = ir2 / np.where(fin_p & fin_m, diff, 1)
        v = np.stack([pref, pref * (ppf + pmf) / 2, pref * ppf * pmf], axis=-1)
    inf_p = np.stack([np.zeros_like(pmf), np.full_like(pmf, 0.5), pmf], axis=-1) * ir2[..., None]
    inf_m = -np.stack([np.zeros_like(ppf), np.full_like(ppf, 0.5), ppf], axis=-1) * ir2[..., None]
    v = np.where((~fin_p)[..., None], inf_p, v)
    v = np.where((~fin_m)[..., None], inf_m, v)
    return v @ system.K.T


@dataclass(frozen=True)
class MobiusC:
    """Complex linear fractional map p -> (a p + b)/(c p + d), an element of PSL2.

    Stored with determinant 1 and the sign fixed so that the first nonzero
    entry has positive real part (positive imaginary part if it is purely
    imaginary).
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        m = np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        scale = np.max(np.abs(m))
        if scale == 0 or abs(det) <= 1e-14 * scale * scale:
            raise ValueError("linear fractional map with vanishing determinant")
        m = m / cmath.sqrt(det)
        flat = m.ravel()
        first = flat[np.flatnonzero(np.abs(flat) > 1e-12 * np.max(np.abs(flat)))[0]]
        if first.real < -1e-14 or (abs(first.real) <= 1e-14 and first.imag < 0):
            m = -m
        for name, v in zip("abcd", m.ravel()):
            object.__setattr__(self, name, complex(v))

    @classmethod
    def from_matrix(cls, m) -> "MobiusC":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MobiusC":
        return cls(1, 0, 0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __call__(self, p):
        p = np.asarray(p, dtype=complex)
        fin = np.isfinite(p)
        pf = np.where(fin, p, 0)
        num = self.a * pf + self.b
        den = self.c * pf + self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            val = num / den
        val = np.where(den == 0, complex(np.inf, 0), val)
        at_inf = self.a / self.c if self.c != 0 else complex(np.inf, 0)
        val = np.where(fin, val, at_inf)
        return val if val.ndim else complex(val)

    def __matmul__(self, other: "MobiusC") -> "MobiusC":
        return MobiusC.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MobiusC":
        return MobiusC(self.d, -self.b, -self.c, self.a)

    def isclose(self, other: "MobiusC", tol: float = 1e-10) -> bool:
        d1 = np.max(np.abs(self.matrix - other.matrix))
        d2 = np.max(np.abs(self.matrix + other.matrix))
        return min(d1, d2) <= tol


def chi_generator(system: MonodromySystem, which: str) -> MobiusC:
    """Image of a slot matrix under chi.

    D -> (mu p - 1)/(p - mu), D2 -> eps^2/p (green slot), D3 -> eps/p (blue slot).
    """
    mu = system.mu
    if which == "D":
        return MobiusC(mu, -1, 1, -mu)
    if which == "D2":
        return MobiusC(0, EPS ** 2, 1, 0)
    if which == "D3":
        return MobiusC(0, EPS, 1, 0)
    raise ValueError(f"unknown generator {which!r}; only D, D2 and D3 occur")


def chi_of_t(system: MonodromySystem, M: MobiusC) -> np.ndarray:
    """3x3 matrix in SO3(J) whose action on (p+, p-) is the map M."""
    a, b, c, d = M.a, M.b, M.c, M.d
    S = np.array([[d * d, 2 * c * d, c * c],
                  [b * d, a * d + b * c, a * c],
                  [b * b, 2 * a * b, a * a]], dtype=complex)
    return system.K @ S @ system.K_inv / (a * d - b * c)


def fixed_points_chi_d(system: MonodromySystem) -> np.ndarray:
    """Roots of p^2 - 2 mu p + 1, the fixed points of chi(D)."""
    return np.roots([1, -2 * system.mu, 1])


# ----------------------------------------------------------------------------
# self-check battery
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    lam: float
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)


@dataclass
class SelfCheckReport:
    records: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def worst(self) -> dict:
        out = {}
        for r in self.records:
            out[r.name] = max(out.get(r.name, 0.0), r.residual)
        return out


def default_lambda_grid(n: int = 50) -> np.ndarray:
    return np.linspace(1.01, 1.99, n)


def _random_sl2(rng) -> MobiusC:
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) > 0.2:
            return MobiusC.from_matrix(m)


def check_system(system: MonodromySystem, rng: np.random.Generator,
                 n_vectors: int = 1000, n_maps: int = 20, tol: float = 1e-10) -> list:
    """Run the identity battery for one system; residuals are relative."""
    lam = system.lam
    recs = []
    I = np.eye(3)
    inv = max(np.max(np.abs(system.generator(g) @ system.generator(g) - I)) for g in GENERATORS)
    recs.append(CheckRecord(lam, "involutivity", float(inv), 1e-13))

    W = rng.normal(size=(n_vectors, 3)) + 1j * rng.normal(size=(n_vectors, 3))
    J = j_eval(system, W)
    scale = j_scale(system, W)
    cons = 0.0
    for g in GENERATORS:
        M = system.generator(g)
        cons = max(cons, float(np.max(np.abs(j_eval(system, W @ M.T) - J) / scale)))
    recs.append(CheckRecord(lam, "j_conservation", cons, 1e-12))

    V = rng.normal(size=(n_vectors, 3)) + 1j * rng.normal(size=(n_vectors, 3))
    KV = V @ system.K.T
    kres = np.abs(j_eval(system, KV) - (V[:, 0] * V[:, 2] - V[:, 1] ** 2))
    recs.append(CheckRecord(lam, "transfer_matrix", float(np.max(kres / np.sum(np.abs(V) ** 2, axis=1))), tol))

    # chi images of generators lift back to the generators up to sign
    lift = 0.0
    for g in GENERATORS:
        T = chi_of_t(system, chi_generator(system, g))
        M = system.generator(g)
        lift = max(lift, min(np.max(np.abs(T - M)), np.max(np.abs(T + M))) / max(1, abs(system.delta)))
    recs.append(CheckRecord(lam, "generator_lift", float(lift), tol))

    # homomorphism on random products of generators
    words = [w for n in (1, 2) for w in itertools.product(GENERATORS, repeat=n)]
    hom = 0.0
    for _ in range(n_maps):
        g = words[rng.integers(len(words))]
        h = words[rng.integers(len(words))]
        chi_g = _word_chi(system, g)
        chi_h = _word_chi(system, h)
        T = chi_of_t(system, chi_g @ chi_h)
        prod = _word_matrix(system, g) @ _word_matrix(system, h)
        nrm = max(1.0, np.max(np.abs(prod)))
        hom = max(hom, min(np.max(np.abs(T - prod)), np.max(np.abs(T + prod))) / nrm)
    recs.append(CheckRecord(lam, "chi_homomorphism", float(hom), tol))

    # transformation rule for SO3(J) elements and for the reversing generators
    Ws = W[:n_maps]
    J0root = np.sqrt(j_eval(system, Ws))
    ptr = 0.0
    for i in range(n_maps):
        M = _random_sl2(rng)
        T = chi_of_t(system, M)
        TW = T @ Ws[i]
        pp, pm = p_from_w(system, Ws[i], J0root[i])
        qp, qm = p_from_w(system, TW, J0root[i])
        ptr = max(ptr, chordal(qp, M(pp)), chordal(qm, M(pm)))
        jT = abs(j_eval(system, TW) - j_eval(system, Ws[i])) / j_scale(system, TW)
        ptr = max(ptr, float(jT))
        for g in GENERATORS:
            GW = system.generator(g) @ Ws[i]
            chi = chi_generator(system, g)
            qp, qm = p_from_w(system, GW, J0root[i])
            ptr = max(ptr, chordal(qp, chi(pm)), chordal(qm, chi(pp)))
    recs.append(CheckRecord(lam, "p_transformation", float(ptr), 1e-9))

    # round trip between W and (p+, p-)
    pp, pm = p_from_w(system, Ws, J0root)
    back = w_from_p(system, pp, pm, J0root)
    rt = np.max(np.abs(back - Ws)) / np.max(np.abs(Ws))
    recs.append(CheckRecord(lam, "w_p_round_trip", float(rt), 1e-9))

    if 1 < lam < 3:
        fp = fixed_points_chi_d(system)
        chi = chi_generator(system, "D")
        res = max(np.max(np.abs(np.abs(fp) - 1)), np.max(np.abs(chi(fp) - fp)))
        recs.append(CheckRecord(lam, "fixed_points_on_unit_circle", float(res), tol))
    return recs


def _word_chi(system, word) -> MobiusC:
    out = MobiusC.identity()
    for g in word:
        out = out @ chi_generator(system, g)
    return out


def _word_matrix(system, word) -> np.ndarray:
    out = np.eye(3)
    for g in word:
        out = out @ system.generator(g)
    return out


def selfcheck(lams=None, seed: int = 0, inject_error: bool = False, **kwargs) -> SelfCheckReport:
    """Run the identity battery over a grid of lambda values.

    Excluded parameters are skipped and noted.  With ``inject_error`` the
    red-slot matrix is given a wrong sign, which the battery must detect.
    """
    lams = default_lambda_grid() if lams is None else np.atleast_1d(np.asarray(lams, dtype=float))
    rng = np.random.default_rng(seed)
    report = SelfCheckReport()
    for lam in lams:
        try:
            system = build(lam, verify=not inject_error)
        except ExcludedParameter as exc:
            report.skipped.append((float(lam), str(exc)))
            continue
        if inject_error:
            D = system.D.copy()
            D[0, 1] = -D[0, 1]
            system = replace(system, D=D)
        report.records.extend(check_system(system, rng, **kwargs))
    return report
