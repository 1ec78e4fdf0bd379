"""Eigenpairs of the spectral equation from the Chebyshev-Galerkin discretization.

Projecting the equation onto T_m, m >= 1, removes the unknown constant and
turns it into the matrix eigenproblem  -pi (lambda - 1) (pi/2) c = A c,
so every eigenvalue nu of A yields lambda = 1 - 2 nu / pi^2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import optimize

from .errors import NotInComponent, SolverError
from .quadrature import ChebyshevGrid, assemble_galerkin, smooth_kernel_eval
from .rational_map import RationalMap, validate_equation_map

log = logging.getLogger(__name__)

SYMMETRY_TAGS = ("antisymmetric", "symmetric", "unclassified")


@dataclass(frozen=True)
class SpectralProblem:
    """Discretized equation for a map R at truncation N."""

    R: RationalMap
    N: int
    order: int | None = None

    def __post_init__(self):
        if int(self.N) < 4:
            raise ValueError("truncation N must be at least 4")
        rep = validate_equation_map(self.R)
        if not rep.passed:
            detail = "; ".join(f"{k}: {rep.messages.get(k, 'failed')}" for k in rep.failed)
            raise NotInComponent(f"map is not admissible ({detail})")


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Eigenvalue and Chebyshev coefficients of u = sqrt(1 - t^2) sum c_n U_{n-1}.

    ``residual`` is the maximal equation residual at the probe points divided
    by the sup norm of u.
    """

    lam: float
    coefficients: np.ndarray
    residual: float
    symmetry: str = "unclassified"
    index: int = 0

    @property
    def N(self) -> int:
        return int(self.coefficients.size)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs sorted by |lambda - 1| in decreasing order."""

    pairs: tuple
    N: int
    order: int
    artifacts: tuple = ()
    matrix_norm: float = 0.0

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, k) -> EigenPair:
        return self.pairs[k]

    def with_tags(self, tags: Sequence[str]) -> "Spectrum":
        if len(tags) != len(self.pairs):
            raise ValueError("one tag per eigenpair required")
        for t in tags:
            if t not in SYMMETRY_TAGS:
                raise ValueError(f"unknown symmetry tag {t!r}")
        return replace(self, pairs=tuple(replace(p, symmetry=t) for p, t in zip(self.pairs, tags)))


# ----------------------------------------------------------------------------
# eigenfunctions
# ----------------------------------------------------------------------------

def _coeffs(pair_or_coeffs) -> np.ndarray:
    if isinstance(pair_or_coeffs, EigenPair):
        return pair_or_coeffs.coefficients
    return np.asarray(pair_or_coeffs, dtype=float)


def eigenfunction_eval(pair, x) -> np.ndarray:
    """u(x) = sqrt(1 - x^2) sum c_n U_{n-1}(x) = sum c_n sin(n arccos x)."""
    c = _coeffs(pair)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("eigenfunctions are defined on [-1, 1]")
    th = np.arccos(x)
    return np.sin(np.multiply.outer(th, np.arange(1, c.size + 1))) @ c


def interior_factor_eval(pair, x) -> np.ndarray:
    """sum c_n U_{n-1}(x), the eigenfunction with the endpoint factor removed."""
    c = _coeffs(pair)
    x = np.asarray(x, dtype=float)
    th = np.arccos(np.clip(x, -1, 1))
    n = np.arange(1, c.size + 1)
    s = np.sin(th)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.sin(np.multiply.outer(th, n)) @ c) / s
    # endpoint limits U_{n-1}(+-1) = n (+-1)^{n-1}
    at_one = np.sum(n * c)
    at_minus = np.sum(n * c * (-1.0) ** (n - 1))
    val = np.where(s == 0, np.where(x > 0, at_one, at_minus), val)
    return val


# ----------------------------------------------------------------------------
# solver
# ----------------------------------------------------------------------------

def _normalize(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    v = v.real
    v = v / np.max(np.abs(v))
    first = np.flatnonzero(np.abs(v) > 1e-8)[0]
    return v if v[first] > 0 else -v


def equation_residual(R: RationalMap, lam: float, coeffs: np.ndarray,
                      probes: np.ndarray, order: int) -> np.ndarray:
    """Residual of (lam - 1) PV[u] - S[u] - const at probe points (const fitted)."""
    c = np.asarray(coeffs, dtype=float)
    n = np.arange(1, c.size + 1)
    grid = ChebyshevGrid(N=c.size, order=order)
    th, t = grid.theta, grid.nodes
    u_w = (np.sin(np.outer(th, n)) @ c) * np.sin(th) * (np.pi / order)
    K = smooth_kernel_eval(R, t[None, :], probes[:, None])
    Su = K @ u_w
    pv = -np.pi * (np.cos(np.outer(np.arccos(probes), n)) @ c)
    diff = (lam - 1) * pv - Su
    return diff - np.mean(diff)


def solve(problem: SpectralProblem, n_probes: int = 64, seed: int = 0) -> Spectrum:
    """Eigenpairs of the discretized equation.

    Uses the LAPACK nonsymmetric eigensolver (QR iteration).  Eigenvalues of
    A with imaginary part above 1e-8 ||A|| are discretization artifacts: they
    are logged and stored in ``Spectrum.artifacts`` but not returned as pairs.

    Raises
    ------
    SolverError
        If the eigendecomposition fails or produces non-finite values.
    """
    G = assemble_galerkin(problem.R, problem.N, problem.order)
    A = G.matrix
    normA = float(np.linalg.norm(A, 2))
    try:
        nu, V = scipy.linalg.eig(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(V))):
        raise SolverError("eigendecomposition returned non-finite values")
    lam_all = 1 - 2 * nu / np.pi ** 2
    spurious = np.abs(nu.imag) > 1e-8 * normA
    artifacts = tuple(complex(v) for v in lam_all[spurious])
    if artifacts:
        log.warning("%d complex eigenvalue(s) excluded as discretization artifacts", len(artifacts))
    keep = np.flatnonzero(~spurious)
    lam = lam_all[keep].real
    order = keep[np.lexsort((keep, -np.abs(lam - 1)))]

    rng = np.random.default_rng(seed)
    probes = np.sort(rng.uniform(-0.98, 0.98, n_probes))
    th_fine = np.linspace(0, np.pi, 513)
    n = np.arange(1, problem.N + 1)
    S_fine = np.sin(np.outer(th_fine, n))
    pairs = []
    for i, k in enumerate(order):
        c = _normalize(V[:, k])
        lk = float(lam_all[k].real)
        res = equation_residual(problem.R, lk, c, probes, 2 * G.order)
        unorm = float(np.max(np.abs(S_fine @ c)))
        pairs.append(EigenPair(lam=lk, coefficients=c, residual=float(np.max(np.abs(res)) / unorm),
                               index=i))
    return Spectrum(pairs=tuple(pairs), N=G.N, order=G.order, artifacts=artifacts, matrix_norm=normA)


def compare_spectra(coarse: Spectrum, fine: Spectrum, threshold: float = 1e-4) -> float:
    """Largest change of eigenvalues with |lambda - 1| > threshold between two solves."""
    lf = fine.eigenvalues
    worst = 0.0
    for lam in coarse.eigenvalues:
        if abs(lam - 1) > threshold:
            worst = max(worst, float(np.min(np.abs(lf - lam))) if lf.size else np.inf)
    return worst


def converged_pairs(spectrum: Spectrum, reference: Spectrum, tol: float = 1e-7,
                    threshold: float = 1e-4) -> list:
    """Pairs with |lambda - 1| > threshold that move by less than tol in `reference`."""
    lr = reference.eigenvalues
    out = []
    for p in spectrum.pairs:
        if abs(p.lam - 1) > threshold and lr.size and np.min(np.abs(lr - p.lam)) < tol:
            out.append(p)
    return out


# ----------------------------------------------------------------------------
# zeros, locus, tail
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroReport:
    """Interior zeros of an eigenfunction (endpoint zeros counted separately)."""

    interior: int
    locations: tuple
    ambiguous: bool
    endpoints: int = 2

    @property
    def total(self) -> int:
        return self.interior + self.endpoints


def zero_report(pair, grid_points: int = 4096) -> ZeroReport:
    """Sign changes of sum c_n U_{n-1} on a grid, refined by bracketing."""
    c = _coeffs(pair)
    n = np.arange(1, c.size + 1)
    th = np.pi * (np.arange(grid_points) + 0.5) / grid_points

    def g(theta):
        return np.sin(np.multiply.outer(theta, n)) @ c / np.sin(theta)

    vals = g(th)
    scale = float(np.max(np.abs(vals)))
    sgn = np.sign(vals)
    locs = []
    for k in np.flatnonzero(sgn[:-1] * sgn[1:] < 0):
        root = optimize.brentq(lambda s: float(g(np.array([s]))[0]), th[k], th[k + 1], xtol=1e-14)
        locs.append(float(np.cos(root)))
    tiny = np.abs(vals) < 1e-10 * scale
    ambiguous = False
    for k in np.flatnonzero(tiny):
        lo, hi = max(k - 1, 0), min(k + 1, grid_points - 1)
        if sgn[lo] * sgn[hi] > 0 or sgn[k] == 0:
            ambiguous = True
    if ambiguous:
        log.warning("eigenfunction has a near-zero at a grid node without a sign change")
    return ZeroReport(interior=len(locs), locations=tuple(sorted(locs)), ambiguous=ambiguous)


def count_zeros(pair) -> int:
    """Number of interior zeros on (-1, 1)."""
    return zero_report(pair).interior


@dataclass(frozen=True)
class LocusReport:
    violations: tuple

    @property
    def passed(self) -> bool:
        return not self.violations


def locus_check(spectrum: Spectrum, tol: float = 1e-6, tol3: float = 1e-3) -> LocusReport:
    """Antisymmetric eigenvalues must lie in [1 - tol, 2) or within tol3 of 3."""
    bad = []
    for p in spectrum.pairs:
        if p.symmetry != "antisymmetric":
            continue
        lam = p.lam
        if 1 - tol <= lam < 2 or abs(lam - 3) <= tol3:
            continue
        bad.append((p.index, lam))
    return LocusReport(violations=tuple(bad))


def tail_energy(spectrum: Spectrum) -> float:
    """Sum of (lambda - 1)^2 over the computed eigenvalues."""
    lam = spectrum.eigenvalues
    return float(np.sum((lam - 1) ** 2))
