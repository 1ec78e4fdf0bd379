"""Chebyshev machinery and the Galerkin matrix of the smooth kernel.

The trial space is u(t) = sqrt(1 - t^2) * sum_n c_n U_{n-1}(t).  The
principal-value operator is diagonal in it,

    PV int sqrt(1 - t^2) U_{n-1}(t) / (t - x) dt = -pi T_n(x),

and the remaining part of the kernel,

    kappa(t, x) = R'(t)/(R(t) - R(x)) - 1/(t - x),

is smooth on [-1, 1]^2 for admissible maps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import KernelError
from .rational_map import RationalMap


@dataclass(frozen=True)
class ChebyshevGrid:
    """Gauss-Chebyshev (first kind) nodes of order N' for weight 1/sqrt(1 - x^2).

    Attributes
    ----------
    N : int
        Truncation the grid serves; the default order is ``2N + 16``.
    order : int
        Number of nodes N'.
    """

    N: int
    order: int

    @classmethod
    def for_truncation(cls, N: int, order: int | None = None) -> "ChebyshevGrid":
        if N < 1:
            raise ValueError("N must be positive")
        order = 2 * N + 16 if order is None else int(order)
        if order < 2 * N + 8:
            raise ValueError("quadrature order must be at least 2N + 8")
        return cls(N=int(N), order=order)

    @property
    def theta(self) -> np.ndarray:
        j = np.arange(1, self.order + 1)
        return (2 * j - 1) * np.pi / (2 * self.order)

    @property
    def nodes(self) -> np.ndarray:
        return np.cos(self.theta)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.order, np.pi / self.order)


def chebyshev_T(n, x):
    """T_n(x) for |x| <= 1 (broadcasting over n and x)."""
    return np.cos(np.multiply.outer(np.arccos(np.clip(x, -1, 1)), np.asarray(n)))


def pv_cauchy_of_basis(n: int, x):
    """PV integral of sqrt(1 - t^2) U_{n-1}(t)/(t - x) over (-1, 1), i.e. -pi T_n(x)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = np.asarray(x, dtype=float)
    return -np.pi * np.cos(n * np.arccos(x))


def _deflated(R: RationalMap, x: np.ndarray):
    """Coefficients of M(s, x) = (P(s)Q(x) - P(x)Q(s))/(s - x) for each x.

    Returns an array of shape ``x.shape + (d,)`` with ascending powers of s.
    """
    d = R.degree
    P = np.pad(R.P, (0, d + 1 - R.P.size))
    Q = np.pad(R.Q, (0, d + 1 - R.Q.size))
    Px = npoly.polyval(x, R.P)[..., None]
    Qx = npoly.polyval(x, R.Q)[..., None]
    Ncoef = P * Qx - Px * Q  # N(s) = P(s)Q(x) - P(x)Q(s), vanishing at s = x
    M = np.zeros(x.shape + (d,))
    M[..., d - 1] = Ncoef[..., d]
    for k in range(d - 1, 0, -1):
        M[..., k - 1] = Ncoef[..., k] + x * M[..., k]
    return M


def smooth_kernel_eval(R: RationalMap, t, x) -> np.ndarray:
    """kappa(t, x) = sum over non-identity preimages x_k of R(x) of 1/(t - x_k), minus Q'(t)/Q(t).

    Evaluated without root finding: the polynomial N(s) = P(s)Q(x) - P(x)Q(s)
    has roots x and x_k, so after synthetic division by (s - x) the quotient M
    gives sum_k 1/(t - x_k) = M_s(t)/M(t).  Infinite preimages drop out
    automatically through the degree of M.  Broadcasts over t and x.

    Raises
    ------
    KernelError
        If the kernel is not finite at a requested point.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    t, x = np.broadcast_arrays(t, x)
    M = _deflated(R, x)
    powers = t[..., None] ** np.arange(M.shape[-1])
    Mv = np.sum(M * powers, axis=-1)
    dM = M[..., 1:] * np.arange(1, M.shape[-1])
    Mdv = np.sum(dM * powers[..., : dM.shape[-1]], axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        kap = Mdv / Mv
        if R.Q.size > 1:
            kap = kap - npoly.polyval(t, npoly.polyder(R.Q)) / npoly.polyval(t, R.Q)
    if not np.all(np.isfinite(kap)):
        raise KernelError("smooth kernel is singular at some (t, x)")
    return kap


def smooth_kernel_from_preimages(R: RationalMap, t, x: float) -> np.ndarray:
    """Reference evaluation of kappa(., x) from explicitly computed preimages."""
    t = np.asarray(t, dtype=float)
    pre = R.preimages(float(R(x)))
    if not np.all(np.isfinite(pre[np.isfinite(pre)])):
        raise KernelError("preimage solve failed")
    k = int(np.argmin(np.where(np.isfinite(pre), np.abs(pre - x), np.inf)))
    others = np.delete(pre, k)
    others = others[np.isfinite(others)]
    total = np.zeros(t.shape, dtype=complex)
    for z in others:
        total = total + 1.0 / (t - z)
    if R.Q.size > 1:
        total = total - npoly.polyval(t, npoly.polyder(R.Q)) / npoly.polyval(t, R.Q)
    return total


def full_kernel(R: RationalMap, t, x):
    """R'(t)/(R(t) - R(x))."""
    return R.derivative(t) / (R(t) - R(x))


@dataclass(frozen=True)
class GalerkinMatrix:
    """Projected smooth-kernel operator.

    ``matrix[m-1, n-1]`` approximates the weighted inner product of T_m with
    the smooth-kernel image of sqrt(1 - t^2) U_{n-1}(t).
    """

    matrix: np.ndarray
    N: int
    order: int


def assemble_galerkin(R: RationalMap, N: int, order: int | None = None) -> GalerkinMatrix:
    """Tensor Gauss-Chebyshev assembly of the smooth-kernel Galerkin matrix.

    A_mn = (pi/N')^2 sum_ij T_m(x_i) kappa(t_j, x_i) sin(theta_j) sin(n theta_j),
    using sqrt(1 - t^2) U_{n-1}(t) = sin(n theta) and the same nodes in both
    variables.  The summation is a fixed sequence of matrix products, so the
    result is deterministic for fixed ``N`` and ``order``.
    """
    grid = ChebyshevGrid.for_truncation(N, order)
    th = grid.theta
    x = grid.nodes
    K = smooth_kernel_eval(R, x[None, :], x[:, None])  # rows: x_i, columns: t_j
    n = np.arange(1, N + 1)
    T = np.cos(np.outer(th, n))
    G = np.sin(th)[:, None] * np.sin(np.outer(th, n))
    w = np.pi / grid.order
    A = (w * w) * (T.T @ (K @ G))
    return GalerkinMatrix(matrix=A, N=grid.N, order=grid.order)
