"""Closed-form eigenpairs of the quadratic equation via elliptic integrals.

For R(x) = x + (x^2 - 1)/(2C) the eigenvalues are 1 + 1/cosh(2 pi tau n) with
tau = K(k)/K'(k), k = (C - 1)/(C + 1), and the eigenfunctions are

    u_n(x) = sin((n pi / K') F((C + x)/(C - 1))),
    F(X) = int_1^X ds / sqrt((s^2 - 1)(1 - k^2 s^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError
from .rational_map import RationalMap, quadratic_map


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    if not (a > 0 and b > 0):
        raise DomainError("agm requires positive arguments")
    a, b = float(a), float(b)
    for _ in range(64):
        if abs(a - b) <= 2e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def ellipk(k: float) -> float:
    """Complete elliptic integral of the first kind K(k), modulus convention."""
    if not 0 <= k < 1:
        raise DomainError("modulus must lie in [0, 1)")
    return math.pi / (2 * agm(1.0, math.sqrt((1 - k) * (1 + k))))


@dataclass(frozen=True)
class EllipticValues:
    k: float
    K: float
    Kp: float


@dataclass(frozen=True)
class QuadraticProblem:
    """Quadratic equation with parameter C > 1."""

    C: float

    def __post_init__(self):
        if not self.C > 1:
            raise DomainError("C must exceed 1")

    @property
    def k(self) -> float:
        return (self.C - 1) / (self.C + 1)

    @cached_property
    def values(self) -> EllipticValues:
        k = self.k
        return EllipticValues(k=k, K=ellipk(k), Kp=ellipk(math.sqrt((1 - k) * (1 + k))))

    @property
    def tau(self) -> float:
        return self.values.K / self.values.Kp

    @property
    def map(self) -> RationalMap:
        return quadratic_map(self.C)


def lambda_n(problem: QuadraticProblem, n: int) -> float:
    """1 + 1/cosh(2 pi tau n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 + 1.0 / math.cosh(2 * math.pi * problem.tau * n)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _gauss(f, upper: np.ndarray) -> np.ndarray:
    """Integral of f over [0, upper] for each entry of `upper` (64-point Gauss-Legendre)."""
    half = upper[..., None] / 2
    s = half * (_GL_NODES + 1)
    return np.sum(_GL_WEIGHTS * f(s), axis=-1) * half[..., 0]


def incomplete_integral(problem: QuadraticProblem, X) -> np.ndarray:
    """F(X) = int_1^X ds / sqrt((s^2 - 1)(1 - k^2 s^2)) for 1 <= X <= 1/k.

    The lower half uses s = 1 + sigma^2, which removes the endpoint
    singularity at 1; the upper half is K' minus the tail, written with
    s = 1/k - tau^2 to remove the singularity at 1/k.
    """
    k = problem.k
    X = np.clip(np.asarray(X, dtype=float), 1.0, 1.0 / k)
    mid = 0.5 * (1 + 1 / k)
    lower = X <= mid

    def f_low(sig):
        s = 1 + sig * sig
        return 2 / np.sqrt((2 + sig * sig) * (1 - k * s) * (1 + k * s))

    def f_high(tau):
        s = 1 / k - tau * tau
        return 2 / np.sqrt(k * (1 + k * s) * (s - 1) * (s + 1))

    out = np.empty_like(X)
    if np.any(lower):
        out[lower] = _gauss(f_low, np.sqrt(X[lower] - 1))
    if np.any(~lower):
        out[~lower] = problem.values.Kp - _gauss(f_high, np.sqrt(1 / k - X[~lower]))
    return out


def u_n_reference(problem: QuadraticProblem, n: int, x) -> np.ndarray:
    """n-th eigenfunction sin((n pi/K') F((C + x)/(C - 1))) on [-1, 1]."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise ValueError("x must lie in [-1, 1]")
    F = incomplete_integral(problem, (problem.C + x) / (problem.C - 1))
    return np.sin(n * math.pi / problem.values.Kp * F)
