"""Convolution matrices, their singular values and the parallel-channel view."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import toeplitz
from scipy.stats import wasserstein_distance

from .errors import DomainError, ResourceError
from .spectral import DEFAULT_EIGEN_BUDGET, as_taps, spectral_density


@dataclass(frozen=True)
class ConvOperator:
    """The ``(n+l) x n`` banded lower-triangular Toeplitz matrix of ``h``."""

    h: np.ndarray
    n: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n + self.h.size - 1, self.n)

    @cached_property
    def matrix(self) -> np.ndarray:
        col = np.zeros(self.shape[0])
        col[: self.h.size] = self.h
        row = np.zeros(self.n)
        row[0] = self.h[0]
        return toeplitz(col, row)

    def __matmul__(self, x):
        return self.matrix @ x


def conv_matrix(h, n: int) -> ConvOperator:
    if int(n) < 1:
        raise DomainError("n must be at least 1")
    return ConvOperator(as_taps(h), int(n))


def _check_budget(op: ConvOperator, budget: int):
    if op.n > budget:
        raise ResourceError(f"n={op.n} exceeds eigen budget {budget}")


def singular_values(op: ConvOperator, budget: int = DEFAULT_EIGEN_BUDGET) -> np.ndarray:
    """Singular values of the convolution matrix, descending."""
    _check_budget(op, budget)
    return np.linalg.svd(op.matrix, compute_uv=False)


def szego_check(h, n: int, samples: int = 1 << 16) -> float:
    """Wasserstein-1 distance between ``{s_i^2}`` and the law of ``f(xi)``, ``xi ~ U[0, 2 pi)``."""
    if int(n) < 32:
        raise DomainError("szego_check needs n >= 32")
    s = singular_values(conv_matrix(h, n))
    xi = 2 * np.pi * np.arange(samples) / samples
    return float(wasserstein_distance(s**2, spectral_density(h, xi)))


@dataclass(frozen=True)
class ParallelChannels:
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    gains: np.ndarray
    residuals: np.ndarray
    null_coords: np.ndarray  # output coordinates outside the range of H


def singular_bases(op: ConvOperator, budget: int = DEFAULT_EIGEN_BUDGET):
    """``(U, s, V)`` with ``H = U[:, :n] diag(s) V^T``.

    Each right singular vector is flipped so its first non-negligible entry is
    positive; the matching left vector is flipped with it.
    """
    _check_budget(op, budget)
    u, s, vt = np.linalg.svd(op.matrix, full_matrices=True)
    v = vt.T
    for i in range(op.n):
        nz = np.flatnonzero(np.abs(v[:, i]) > 1e-12)
        if nz.size and v[nz[0], i] < 0:
            v[:, i] *= -1
            u[:, i] *= -1
    return u, s, v


def parallel_decompose(x, y, op: ConvOperator) -> ParallelChannels:
    """Rewrite ``y = Hx + z`` as ``n`` scalar channels ``y~_i = s_i x~_i + z~_i``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != op.n or y.size != op.shape[0]:
        raise DomainError(f"expected x of length {op.n} and y of length {op.shape[0]}")
    u, s, v = singular_bases(op)
    x_t = v.T @ x
    y_full = u.T @ y
    y_t = y_full[: op.n]
    return ParallelChannels(x_t, y_t, s, y_t - s * x_t, y_full[op.n:])
