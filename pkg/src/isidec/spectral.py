"""Spectral density, mutual information and entropy rates of Gaussian ISI channels.

All rates are in nats per input symbol and carry the 1/2 factor of the real
Gaussian channel, so ``mutual_information((1,), 1.0) == 0.5 * log(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigvals_banded

from .errors import DomainError, ResourceError

NODES_PER_PANEL = 64
MAX_PANELS = 4096
QUAD_TOL = 1e-12
DEFAULT_EIGEN_BUDGET = 4096


def as_taps(h: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate an ISI tap vector and return it as a 1-D float array."""
    taps = np.atleast_1d(np.asarray(h, dtype=float))
    if taps.ndim != 1 or taps.size == 0:
        raise DomainError("ISI vector must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(taps)):
        raise DomainError("ISI taps must be finite")
    return taps


@dataclass(frozen=True)
class ChannelParams:
    """ISI taps ``h`` and noise variance ``sigma2`` of a linear Gaussian channel."""

    h: tuple[float, ...]
    sigma2: float

    def __init__(self, h, sigma2: float):
        taps = as_taps(h)
        sigma2 = float(sigma2)
        if not sigma2 > 0 or not np.isfinite(sigma2):
            raise DomainError(f"noise variance must be positive and finite, got {sigma2!r}")
        object.__setattr__(self, "h", tuple(float(t) for t in taps))
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def taps(self) -> np.ndarray:
        return np.asarray(self.h)

    @property
    def isi_len(self) -> int:
        return len(self.h) - 1


def _check_sigma2(sigma2: float) -> float:
    sigma2 = float(sigma2)
    if not sigma2 > 0:
        raise DomainError(f"noise variance must be positive, got {sigma2!r}")
    return sigma2


def autocorrelation(h) -> np.ndarray:
    """Tap autocorrelation ``r(k) = sum_j h_j h_{j+k}`` for ``k = 0..l``."""
    taps = as_taps(h)
    return np.correlate(taps, taps, mode="full")[taps.size - 1:]


def spectral_density(h, xi):
    """Evaluate ``f(xi) = r(0) + 2 sum_k r(k) cos(k xi)`` (equal to ``|H(e^{i xi})|^2``)."""
    r = autocorrelation(h)
    xi = np.asarray(xi, dtype=float)
    k = np.arange(1, r.size)
    f = r[0] + 2.0 * np.tensordot(np.cos(np.multiply.outer(xi, k)), r[1:], axes=([-1], [0]))
    f = np.maximum(f, 0.0)
    return float(f) if f.ndim == 0 else f


@lru_cache(maxsize=32)
def _panel_rule(panels: int) -> tuple[np.ndarray, np.ndarray]:
    # Composite Gauss-Legendre on [0, pi], weights normalised to average.
    x, w = np.polynomial.legendre.leggauss(NODES_PER_PANEL)
    width = np.pi / panels
    left = np.arange(panels) * width
    nodes = (left[:, None] + 0.5 * width * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * w / panels, panels)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=256)
def _cos_table(panels: int, lags: int) -> np.ndarray:
    nodes, _ = _panel_rule(panels)
    table = 2.0 * np.cos(np.multiply.outer(np.arange(1, lags + 1), nodes))
    table.setflags(write=False)
    return table


def _density_at_nodes(r: np.ndarray, panels: int) -> np.ndarray:
    f = r[0] + r[1:] @ _cos_table(panels, r.size - 1) if r.size > 1 else np.full(
        _panel_rule(panels)[0].size, r[0])
    return np.maximum(f, 0.0)


def spectral_mean(h, g: Callable[[np.ndarray], np.ndarray], tol: float = QUAD_TOL) -> float:
    """Average of ``g(f(xi))`` over ``xi`` uniform on ``[0, 2 pi)``.

    The spectral density is even about ``pi``, so only ``[0, pi]`` is
    integrated. Panels are doubled until two successive composite
    Gauss-Legendre estimates differ by less than ``tol``.
    """
    r = autocorrelation(h)
    return _spectral_mean_r(r, g, tol)


def _spectral_mean_r(r: np.ndarray, g, tol: float = QUAD_TOL) -> float:
    panels = 1
    prev = float(g(_density_at_nodes(r, panels)) @ _panel_rule(panels)[1])
    while panels < MAX_PANELS:
        panels *= 2
        cur = float(g(_density_at_nodes(r, panels)) @ _panel_rule(panels)[1])
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def mutual_information(h, sigma2: float | None = None) -> float:
    """Asymptotic mutual information ``(1/4 pi) int ln(1 + f/sigma2)`` in nats/symbol.

    Accepts either a :class:`ChannelParams` or ``(h, sigma2)``.
    """
    h, sigma2 = _unpack(h, sigma2)
    r = autocorrelation(h)
    if r[0] == 0.0:
        return 0.0
    return 0.5 * _spectral_mean_r(r, lambda f: np.log1p(f / sigma2))


def output_entropy_rate(h, sigma2: float | None = None) -> float:
    """Differential entropy rate of the channel output for i.i.d. N(0,1) input."""
    h, sigma2 = _unpack(h, sigma2)
    r = autocorrelation(h)
    return 0.5 * np.log(2 * np.pi * np.e) + 0.5 * _spectral_mean_r(r, lambda f: np.log(sigma2 + f))


def gram_eigenvalues(h, n: int, budget: int = DEFAULT_EIGEN_BUDGET) -> np.ndarray:
    """Eigenvalues (ascending) of the ``n x n`` banded Toeplitz Gram matrix ``H^T H``."""
    n = int(n)
    if n < 1:
        raise DomainError("block length must be at least 1")
    if n > budget:
        raise ResourceError(f"n={n} exceeds eigen budget {budget}")
    r = autocorrelation(h)
    bw = min(r.size - 1, n - 1)
    # Lower banded storage: row d holds the d-th subdiagonal.
    band = np.zeros((bw + 1, n))
    for d in range(bw + 1):
        band[d, : n - d] = r[d]
    return np.clip(eigvals_banded(band, lower=True), 0.0, None)


def finite_mutual_information(p: ChannelParams, n: int,
                              budget: int = DEFAULT_EIGEN_BUDGET) -> float:
    """Exact mutual information per symbol ``I^n`` of a length-``n`` block.

    Uses the eigenvalues ``s_i^2`` of the Gram matrix of the ``(n+l) x n``
    convolution matrix: ``I^n = (1/2n) sum ln(1 + s_i^2 / sigma2)``.
    """
    lam = gram_eigenvalues(p.taps, n, budget)
    return float(np.sum(np.log1p(lam / p.sigma2))) / (2 * n)


def _unpack(h, sigma2):
    if isinstance(h, ChannelParams):
        return h.taps, h.sigma2
    if sigma2 is None:
        raise DomainError("sigma2 is required when h is not a ChannelParams")
    return as_taps(h), _check_sigma2(sigma2)
