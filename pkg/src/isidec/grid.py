"""Quantised parameter sets and the ISI type of an input/output pair.

The ISI type of ``(x, y)`` is the grid point ``h`` minimising ``||y - h*x||``
together with the grid variance closest to the residual power. The grid is
exponentially large in the ISI length, so the minimiser is found by solving
the continuous least-squares problem, rounding to the grid and then running
a +-1-step coordinate search that certifies local optimality.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import convolve
from .errors import DegenerateInputError, DomainError, UsageError
from .spectral import ChannelParams, as_taps

logger = logging.getLogger(__name__)

_COND_LIMIT = 1e12


def _round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


@dataclass(frozen=True)
class ParamGrid:
    """Approximating set of ISI vectors and noise variances.

    Taps are integer multiples of ``gamma`` strictly inside
    ``(-tap_bound, tap_bound)``; variances are multiples of ``gamma`` clamped
    to ``[sigma2_min, sigma2_max]``.
    """

    gamma: float
    tap_bound: float
    isi_len: int
    sigma2_min: float
    sigma2_max: float
    n: int | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.tap_bound > 0:
            raise DomainError("tap_bound must be positive")
        if self.isi_len < 0:
            raise DomainError("isi_len must be non-negative")
        if not 0 < self.sigma2_min < self.sigma2_max:
            raise DomainError("need 0 < sigma2_min < sigma2_max")

    @property
    def max_index(self) -> int:
        """Largest ``k`` with ``k * gamma < tap_bound``."""
        q = self.tap_bound / self.gamma
        nearest = round(q)
        if abs(q - nearest) < 1e-9:
            return int(nearest) - 1
        return int(math.floor(q))

    @property
    def cardinality(self) -> float:
        taps = (2 * self.max_index + 1) ** (self.isi_len + 1)
        variances = max(1, math.floor((self.sigma2_max - self.sigma2_min) / self.gamma) + 1)
        return float(taps) * variances

    def round_sigma2(self, value: float) -> float:
        s = float(_round_half_away(value / self.gamma)) * self.gamma
        return min(max(s, self.sigma2_min), self.sigma2_max)

    def with_overrides(self, **overrides) -> "ParamGrid":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def default_grid(n: int, **overrides) -> ParamGrid:
    """Grid schedule for block length ``n``.

    ``gamma = n^(-1/4)``, ``isi_len = floor(log2 n)``, ``tap_bound = n^(1/16)``
    and variances in ``[1/4, tap_bound^2]``. Any field can be overridden by
    keyword; ``None`` values are ignored.
    """
    n = int(n)
    if n < 16:
        raise DomainError(f"schedule needs n >= 16, got {n}")
    tap_bound = n ** (1 / 16)
    grid = ParamGrid(
        gamma=n ** -0.25,
        tap_bound=tap_bound,
        isi_len=int(math.floor(math.log2(n))),
        sigma2_min=0.25,
        sigma2_max=tap_bound**2,
        n=n,
    ).with_overrides(**overrides)
    logger.debug("grid for n=%d has %.3g points", n, grid.cardinality)
    return grid


@dataclass(frozen=True)
class IsiType:
    h_hat: np.ndarray
    sigma2_hat: float
    residual_power: float
    interior: bool
    clamped: bool = False

    @property
    def params(self) -> ChannelParams:
        return ChannelParams(self.h_hat, self.sigma2_hat)


def shift_statistics(x, y, isi_len: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Gram matrix ``G``, cross-correlations ``b`` and ``||y||^2``.

    With these, ``||y - h*x||^2 = ||y||^2 - 2 h.b + h.G.h`` for any tap vector
    of length ``isi_len + 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if y.size != n + isi_len:
        raise UsageError(f"output length {y.size} != input length {n} + isi_len {isi_len}")
    acf = np.array([x[: n - k] @ x[k:] if k < n else 0.0 for k in range(isi_len + 1)])
    idx = np.arange(isi_len + 1)
    gram = acf[np.abs(idx[:, None] - idx[None, :])]
    b = np.array([x @ y[k: k + n] for k in range(isi_len + 1)])
    return gram, b, float(y @ y)


def _local_search(k: np.ndarray, gram: np.ndarray, b: np.ndarray, gamma: float, kmax: int):
    """Move one coordinate by +-1 grid step while the objective strictly drops.

    Among equally good neighbours the lexicographically smallest tap vector
    wins. Returns the certified index vector.
    """
    k = k.copy()
    dim = k.size
    diag = np.diag(gram)
    while True:
        grad = gram @ (k * gamma) - b
        best = None
        for i in range(dim):
            for step in (-1, 1):
                if abs(k[i] + step) > kmax:
                    continue
                delta = 2 * step * gamma * grad[i] + gamma**2 * diag[i]
                cand = k.copy()
                cand[i] += step
                key = (delta, tuple(cand))
                if best is None or key < best:
                    best = key
        if best is None or not best[0] < 0:
            return k
        k = np.array(best[1])


def estimate_isi_type(x, y, grid: ParamGrid) -> IsiType:
    """ISI type ``(h_hat, sigma2_hat)`` of the pair ``(x, y)`` on ``grid``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gram, b, _ = shift_statistics(x, y, grid.isi_len)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        chol = None
    if chol is None or np.linalg.cond(gram) > _COND_LIMIT:
        raise DegenerateInputError("input shifts are linearly dependent; channel is not identifiable")
    h_ls = np.linalg.solve(gram, b)

    kmax = grid.max_index
    k0 = _round_half_away(h_ls / grid.gamma).astype(int)
    clamped = bool(np.any(np.abs(k0) > kmax))
    k0 = np.clip(k0, -kmax, kmax)
    k = _local_search(k0, gram, b, grid.gamma, kmax)
    h_hat = k * grid.gamma

    residual = y - convolve(h_hat, x)
    residual_power = float(residual @ residual) / x.size
    sigma2_hat = grid.round_sigma2(residual_power)
    interior = abs(sigma2_hat - residual_power) < grid.gamma and not clamped
    return IsiType(h_hat=h_hat, sigma2_hat=sigma2_hat, residual_power=residual_power,
                   interior=bool(interior), clamped=clamped)


def residual_correlations(x, y, h_hat) -> np.ndarray:
    """Correlations ``c_k = (1/n) sum_j (y - h_hat*x)_j x_{j-k}``, ``k = 0..l``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    taps = as_taps(h_hat)
    n = x.size
    if y.size != n + taps.size - 1:
        raise UsageError("output length must equal input length + len(h_hat) - 1")
    z = y - convolve(taps, x)
    return np.array([x @ z[k: k + n] for k in range(taps.size)]) / n


def conditional_nll(x, y, p: ChannelParams) -> float:
    """``-ln p(y|x) = (n/2) ln(2 pi sigma2) + ||y - h*x||^2 / (2 sigma2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = y - convolve(p.taps, x)
    if z.size != y.size:
        raise UsageError("output length must equal input length + isi length")
    n = x.size
    return 0.5 * n * np.log(2 * np.pi * p.sigma2) + float(z @ z) / (2 * p.sigma2)


def is_conditionally_typical(x, y, p: ChannelParams, grid: ParamGrid) -> bool:
    """Whether ``y`` is ``gamma``-typical to ``p(.|x)``.

    Compares the negative log-likelihood with the conditional entropy
    ``n (ln(2 pi e)/2 + ln sigma)``; the slack is ``n * grid.gamma``.
    """
    n = np.asarray(x).size
    entropy = n * (0.5 * np.log(2 * np.pi * np.e) + 0.5 * np.log(p.sigma2))
    return bool(abs(conditional_nll(x, y, p) - entropy) < n * grid.gamma)
