"""Gaussian codebooks and the discrete-time ISI channel ``y = h * x + z``."""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError
from .spectral import ChannelParams, as_taps

logger = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 1 << 26  # float64 entries (512 MiB)
_SEED_MASK = (1 << 64) - 1


def stream(seed: int, role: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, role, index)``.

    Streams do not depend on the order in which they are requested, so words,
    trials and cells can be evaluated in any order or in parallel.
    """
    key = (zlib.crc32(role.encode()), int(index))
    return np.random.default_rng(np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=key))


@dataclass(frozen=True)
class Codebook:
    words: np.ndarray  # shape (M, n)
    seed: int

    @property
    def M(self) -> int:
        return self.words.shape[0]

    @property
    def n(self) -> int:
        return self.words.shape[1]

    @property
    def rate(self) -> float:
        """Rate ``ln(M) / n`` in nats per symbol."""
        return float(np.log(self.M) / self.n)

    def __len__(self) -> int:
        return self.M

    def __getitem__(self, j: int) -> np.ndarray:
        return self.words[j]


@dataclass(frozen=True)
class Transmission:
    x: np.ndarray
    y: np.ndarray
    truth: ChannelParams
    seed: int


def generate_codebook(M: int, n: int, seed: int,
                      memory_budget: int = DEFAULT_MEMORY_BUDGET) -> Codebook:
    """Draw ``M`` words of ``n`` i.i.d. N(0,1) symbols.

    Word ``j`` comes from its own stream, so it depends only on ``(seed, j)``.
    Codewords are not power-normalised; words whose empirical power leaves
    ``1 +- 3/sqrt(n)`` are logged.
    """
    M, n = int(M), int(n)
    if M < 1 or n < 1:
        raise DomainError(f"need M >= 1 and n >= 1, got M={M}, n={n}")
    if M * n > memory_budget:
        raise ResourceError(f"codebook of {M}x{n} exceeds memory budget of {memory_budget} entries")
    words = np.empty((M, n))
    for j in range(M):
        words[j] = stream(seed, "codebook", j).standard_normal(n)
    power = np.mean(words**2, axis=1)
    off = np.flatnonzero(np.abs(power - 1.0) > 3.0 / np.sqrt(n))
    if off.size:
        logger.info("%d of %d codewords have empirical power outside 1 +- 3/sqrt(n)", off.size, M)
    words.setflags(write=False)
    return Codebook(words=words, seed=int(seed))


def convolve(h, x) -> np.ndarray:
    """Full convolution ``(h*x)_i = sum_j h_j x_{i-j}``, length ``n + l``."""
    return np.convolve(np.asarray(x, dtype=float), as_taps(h), mode="full")


def transmit(x, truth: ChannelParams, seed: int, index: int = 0) -> Transmission:
    """Pass ``x`` through the channel with noise from stream ``(seed, "noise", index)``."""
    x = np.asarray(x, dtype=float)
    clean = convolve(truth.taps, x)
    z = stream(seed, "noise", index).standard_normal(clean.size) * np.sqrt(truth.sigma2)
    return Transmission(x=x, y=clean + z, truth=truth, seed=int(seed))
