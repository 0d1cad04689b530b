"""Universal maximal-mutual-information decoder and a known-channel ML baseline."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .channel import Codebook, convolve
from .errors import UsageError
from .grid import IsiType, ParamGrid, estimate_isi_type
from .spectral import ChannelParams, mutual_information

DEFAULT_TIE_EPSILON = 1e-12


class Reason(str, Enum):
    OK = "OK"
    TIE = "TIE"
    OUTAGE = "OUTAGE"


@dataclass(frozen=True)
class Score:
    isi_type: IsiType
    mi_value: float

    @property
    def h_hat(self) -> np.ndarray:
        return self.isi_type.h_hat

    @property
    def sigma2_hat(self) -> float:
        return self.isi_type.sigma2_hat


@dataclass(frozen=True)
class DecodeOutcome:
    decoded: int | None
    reason: Reason
    scores: tuple[Score, ...]
    winner: int

    @property
    def ok(self) -> bool:
        return self.reason is Reason.OK


@lru_cache(maxsize=4096)
def _grid_mi(h: tuple[float, ...], sigma2: float) -> float:
    # Grid estimates repeat a lot across codewords; cache their MI.
    return mutual_information(h, sigma2)


def decode_mmi(y, cb: Codebook, grid: ParamGrid,
               tie_epsilon: float = DEFAULT_TIE_EPSILON) -> DecodeOutcome:
    """Decode ``y`` as the codeword whose ISI type has the largest mutual information.

    Returns ``TIE`` (no decision) if the two best scores are within
    ``tie_epsilon`` and ``OUTAGE`` if the winning type is not interior.
    """
    y = np.asarray(y, dtype=float)
    if y.size != cb.n + grid.isi_len:
        raise UsageError(f"len(y)={y.size} but codebook n={cb.n} and isi_len={grid.isi_len}")
    scores = []
    for x in cb.words:
        t = estimate_isi_type(x, y, grid)
        scores.append(Score(t, _grid_mi(tuple(t.h_hat.tolist()), t.sigma2_hat)))
    mi = np.array([s.mi_value for s in scores])
    winner = int(np.argmax(mi))
    if mi.size > 1:
        runner_up = np.max(np.delete(mi, winner))
        if mi[winner] - runner_up < tie_epsilon:
            return DecodeOutcome(None, Reason.TIE, tuple(scores), winner)
    if not scores[winner].isi_type.interior:
        return DecodeOutcome(None, Reason.OUTAGE, tuple(scores), winner)
    return DecodeOutcome(winner, Reason.OK, tuple(scores), winner)


def decode_ml_csi(y, cb: Codebook, truth: ChannelParams) -> int:
    """Minimum-distance decision ``argmin_j ||y - h*x_j||`` with the true ``h`` known."""
    y = np.asarray(y, dtype=float)
    if y.size != cb.n + truth.isi_len:
        raise UsageError(f"len(y)={y.size} but codebook n={cb.n} and isi_len={truth.isi_len}")
    dist = [float(np.sum((y - convolve(truth.taps, x)) ** 2)) for x in cb.words]
    return int(np.argmin(dist))
