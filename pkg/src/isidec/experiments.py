"""Reproducible experiment runs: Monte Carlo decoding, exponent sweeps, Szego checks.

Every random quantity comes from a stream keyed by ``(seed, role, index)``,
so outputs are byte-identical across reruns and across thread counts.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .channel import generate_codebook, stream, transmit
from .decoder import decode_ml_csi, decode_mmi
from .errors import UsageError
from .exponents import exponent_surface, gallager_exponent, new_exponent
from .grid import default_grid, estimate_isi_type, residual_correlations
from .spectral import ChannelParams, mutual_information
from .toeplitz import szego_check

KINDS = ("simulate", "exponents", "surface", "estimate", "szego")
TRIAL_HEADER = ["trial", "tx", "rx_mmi", "reason", "rx_ml", "h_hat", "sigma2_hat", "mi"]
SURFACE_HEADER = ["snr_db", "rate_nats", "e_new", "e_gallager", "difference", "converged"]
SURFACE_TAPS = 4


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    @classmethod
    def parse(cls, value, name: str = "axis") -> "Axis":
        if isinstance(value, Axis):
            return value
        if isinstance(value, str):
            parts = value.split(":")
        elif isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            raise UsageError(f"{name}: expected 'start:stop:count', got {value!r}")
        if len(parts) != 3:
            raise UsageError(f"{name}: expected 'start:stop:count', got {value!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"{name}: expected 'start:stop:count', got {value!r}") from None
        if start > stop or count < 1 or (count == 1 and start != stop):
            raise UsageError(f"{name}: need start <= stop and count >= 1 (count 1 only if start == stop)")
        return cls(start, stop, count)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


@dataclass
class ExperimentConfig:
    kind: str = "simulate"
    n: int = 256
    M: int = 16
    trials: int = 1000
    h: list[float] | None = None
    sigma2: float | None = None
    rate: float | None = None
    snr_db: Axis | None = None
    rate_axis: Axis | None = None
    seed: int = 0
    gamma: float | None = None
    tap_bound: float | None = None
    isi_len: int | None = None
    sigma2_min: float | None = None
    sigma2_max: float | None = None
    out: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        cfg = cls(**data)
        cfg.normalise()
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("snr_db", "rate_axis"):
            if getattr(self, name) is not None:
                d[name] = str(getattr(self, name))
        return d

    def normalise(self):
        if self.kind not in KINDS:
            raise UsageError(f"kind: must be one of {', '.join(KINDS)}, got {self.kind!r}")
        for name in ("n", "M", "trials"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise UsageError(f"{name}: must be an integer >= 1, got {value!r}")
        if self.h is not None:
            if isinstance(self.h, str):
                self.h = parse_floats(self.h, "h")
            self.h = [float(v) for v in self.h]
            if not self.h or not all(math.isfinite(v) for v in self.h):
                raise UsageError("h: needs at least one finite tap")
        if self.sigma2 is not None and not float(self.sigma2) > 0:
            raise UsageError("sigma2: must be positive")
        if self.rate is not None and float(self.rate) < 0:
            raise UsageError("rate: must be non-negative")
        if self.snr_db is not None:
            self.snr_db = Axis.parse(self.snr_db, "snr_db")
        if self.rate_axis is not None:
            self.rate_axis = Axis.parse(self.rate_axis, "rate_axis")
            if self.rate_axis.start < 0:
                raise UsageError("rate_axis: rates must be non-negative")

    def require(self, *names: str):
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(f"{name}: required for '{self.kind}'")

    def grid(self):
        if self.h is None:
            raise UsageError("h: required to size the estimation grid")
        isi_len = self.isi_len if self.isi_len is not None else len(self.h) - 1
        return default_grid(self.n, gamma=self.gamma, tap_bound=self.tap_bound, isi_len=isi_len,
                            sigma2_min=self.sigma2_min, sigma2_max=self.sigma2_max)


def parse_floats(text: str, name: str = "value") -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


@contextmanager
def _mapper(threads: int | None = None):
    threads = threads or int(os.environ.get("ISIDEC_THREADS", "1") or 1)
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def wilson_interval(errors: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    from statsmodels.stats.proportion import proportion_confint

    lo, hi = proportion_confint(errors, trials, alpha=alpha, method="wilson")
    return float(lo), float(hi)


def _fmt(v) -> str:
    if v is None:
        return "NONE"
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(repr(float(t)) for t in v)
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_text(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def run_montecarlo(cfg: ExperimentConfig, threads: int | None = None) -> dict:
    """Block-error rates of the blind MMI decoder and the known-channel ML decoder.

    Writes ``trials.csv`` and ``summary.json`` into ``cfg.out`` when it is set.
    """
    cfg.require("h", "sigma2")
    truth = ChannelParams(cfg.h, cfg.sigma2)
    grid = cfg.grid()
    if grid.isi_len != truth.isi_len:
        raise UsageError("isi_len: must equal len(h) - 1 for simulation")
    cb = generate_codebook(cfg.M, cfg.n, cfg.seed)

    def trial(t: int):
        tx_index = int(stream(cfg.seed, "message", t).integers(cfg.M))
        y = transmit(cb[tx_index], truth, cfg.seed, index=t).y
        outcome = decode_mmi(y, cb, grid)
        win = outcome.scores[outcome.winner]
        return {
            "trial": t, "tx": tx_index, "rx_mmi": outcome.decoded, "reason": outcome.reason.value,
            "rx_ml": decode_ml_csi(y, cb, truth), "h_hat": win.h_hat.tolist(),
            "sigma2_hat": win.sigma2_hat, "mi": win.mi_value,
        }

    with _mapper(threads) as mapper:
        records = list(mapper(trial, range(cfg.trials)))

    err_mmi = sum(r["rx_mmi"] != r["tx"] for r in records)
    err_ml = sum(r["rx_ml"] != r["tx"] for r in records)
    echo = cfg.to_dict()
    echo.pop("out")  # keep summaries identical wherever they are written
    summary = {
        "config": echo,
        "rate_nats": math.log(cfg.M) / cfg.n,
        "capacity_nats": mutual_information(truth),
        "trials": cfg.trials,
        "errors_mmi": err_mmi,
        "errors_ml": err_ml,
        "ties": sum(r["reason"] == "TIE" for r in records),
        "outages": sum(r["reason"] == "OUTAGE" for r in records),
        "pe_mmi": err_mmi / cfg.trials,
        "pe_ml": err_ml / cfg.trials,
        "wilson95_mmi": list(wilson_interval(err_mmi, cfg.trials)),
        "wilson95_ml": list(wilson_interval(err_ml, cfg.trials)),
    }
    if cfg.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for r in records:
            w.writerow([_fmt(r[k]) for k in TRIAL_HEADER])
        out = Path(cfg.out)
        _write_text(out / "trials.csv", buf.getvalue())
        _write_text(out / "summary.json", _dumps(summary))
    summary["records"] = records
    return summary


def surface_taps(cfg: ExperimentConfig) -> list[float]:
    """Taps for a surface sweep: ``cfg.h`` or four seeded uniform [0, 1] draws."""
    if cfg.h is not None:
        return list(cfg.h)
    return stream(cfg.seed, "taps").uniform(0.0, 1.0, SURFACE_TAPS).tolist()


def surface_csv(surface) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SURFACE_HEADER)
    for row in surface.rows():
        w.writerow([_fmt(v) if not isinstance(v, bool) else str(v).lower() for v in row])
    return buf.getvalue()


def run_surface(cfg: ExperimentConfig, threads: int | None = None):
    """Exponent surface over ``cfg.snr_db`` x ``cfg.rate_axis``; writes ``surface.csv``."""
    cfg.require("snr_db", "rate_axis")
    taps = surface_taps(cfg)
    with _mapper(threads) as mapper:
        surface = exponent_surface(taps, cfg.snr_db.values(), cfg.rate_axis.values(), mapper=mapper)
    text = surface_csv(surface)
    if cfg.out:
        _write_text(Path(cfg.out) / "surface.csv", text)
    return surface, text


def run_exponents(cfg: ExperimentConfig) -> dict:
    cfg.require("h", "sigma2", "rate")
    truth = ChannelParams(cfg.h, cfg.sigma2)
    new = new_exponent(cfg.rate, truth)
    gal = gallager_exponent(cfg.rate, truth)
    result = {
        "h": list(truth.h), "sigma2": truth.sigma2, "rate": float(cfg.rate),
        "capacity": mutual_information(truth),
        "e_new": new.value, "e_gallager": gal.value, "difference": new.value - gal.value,
        "converged": new.converged,
        "argmin_h": list(new.argmin.h), "argmin_sigma2": new.argmin.sigma2, "rho": gal.rho,
    }
    if cfg.out:
        _write_text(Path(cfg.out) / "exponents.json", _dumps(result))
    return result


def run_estimate(cfg: ExperimentConfig) -> dict:
    """Send codeword 0 of the seeded codebook once and report its ISI type."""
    cfg.require("h", "sigma2")
    truth = ChannelParams(cfg.h, cfg.sigma2)
    grid = cfg.grid()
    if grid.isi_len < truth.isi_len:
        raise UsageError("isi_len: must be at least len(h) - 1")
    # Zero-extend the channel so y has the grid's output length.
    channel = ChannelParams(np.pad(truth.taps, (0, grid.isi_len - truth.isi_len)), truth.sigma2)
    x = generate_codebook(1, cfg.n, cfg.seed)[0]
    y = transmit(x, channel, cfg.seed).y
    t = estimate_isi_type(x, y, grid)
    result = {
        "h": list(truth.h), "sigma2": truth.sigma2, "n": cfg.n,
        "grid": {"gamma": grid.gamma, "tap_bound": grid.tap_bound, "isi_len": grid.isi_len,
                 "sigma2_min": grid.sigma2_min, "sigma2_max": grid.sigma2_max},
        "h_hat": t.h_hat.tolist(), "sigma2_hat": t.sigma2_hat,
        "residual_power": t.residual_power, "interior": t.interior,
        "residual_correlations": residual_correlations(x, y, t.h_hat).tolist(),
        "mi_hat": mutual_information(t.h_hat, t.sigma2_hat),
    }
    if cfg.out:
        _write_text(Path(cfg.out) / "estimate.json", _dumps(result))
    return result


def run_szego(cfg: ExperimentConfig) -> dict:
    cfg.require("h")
    result = {"h": list(cfg.h), "n": cfg.n, "distance": szego_check(cfg.h, cfg.n)}
    if cfg.out:
        _write_text(Path(cfg.out) / "szego.json", _dumps(result))
    return result
