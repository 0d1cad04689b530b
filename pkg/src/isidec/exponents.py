"""Error exponents of the universal decoder and of Gallager's random coding bound.

The universal exponent is

    E_new(R) = min_{h, sigma2} d((h, sigma2) || truth) + |I(h, sigma2) - R|_+

where ``d`` is the per-symbol divergence between two Gaussian ISI channel
laws under unit-power i.i.d. Gaussian input. The minimisation is non-convex,
so it runs a multi-start Nelder-Mead search from a fixed, documented start
set. Gallager's exponent is ``max_{0<=rho<=1} E0(rho) - rho R`` with the
Gaussian-input ``E0`` written as a spectral integral.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import qmc

from .errors import DomainError, UsageError
from .spectral import ChannelParams, _spectral_mean_r, as_taps, autocorrelation, mutual_information

logger = logging.getLogger(__name__)

DEFAULT_STARTS = 32
COORD_TOL = 1e-6
_SCALES = (0.0, 0.25, 0.5, 0.75)
_VAR_FACTORS = (1.0, 2.0)


@dataclass(frozen=True)
class MinimizerReport:
    value: float
    argmin: ChannelParams
    starts: int
    converged: bool
    rho: float | None = None


@dataclass
class ExponentSurface:
    snr_db_axis: np.ndarray
    rate_axis: np.ndarray
    h: np.ndarray
    e_new: np.ndarray
    e_gallager: np.ndarray
    converged: np.ndarray
    difference: np.ndarray = field(init=False)

    def __post_init__(self):
        self.difference = self.e_new - self.e_gallager

    def rows(self):
        """Cells in snr-major, then rate, order."""
        for i, snr in enumerate(self.snr_db_axis):
            for j, rate in enumerate(self.rate_axis):
                yield (float(snr), float(rate), float(self.e_new[i, j]), float(self.e_gallager[i, j]),
                       float(self.difference[i, j]), bool(self.converged[i, j]))


def _pad(a: np.ndarray, size: int) -> np.ndarray:
    return np.pad(a, (0, size - a.size))


def divergence(p: ChannelParams, truth: ChannelParams) -> float:
    """``d = -ln(s/s0)/2 - 1/2 + (s + ||h - h0||^2) / (2 s0)`` with ``s = sigma2``."""
    if p.sigma2 <= 0 or truth.sigma2 <= 0:
        raise DomainError("variances must be positive")
    size = max(len(p.h), len(truth.h))
    dh = _pad(p.taps, size) - _pad(truth.taps, size)
    d = (-0.5 * np.log(p.sigma2 / truth.sigma2) - 0.5
         + (p.sigma2 + float(dh @ dh)) / (2 * truth.sigma2))
    return max(float(d), 0.0)


def _exponent_objective(theta: np.ndarray, rate: float, h0: np.ndarray, s0: float) -> float:
    h, log_s = theta[:-1], theta[-1]
    if not np.isfinite(log_s) or abs(log_s) > 700:
        return np.inf
    s = np.exp(log_s)
    dh = h - h0
    t = s / s0
    # 1/2 (t - 1 - ln t) written to stay non-negative near t = 1
    d = 0.5 * (t - 1.0 - np.log(t)) + float(dh @ dh) / (2 * s0)
    r = np.correlate(h, h, mode="full")[h.size - 1:]
    mi = 0.0 if r[0] == 0.0 else 0.5 * _spectral_mean_r(r, lambda f: np.log1p(f / s))
    return max(d, 0.0) + max(mi - rate, 0.0)


def exponent_objective(p: ChannelParams, rate: float, truth: ChannelParams) -> float:
    """``d(p || truth) + |I(p) - rate|_+``, the function minimised by :func:`new_exponent`."""
    return divergence(p, truth) + max(mutual_information(p) - rate, 0.0)


def start_points(truth: ChannelParams, starts: int = DEFAULT_STARTS) -> np.ndarray:
    """Deterministic start set in ``(h, ln sigma2)`` coordinates.

    The truth first, then shrunken copies of the truth at one and two times
    the true variance, then points of an unscrambled Halton sequence in a box
    around the truth.
    """
    h0, s0 = truth.taps, truth.sigma2
    pts = [np.append(h0, np.log(s0))]
    for c in _SCALES:
        for v in _VAR_FACTORS:
            pts.append(np.append(c * h0, np.log(v * s0)))
    pts = pts[:starts]
    extra = starts - len(pts)
    if extra > 0:
        dim = h0.size + 1
        u = qmc.Halton(d=dim, scramble=False).random(extra + 1)[1:]
        half = max(1.0, float(np.max(np.abs(h0))))
        lo = np.append(h0 - half, np.log(s0) - 1.0)
        hi = np.append(h0 + half, np.log(s0) + 2.0)
        pts.extend(qmc.scale(u, lo, hi))
    return np.array(pts)


def new_exponent(rate: float, truth: ChannelParams, starts: int = DEFAULT_STARTS,
                 tol: float = COORD_TOL, max_fev: int | None = None) -> MinimizerReport:
    """Minimise ``d + |I - R|_+`` over taps of the truth's length and ``sigma2 > 0``."""
    rate = float(rate)
    if rate < 0:
        raise DomainError("rate must be non-negative")
    if rate >= mutual_information(truth):
        # Both terms vanish at the truth and the objective is non-negative.
        return MinimizerReport(0.0, truth, starts, True)
    h0, s0 = truth.taps, truth.sigma2
    dim = h0.size + 1
    max_fev = max_fev or 1000 * dim
    best = None
    for x0 in start_points(truth, starts):
        res = minimize(_exponent_objective, x0, args=(rate, h0, s0), method="Nelder-Mead",
                       options={"xatol": tol, "fatol": 1e-12, "maxfev": max_fev,
                                "adaptive": dim > 3})
        if best is None or res.fun < best.fun:
            best = res
    argmin = ChannelParams(best.x[:-1], np.exp(best.x[-1]))
    value = exponent_objective(argmin, rate, truth)
    if not best.success:
        logger.info("new_exponent(R=%g) best start did not converge: %s", rate, best.message)
    return MinimizerReport(value, argmin, starts, bool(best.success))


def gallager_e0(rho: float, p: ChannelParams) -> float:
    """Gaussian-input ``E0(rho) = (rho/2) mean ln(1 + f / (sigma2 (1 + rho)))``."""
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    r = autocorrelation(p.taps)
    if r[0] == 0.0:
        return 0.0
    scale = p.sigma2 * (1.0 + rho)
    return 0.5 * rho * _spectral_mean_r(r, lambda f: np.log1p(f / scale))


def gallager_exponent(rate: float, p: ChannelParams, tol: float = 1e-9) -> MinimizerReport:
    """``max_{rho in [0,1]} E0(rho) - rho R`` (E0 is concave in rho)."""
    rate = float(rate)
    if rate < 0:
        raise DomainError("rate must be non-negative")
    if rate >= mutual_information(p):
        # E0'(0) = I, so the concave objective is maximised at rho = 0.
        return MinimizerReport(0.0, p, 1, True, rho=0.0)

    def neg(rho):
        return -(gallager_e0(rho, p) - rho * rate)

    res = minimize_scalar(neg, bounds=(0.0, 1.0), method="bounded", options={"xatol": tol})
    cands = [(-res.fun, float(res.x)), (-neg(1.0), 1.0), (0.0, 0.0)]
    value, rho = max(cands)
    return MinimizerReport(max(value, 0.0), p, 1, bool(res.success), rho=rho)


def channel_at_snr(h_shape, snr_db: float) -> ChannelParams:
    """Channel with taps ``h_shape`` and ``sigma2`` such that ``r(0)/sigma2`` is the SNR."""
    taps = as_taps(h_shape)
    r0 = float(taps @ taps)
    if r0 == 0.0:
        raise DomainError("SNR is undefined for the zero channel")
    return ChannelParams(taps, r0 / 10 ** (snr_db / 10))


def exponent_surface(h_shape, snr_db_axis, rate_axis, starts: int = DEFAULT_STARTS,
                     gallager_form: str = "exponent", retry_factor: int = 4,
                     mapper=map) -> ExponentSurface:
    """Tabulate both exponents over an (SNR, rate) grid.

    Cells whose optimiser fails to converge are re-run with ``retry_factor``
    times as many starts. ``gallager_form="e0"`` tabulates ``E0(1)`` instead of
    the rate-dependent exponent. ``mapper`` may be an executor's ``map``.
    """
    snr = np.asarray(snr_db_axis, dtype=float)
    rates = np.asarray(rate_axis, dtype=float)
    if snr.size == 0 or rates.size == 0:
        raise UsageError("axes must be non-empty")
    if np.any(np.diff(snr) < 0) or np.any(np.diff(rates) < 0):
        raise UsageError("axes must be sorted")
    if gallager_form not in ("exponent", "e0"):
        raise UsageError(f"unknown gallager_form {gallager_form!r}")
    taps = as_taps(h_shape)
    cells = [(float(s), float(r)) for s in snr for r in rates]

    def evaluate(cell):
        s, r = cell
        p = channel_at_snr(taps, s)
        rep = new_exponent(r, p, starts)
        if not rep.converged and retry_factor > 1:
            rep = new_exponent(r, p, starts * retry_factor)
        if gallager_form == "e0":
            eg = gallager_e0(1.0, p)
        else:
            eg = gallager_exponent(r, p).value
        return rep.value, eg, rep.converged

    out = list(mapper(evaluate, cells))
    shape = (snr.size, rates.size)
    e_new = np.array([o[0] for o in out]).reshape(shape)
    e_gal = np.array([o[1] for o in out]).reshape(shape)
    conv = np.array([o[2] for o in out]).reshape(shape)
    return ExponentSurface(snr, rates, taps, e_new, e_gal, conv)


def compound_capacity(params) -> float:
    """``min I(h, sigma2)`` over a finite set of channels."""
    params = list(params)
    if not params:
        raise UsageError("compound capacity of an empty set is undefined")
    return min(mutual_information(p) for p in params)
