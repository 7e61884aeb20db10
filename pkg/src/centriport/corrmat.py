"""Exponentially weighted correlation estimation, shrinkage and elementwise transforms.

The estimator averages Pearson correlation matrices over ``tau`` sliding
windows of length ``tau`` that end 1..tau trading days before (and including)
the as-of date, weighted by a normalized exponential profile. Optional
single-index shrinkage blends the implied covariance with a market-model
target and renormalizes back to a correlation matrix.
"""

from __future__ import annotations

import datetime as dt
import enum
import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, InvalidParameterError
from .panel import ReturnsPanel

log = logging.getLogger(__name__)


class TransformTag(enum.Enum):
    """Elementwise correlation-matrix transforms."""

    A1 = "A1"  # identity
    A2 = "A2"  # positive part
    A3 = "A3"  # positive part of negated entries
    A4 = "A4"  # absolute value


@dataclass(frozen=True)
class CorrelationMatrix:
    tickers: tuple[str, ...]
    C: np.ndarray
    shrunk: bool = False

    def __post_init__(self):
        n = len(self.tickers)
        if self.C.shape != (n, n):
            raise DataError(f"correlation matrix shape {self.C.shape} != ({n},{n})")


def exp_weights(tau: int) -> np.ndarray:
    """Normalized weights w(t) = w0 * exp((t - tau)/tau), t = 1..tau."""
    if tau < 1:
        raise InvalidParameterError(f"tau must be >= 1, got {tau}")
    t = np.arange(1, tau + 1, dtype=np.float64)
    w = np.exp((t - tau) / tau)
    return w / w.sum()


def _window_bounds(end_index: int, tau: int) -> list[tuple[int, int]]:
    """(start, stop) row slices for the windows ending t days before end_index.

    t = 1 is the window ending at end_index itself; t = tau is the oldest.
    """
    return [(end_index - t - tau + 2, end_index - t + 2) for t in range(1, tau + 1)]


def weighted_correlation(panel: ReturnsPanel, tau: int, as_of: dt.date | int) -> CorrelationMatrix:
    """Exponentially weighted average of per-window Pearson correlation matrices."""
    if tau < 2:
        raise InvalidParameterError(f"tau must be >= 2 for Pearson windows, got {tau}")
    end = as_of if isinstance(as_of, (int, np.integer)) else panel.row_index(as_of)
    need = 2 * tau - 1
    if end - (need - 1) < 0:
        if panel.n_dates >= need:
            earliest = panel.dates[need - 1].isoformat()
            raise DataError(
                f"insufficient history before {panel.dates[end].isoformat()}: "
                f"need {need} rows; earliest admissible as_of is {earliest}"
            )
        raise DataError(f"insufficient history: need {need} rows, panel has {panel.n_dates}")

    weights = exp_weights(tau)
    values = panel.values
    acc = np.zeros((panel.n_tickers, panel.n_tickers))
    for t, (start, stop) in enumerate(_window_bounds(end, tau), start=1):
        window = values[start:stop]
        flat = np.ptp(window, axis=0) == 0
        if np.any(flat):
            bad = panel.tickers[int(np.argmax(flat))]
            raise DataError(
                f"ticker {bad} has zero variance in the window ending "
                f"{panel.dates[stop - 1].isoformat()}"
            )
        acc += weights[t - 1] * np.corrcoef(window, rowvar=False)

    acc = 0.5 * (acc + acc.T)
    np.fill_diagonal(acc, 1.0)
    return CorrelationMatrix(panel.tickers, acc, shrunk=False)


def _single_index_target(x: np.ndarray, market: np.ndarray, ddof: int) -> np.ndarray:
    """Market-model covariance target; diagonal kept at sample variances."""
    xm = x - x.mean(axis=0)
    mm = market - market.mean()
    t = x.shape[0]
    var_m = float(mm @ mm) / (t - ddof)
    if var_m <= 0:
        raise DataError("market proxy has zero variance")
    cov_im = xm.T @ mm / (t - ddof)
    beta = cov_im / var_m
    target = var_m * np.outer(beta, beta)
    np.fill_diagonal(target, (xm * xm).sum(axis=0) / (t - ddof))
    return target


def lw_intensity(x: np.ndarray, market: np.ndarray) -> float:
    """Analytic optimal single-index shrinkage intensity, clamped to [0, 1].

    Follows the Ledoit-Wolf market-model estimator (pi-hat, rho-hat,
    gamma-hat computed with 1/T moments on demeaned data).
    """
    t, n = x.shape
    if t < 3:
        raise DataError("need at least 3 observations to estimate shrinkage intensity")
    xc = x - x.mean(axis=0)
    mc = (market - market.mean()).reshape(-1, 1)
    sample = xc.T @ xc / t
    covmkt = (xc * mc).sum(axis=0) / t
    varmkt = float((mc * mc).sum()) / t
    if varmkt <= 0:
        raise DataError("market proxy has zero variance")
    prior = np.outer(covmkt, covmkt) / varmkt
    np.fill_diagonal(prior, np.diag(sample))

    gamma = float(np.sum((sample - prior) ** 2))
    if gamma <= 0:
        return 0.0

    y = xc**2
    pi_hat = float(np.sum(y.T @ y / t - sample**2))

    z = xc * mc
    v1 = y.T @ z / t - covmkt[:, None] * sample
    roff1 = float(np.sum(v1 * covmkt[None, :]) / varmkt - np.sum(np.diag(v1) * covmkt) / varmkt)
    v3 = z.T @ z / t - varmkt * sample
    roff3 = float(
        np.sum(v3 * np.outer(covmkt, covmkt)) / varmkt**2
        - np.sum(np.diag(v3) * covmkt**2) / varmkt**2
    )
    rho_diag = float(np.sum((y.T @ y / t).diagonal() - np.diag(sample) ** 2))
    rho_hat = rho_diag + 2.0 * roff1 - roff3

    kappa = (pi_hat - rho_hat) / gamma
    delta = kappa / t
    if delta < 0.0 or delta > 1.0:
        log.warning("shrinkage intensity %.4f outside [0,1]; clamped", delta)
    return float(min(1.0, max(0.0, delta)))


def shrink(
    corr: CorrelationMatrix,
    panel: ReturnsPanel,
    market_proxy: np.ndarray | None = None,
    intensity: float | None = None,
) -> CorrelationMatrix:
    """Single-index shrinkage of the implied covariance, renormalized to correlations.

    panel supplies the estimation-span returns used for standard deviations,
    betas and the intensity estimate. market_proxy defaults to the
    equal-weighted mean of the panel columns.
    """
    if corr.tickers != panel.tickers:
        raise DataError("correlation matrix tickers do not match panel")
    x = panel.values
    market = np.asarray(market_proxy, dtype=np.float64) if market_proxy is not None else x.mean(axis=1)
    if market.shape != (x.shape[0],):
        raise DataError("market proxy length does not match panel dates")

    if intensity is None:
        intensity = lw_intensity(x, market)
    elif intensity < 0.0 or intensity > 1.0:
        log.warning("shrinkage intensity %.4f outside [0,1]; clamped", intensity)
        intensity = min(1.0, max(0.0, intensity))

    sd = x.std(axis=0, ddof=1)
    if np.any(sd <= 0):
        bad = corr.tickers[int(np.argmax(sd <= 0))]
        raise DataError(f"ticker {bad} has zero variance over the estimation span")
    cov = corr.C * np.outer(sd, sd)
    target = _single_index_target(x, market, ddof=1)
    blended = (1.0 - intensity) * cov + intensity * target

    d = np.sqrt(np.diag(blended))
    out = blended / np.outer(d, d)
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return replace(corr, C=out, shrunk=True)


def apply_transform(corr: CorrelationMatrix | np.ndarray, tag: TransformTag) -> np.ndarray:
    """A1 identity, A2 positive part, A3 positive part of -C, A4 absolute value."""
    c = corr.C if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=np.float64)
    if tag is TransformTag.A1:
        return c.copy()
    if tag is TransformTag.A2:
        return np.maximum(c, 0.0)
    if tag is TransformTag.A3:
        return np.maximum(-c, 0.0)
    if tag is TransformTag.A4:
        return np.abs(c)
    raise InvalidParameterError(f"unknown transform {tag!r}")
