"""Stock selection and constrained portfolio construction.

Selection takes the m highest- or lowest-scoring tickers (lexicographic tie
break). Weights come from equal weighting or from box-constrained quadratic
programs: minimum variance (budget + box) and mean-variance (budget + target
return + box). The target-return constraint falls back to the highest
achievable positive return when infeasible, and to plain minimum variance
when even that is nonpositive.

The QP solver is a primal active-set method specialized to a handful of
assets: deterministic pivoting, KKT convergence at 1e-10, iteration cap
10000.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass

import numpy as np

from .centrality import CentralityVector
from .errors import DataError, InfeasibleError, NumericError
from .panel import ReturnsPanel

TRADING_DAYS = 252
_KKT_TOL = 1e-10
_MAX_ITER = 10_000


class Side(enum.Enum):
    CENTRAL = "central"
    PERIPHERAL = "peripheral"


class PortfolioScheme(enum.Enum):
    EW = "ew"
    MINVAR_LO = "minvar_lo"
    MINVAR_LS = "minvar_ls"
    MEANVAR_LO = "meanvar_lo"
    MEANVAR_LS = "meanvar_ls"

    @property
    def long_only(self) -> bool:
        return self in (PortfolioScheme.MINVAR_LO, PortfolioScheme.MEANVAR_LO)

    @property
    def needs_target(self) -> bool:
        return self in (PortfolioScheme.MEANVAR_LO, PortfolioScheme.MEANVAR_LS)

    def bounds(self, m: int, cap: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
        lo = 0.0 if self.long_only or self is PortfolioScheme.EW else -cap
        hi = 1.0 if self is PortfolioScheme.EW else cap
        return np.full(m, lo), np.full(m, hi)


SCHEME_LABEL = {
    PortfolioScheme.EW: "EW",
    PortfolioScheme.MINVAR_LO: "Min Var (LO)",
    PortfolioScheme.MINVAR_LS: "Min Var (LS)",
    PortfolioScheme.MEANVAR_LO: "Mean-Var (LO)",
    PortfolioScheme.MEANVAR_LS: "Mean-Var (LS)",
}


@dataclass(frozen=True)
class SelectionSpec:
    m: int
    side: Side


@dataclass(frozen=True)
class WeightVector:
    tickers: tuple[str, ...]
    x: np.ndarray

    def __post_init__(self):
        if abs(self.x.sum() - 1.0) > 1e-8:
            raise NumericError(f"weights sum to {self.x.sum()}, not 1")


def select(cv: CentralityVector, tickers: tuple[str, ...], spec: SelectionSpec) -> list[str]:
    """m tickers with the highest (CENTRAL) or lowest (PERIPHERAL) scores."""
    if spec.m > len(tickers):
        raise DataError(f"universe of {len(tickers)} tickers is smaller than m={spec.m}")
    scores = cv.scores
    if spec.side is Side.CENTRAL:
        order = sorted(range(len(tickers)), key=lambda i: (-scores[i], tickers[i]))
    else:
        order = sorted(range(len(tickers)), key=lambda i: (scores[i], tickers[i]))
    return [tickers[i] for i in order[: spec.m]]


def equal_weights(m: int, tickers: tuple[str, ...] = ()) -> WeightVector:
    if m < 1:
        raise DataError(f"m must be >= 1, got {m}")
    return WeightVector(tuple(tickers) or tuple(f"A{i}" for i in range(m)), np.full(m, 1.0 / m))


def _regularized(sigma: np.ndarray) -> np.ndarray:
    """Tiny trace-scaled ridge so identical return columns stay solvable."""
    m = sigma.shape[0]
    sigma = 0.5 * (sigma + sigma.T)
    return sigma + (1e-10 * np.trace(sigma) / m + 1e-300) * np.eye(m)


def _feasible_start(lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Budget-feasible point inside the box: clip 1/m, then water-fill."""
    m = lb.size
    if lb.sum() > 1.0 + 1e-12 or ub.sum() < 1.0 - 1e-12:
        raise InfeasibleError(
            f"box [{lb[0]}, {ub[0]}] x {m} cannot meet the unit budget"
        )
    x = np.clip(np.full(m, 1.0 / m), lb, ub)
    gap = 1.0 - x.sum()
    for i in range(m):
        if abs(gap) <= 1e-15:
            break
        room = (ub[i] - x[i]) if gap > 0 else (lb[i] - x[i])
        step = np.clip(gap, min(room, 0.0), max(room, 0.0))
        x[i] += step
        gap -= step
    return x


def _active_set_qp(Q, eq_rows, eq_rhs, lb, ub, x0):
    """Primal active-set QP: min 1/2 x'Qx s.t. eq_rows x = eq_rhs, lb <= x <= ub.

    Returns (x, lambdas). Deterministic: most-negative multiplier leaves the
    working set, smallest index wins ratio-test ties.
    """
    m = Q.shape[0]
    E = np.atleast_2d(eq_rows)
    d = np.atleast_1d(eq_rhs)
    ne = E.shape[0]
    x = x0.copy()
    at_lo = np.abs(x - lb) <= 1e-14
    at_hi = np.abs(x - ub) <= 1e-14

    lam = np.zeros(ne)
    for _ in range(_MAX_ITER):
        free = ~(at_lo | at_hi)
        nf = int(free.sum())
        fixed_val = np.where(at_lo, lb, np.where(at_hi, ub, 0.0))

        if nf > 0:
            Ef = E[:, free]
            kkt = np.block([[Q[np.ix_(free, free)], Ef.T], [Ef, np.zeros((ne, ne))]])
            rhs = np.concatenate(
                [-Q[np.ix_(free, ~free)] @ fixed_val[~free], d - E[:, ~free] @ fixed_val[~free]]
            )
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            target = fixed_val.copy()
            target[free] = sol[:nf]
            lam = sol[nf:]
            p = target - x
        else:
            p = np.zeros(m)
            # budget multiplier from least squares on the full gradient
            lam, *_ = np.linalg.lstsq(E.T, -(Q @ x), rcond=None)

        if np.max(np.abs(p)) <= _KKT_TOL:
            # multiplier signs on active bounds: mu = grad + E'lam, >= 0 at lower,
            # <= 0 at upper for a minimum
            mu = Q @ x + E.T @ lam
            viol_lo = np.where(at_lo, -mu, -np.inf)
            viol_hi = np.where(at_hi, mu, -np.inf)
            worst = np.maximum(viol_lo, viol_hi)
            idx = int(np.argmax(worst))
            if worst[idx] <= _KKT_TOL:
                return x, lam
            at_lo[idx] = at_hi[idx] = False
            continue

        # ratio test against the box on free coordinates
        step = 1.0
        blocker = -1
        to_hi = False
        for i in np.where(free)[0]:
            if p[i] > 1e-16:
                s = (ub[i] - x[i]) / p[i]
                if s < step - 1e-15:
                    step, blocker, to_hi = s, i, True
            elif p[i] < -1e-16:
                s = (lb[i] - x[i]) / p[i]
                if s < step - 1e-15:
                    step, blocker, to_hi = s, i, False
        x = x + step * p
        if blocker >= 0:
            x[blocker] = ub[blocker] if to_hi else lb[blocker]
            (at_hi if to_hi else at_lo)[blocker] = True
        else:
            x = np.clip(x, lb, ub)
    raise NumericError(f"active-set QP did not converge in {_MAX_ITER} iterations")


def kkt_residual(Q, eq_rows, eq_rhs, lb, ub, x) -> float:
    """Max violation across stationarity, equality feasibility and bounds."""
    E = np.atleast_2d(eq_rows)
    d = np.atleast_1d(eq_rhs)
    feas = max(float(np.max(np.abs(E @ x - d))), float(np.max(lb - x)), float(np.max(x - ub)))
    g = Q @ x
    interior = (x > lb + 1e-9) & (x < ub - 1e-9)
    if interior.any():
        lam, *_ = np.linalg.lstsq(E[:, interior].T, -g[interior], rcond=None)
    else:
        lam, *_ = np.linalg.lstsq(E.T, -g, rcond=None)
    mu = g + E.T @ lam
    stat = 0.0
    for i in range(x.size):
        if interior[i]:
            stat = max(stat, abs(mu[i]))
        elif x[i] <= lb[i] + 1e-9:
            stat = max(stat, max(0.0, -mu[i]))
        else:
            stat = max(stat, max(0.0, mu[i]))
    return max(feas, stat)


def min_variance(
    sigma: np.ndarray, bounds: tuple[np.ndarray, np.ndarray], tickers: tuple[str, ...] = ()
) -> WeightVector:
    """Budget- and box-constrained variance minimizer."""
    lb, ub = bounds
    Q = _regularized(np.asarray(sigma, dtype=np.float64))
    m = Q.shape[0]
    x0 = _feasible_start(lb, ub)
    x, _ = _active_set_qp(Q, np.ones((1, m)), np.array([1.0]), lb, ub, x0)
    return WeightVector(tuple(tickers) or tuple(f"A{i}" for i in range(m)), x)


def max_achievable_return(r: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact LP max of r'x under budget + box, by greedy filling in return order."""
    m = r.size
    x = lb.astype(np.float64).copy()
    budget = 1.0 - x.sum()
    if budget < -1e-12 or ub.sum() < 1.0 - 1e-12:
        raise InfeasibleError("box cannot meet the unit budget")
    order = sorted(range(m), key=lambda i: (-r[i], i))
    for i in order:
        add = min(ub[i] - lb[i], budget)
        x[i] += add
        budget -= add
        if budget <= 1e-15:
            break
    return float(r @ x), x


def mean_variance(
    sigma: np.ndarray,
    r: np.ndarray,
    r_target: float,
    bounds: tuple[np.ndarray, np.ndarray],
    tickers: tuple[str, ...] = (),
) -> WeightVector:
    """Variance minimizer on the slice r'x = r_target (achievability fallback).

    Unachievable targets resolve at the highest achievable return when that is
    positive, otherwise the return constraint is dropped entirely.
    """
    lb, ub = bounds
    Q = _regularized(np.asarray(sigma, dtype=np.float64))
    m = Q.shape[0]
    r = np.asarray(r, dtype=np.float64)
    names = tuple(tickers) or tuple(f"A{i}" for i in range(m))

    r_max, x_max = max_achievable_return(r, lb, ub)
    r_min, x_min = max_achievable_return(-r, lb, ub)
    r_min = -r_min
    if not (r_min - 1e-12 <= r_target <= r_max + 1e-12):
        if r_max <= 0.0:
            return min_variance(sigma, bounds, names)
        r_target = r_max

    # feasible start on the return slice: convex combination of the extreme
    # greedy vertices hits any achievable target
    if r_max - r_min > 1e-14:
        t = np.clip((r_target - r_min) / (r_max - r_min), 0.0, 1.0)
        x0 = (1.0 - t) * x_min + t * x_max
    else:
        x0 = _feasible_start(lb, ub)
        r_target = float(r @ x0)

    E = np.vstack([np.ones(m), r])
    rhs = np.array([1.0, r_target])
    span = max(1.0, abs(r_max), abs(r_min))
    at_vertex = min(abs(r_target - r_max), abs(r_target - r_min)) <= 1e-10 * span
    try:
        x, _ = _active_set_qp(Q, E, rhs, lb, ub, x0)
        if np.max(np.abs(E @ x - rhs)) > 1e-8:
            raise NumericError("return slice lost")
    except NumericError:
        if not at_vertex:
            raise
        x = x0  # slice pinched to the greedy vertex, which is then optimal
    return WeightVector(names, x)


def covariance_from_train(
    panel: ReturnsPanel,
    tickers: list[str],
    year: int,
    shrunk: bool = False,
    market_proxy: np.ndarray | None = None,
    intensity: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance and annualized mean returns over one train year.

    shrunk=True blends toward the single-index target with the Ledoit-Wolf
    intensity (reusing the correlation-module machinery on the selected block).
    """
    sl = panel.year_slice(year)
    sub = panel.select(tickers).rows(sl)
    x = sub.values
    if x.shape[0] < 2:
        raise DataError(f"year {year} has fewer than 2 observations")
    sigma = np.cov(x, rowvar=False, ddof=1)
    sigma = np.atleast_2d(sigma)
    r = x.mean(axis=0) * TRADING_DAYS
    if shrunk:
        from .corrmat import lw_intensity, _single_index_target

        market = market_proxy if market_proxy is not None else x.mean(axis=1)
        delta = intensity if intensity is not None else lw_intensity(x, market)
        target = _single_index_target(x, market, ddof=1)
        sigma = (1.0 - delta) * sigma + delta * target
    return sigma, r


def realized_weights(scheme: PortfolioScheme, sigma, r, r_target: float, tickers, cap: float = 0.25):
    """Dispatch a scheme to its weight rule."""
    m = len(tickers)
    if scheme is PortfolioScheme.EW:
        return equal_weights(m, tickers)
    bounds = scheme.bounds(m, cap)
    if scheme.needs_target:
        return mean_variance(sigma, r, r_target, bounds, tickers)
    return min_variance(sigma, bounds, tickers)
