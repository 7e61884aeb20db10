"""Walk-based and path-based node centralities on a MarketGraph.

All measures return nonnegative per-node scores. The deformation parameter
alpha lives in (0, alpha_max) where alpha_max depends on the measure family:
reciprocal spectral radius for the resolvent (Katz) family, the polynomial
bound for NBTW walks, and 1 by convention for the exponential family.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .betweenness import betweenness_scores
from .errors import InvalidParameterError, NumericError
from .graphbuild import MarketGraph
from .nbtw import (
    nbtw_alpha_max,
    nbtw_exp_series,
    nbtw_resolvent,
    psi_matrix as _psi_of_array,
    _sym_solve,
)

KATZ_MIN_MARKER = "min"


class CentralityMeasure(enum.Enum):
    DEGREE = "degree"
    KATZ = "katz"
    KATZ_MIN = "katz_min"
    SUBGRAPH = "subgraph"
    EXPONENTIAL = "exponential"
    EXP_SUBGRAPH = "exp_subgraph"
    NBTW = "nbtw"
    NBTW_SUBGRAPH = "nbtw_subgraph"
    NBTW_EXP = "nbtw_exp"
    NBTW_EXP_SUBGRAPH = "nbtw_exp_subgraph"
    BETWEENNESS = "betweenness"


class ParamFamily(enum.Enum):
    WALK = "walk"
    NBTW = "nbtw"
    EXPONENTIAL = "exponential"


#: measures that take no alpha map to None
MEASURE_FAMILY: dict[CentralityMeasure, ParamFamily | None] = {
    CentralityMeasure.DEGREE: None,
    CentralityMeasure.BETWEENNESS: None,
    CentralityMeasure.KATZ: ParamFamily.WALK,
    CentralityMeasure.KATZ_MIN: ParamFamily.WALK,
    CentralityMeasure.SUBGRAPH: ParamFamily.WALK,
    CentralityMeasure.NBTW: ParamFamily.NBTW,
    CentralityMeasure.NBTW_SUBGRAPH: ParamFamily.NBTW,
    CentralityMeasure.EXPONENTIAL: ParamFamily.EXPONENTIAL,
    CentralityMeasure.EXP_SUBGRAPH: ParamFamily.EXPONENTIAL,
    CentralityMeasure.NBTW_EXP: ParamFamily.EXPONENTIAL,
    CentralityMeasure.NBTW_EXP_SUBGRAPH: ParamFamily.EXPONENTIAL,
}

#: printed names used in report tables
MEASURE_LABEL = {
    CentralityMeasure.DEGREE: "Degree",
    CentralityMeasure.KATZ: "Katz",
    CentralityMeasure.KATZ_MIN: "Katz Min",
    CentralityMeasure.SUBGRAPH: "Katz Subgraph",
    CentralityMeasure.EXPONENTIAL: "Exponential",
    CentralityMeasure.EXP_SUBGRAPH: "Exponential Subgraph",
    CentralityMeasure.NBTW: "NBTW",
    CentralityMeasure.NBTW_SUBGRAPH: "NBTW Subgraph",
    CentralityMeasure.NBTW_EXP: "NBTW Exponential",
    CentralityMeasure.NBTW_EXP_SUBGRAPH: "NBTW Exponential Subgraph",
    CentralityMeasure.BETWEENNESS: "Betweenness",
}


@dataclass(frozen=True)
class CentralityVector:
    scores: np.ndarray
    measure: CentralityMeasure
    alpha_fraction: float | str | None = None
    alpha_value: float | None = None
    degenerate: bool = False


def _is_edgeless(G: MarketGraph) -> bool:
    return not np.any(G.A)


def _plain_unweighted(G: MarketGraph) -> bool:
    """Eligible for the cheap NBTW closed form: 0/1 entries, empty diagonal."""
    return (not G.has_loops) and bool(np.all((G.A == 0.0) | (G.A == 1.0)))


def spectral_radius(A: np.ndarray) -> float:
    vals = scipy.linalg.eigvalsh(A, check_finite=False)
    return float(max(abs(vals[0]), abs(vals[-1])))


def alpha_max(G: MarketGraph, family: ParamFamily) -> float:
    """Supremum of admissible alpha; +inf sentinel on an edgeless graph."""
    if family is ParamFamily.EXPONENTIAL:
        return 1.0
    if _is_edgeless(G):
        return np.inf
    if family is ParamFamily.WALK:
        rho = spectral_radius(G.A)
        return np.inf if rho <= 0.0 else 1.0 / rho
    if family is ParamFamily.NBTW:
        return nbtw_alpha_max(G.A, _plain_unweighted(G))
    raise InvalidParameterError(f"unknown family {family!r}")


def katz_min_alpha(G: MarketGraph) -> float:
    """alpha = (1 - exp(-rho)) / rho with rho the spectral radius.

    This is the resolvent parameter that best matches exponential-centrality
    rankings; since 1 - exp(-rho) < 1 it always lands strictly inside the
    admissible interval (0, 1/rho).
    """
    rho = spectral_radius(G.A)
    if not np.isfinite(rho) or rho <= 0:
        raise InvalidParameterError(f"katz-min needs a finite positive spectral radius, got {rho}")
    return float(-np.expm1(-rho) / rho)


def _check_walk_alpha(G: MarketGraph, alpha: float) -> None:
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    am = alpha_max(G, ParamFamily.WALK)
    if alpha >= am:
        raise InvalidParameterError(f"alpha={alpha} outside (0, {am}) for the walk family")


def _check_exp_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise InvalidParameterError(f"alpha={alpha} outside (0, 1] for the exponential family")


def degree(G: MarketGraph) -> CentralityVector:
    """Row sums of the adjacency (a loop contributes its weight once)."""
    return CentralityVector(G.degrees(), CentralityMeasure.DEGREE)


def katz(G: MarketGraph, alpha: float) -> CentralityVector:
    """Solve (I - alpha A) v = 1."""
    _check_walk_alpha(G, alpha)
    n = G.n
    M = np.eye(n) - alpha * G.A
    v = _sym_solve(M, np.ones(n), "katz")
    return CentralityVector(v, CentralityMeasure.KATZ, alpha_value=alpha)


def subgraph(G: MarketGraph, alpha: float) -> CentralityVector:
    """Diagonal of (I - alpha A)^{-1}."""
    _check_walk_alpha(G, alpha)
    n = G.n
    M = np.eye(n) - alpha * G.A
    X = _sym_solve(M, np.eye(n), "subgraph")
    return CentralityVector(np.diag(X).copy(), CentralityMeasure.SUBGRAPH, alpha_value=alpha)


def exponential(G: MarketGraph, alpha: float) -> CentralityVector:
    """e^{alpha A} 1 by scaling-and-squaring."""
    _check_exp_alpha(alpha)
    E = scipy.linalg.expm(alpha * G.A)
    return CentralityVector(E @ np.ones(G.n), CentralityMeasure.EXPONENTIAL, alpha_value=alpha)


def exp_subgraph(G: MarketGraph, alpha: float) -> CentralityVector:
    """Diagonal of e^{alpha A}."""
    _check_exp_alpha(alpha)
    E = scipy.linalg.expm(alpha * G.A)
    return CentralityVector(np.diag(E).copy(), CentralityMeasure.EXP_SUBGRAPH, alpha_value=alpha)


def psi_matrix(G: MarketGraph, alpha: float) -> np.ndarray:
    """Psi(alpha) of the graph's adjacency (see nbtw module)."""
    return _psi_of_array(G.A, alpha)


def nbtw(G: MarketGraph, alpha: float) -> CentralityVector:
    """NBTW resolvent centrality; closed form when unweighted and loopless.

    Beyond the admissible range the system loses positive definiteness and a
    parameter error is raised.
    """
    v = nbtw_resolvent(G.A, alpha, _plain_unweighted(G), diag_only=False)
    return CentralityVector(v, CentralityMeasure.NBTW, alpha_value=alpha)


def nbtw_subgraph(G: MarketGraph, alpha: float) -> CentralityVector:
    v = nbtw_resolvent(G.A, alpha, _plain_unweighted(G), diag_only=True)
    return CentralityVector(v, CentralityMeasure.NBTW_SUBGRAPH, alpha_value=alpha)


def nbtw_exp(G: MarketGraph, alpha: float) -> CentralityVector:
    """Factorially damped NBTW walk sum."""
    _check_exp_alpha(alpha)
    v = nbtw_exp_series(G.A, alpha, diag_mode=False)
    return CentralityVector(v, CentralityMeasure.NBTW_EXP, alpha_value=alpha)


def nbtw_exp_subgraph(G: MarketGraph, alpha: float) -> CentralityVector:
    """Factorially damped closed-NBTW sum (diagonal analogue)."""
    _check_exp_alpha(alpha)
    v = nbtw_exp_series(G.A, alpha, diag_mode=True)
    return CentralityVector(v, CentralityMeasure.NBTW_EXP_SUBGRAPH, alpha_value=alpha)


def betweenness(G: MarketGraph) -> CentralityVector:
    return CentralityVector(betweenness_scores(G.A, G.weighted), CentralityMeasure.BETWEENNESS)


_LIMIT_AT_ZERO = {  # alpha -> 0 limits used for degenerate (edgeless) graphs
    CentralityMeasure.DEGREE: "zeros",
    CentralityMeasure.BETWEENNESS: "zeros",
}


def evaluate(
    G: MarketGraph, measure: CentralityMeasure, alpha_fraction: float | str | None = None
) -> CentralityVector:
    """Harness entry point: resolve alpha from a fraction of alpha_max and run.

    alpha_fraction is a number in (0, 1) for parametric measures, the Katz-min
    marker for KATZ_MIN, and None for degree/betweenness. Edgeless graphs
    return every measure's alpha -> 0 limit with the degenerate flag set.
    """
    if _is_edgeless(G):
        fill = 0.0 if _LIMIT_AT_ZERO.get(measure) == "zeros" else 1.0
        return CentralityVector(
            np.full(G.n, fill), measure, alpha_fraction=alpha_fraction, degenerate=True
        )

    if measure is CentralityMeasure.DEGREE:
        return degree(G)
    if measure is CentralityMeasure.BETWEENNESS:
        return betweenness(G)
    if measure is CentralityMeasure.KATZ_MIN:
        a = katz_min_alpha(G)
        cv = katz(G, a)
        return CentralityVector(cv.scores, measure, KATZ_MIN_MARKER, a)

    if not isinstance(alpha_fraction, (int, float)) or not (0.0 < alpha_fraction < 1.0):
        raise InvalidParameterError(
            f"{measure.value} needs an alpha fraction in (0, 1), got {alpha_fraction!r}"
        )
    family = MEASURE_FAMILY[measure]
    am = alpha_max(G, family)
    a = float(alpha_fraction) if not np.isfinite(am) else float(alpha_fraction) * am
    fn = {
        CentralityMeasure.KATZ: katz,
        CentralityMeasure.SUBGRAPH: subgraph,
        CentralityMeasure.EXPONENTIAL: exponential,
        CentralityMeasure.EXP_SUBGRAPH: exp_subgraph,
        CentralityMeasure.NBTW: nbtw,
        CentralityMeasure.NBTW_SUBGRAPH: nbtw_subgraph,
        CentralityMeasure.NBTW_EXP: nbtw_exp,
        CentralityMeasure.NBTW_EXP_SUBGRAPH: nbtw_exp_subgraph,
    }[measure]
    cv = fn(G, a)
    return CentralityVector(cv.scores, measure, float(alpha_fraction), a)


def dump_scores_csv(G: MarketGraph, cv: CentralityVector, path) -> None:
    """Debug dump: 'ticker,score' rows."""
    with Path(path).open("w") as fh:
        fh.write("ticker,score\n")
        for t, s in zip(G.tickers, cv.scores):
            fh.write(f"{t},{float(s)!r}\n")


def validate_scores(cv: CentralityVector) -> None:
    """Scores must be finite and nonnegative (tiny negative roundoff is clipped)."""
    s = cv.scores
    if not np.all(np.isfinite(s)):
        raise NumericError(f"{cv.measure.value}: non-finite centrality score")
    if np.any(s < -1e-9):
        raise NumericError(f"{cv.measure.value}: negative centrality score {s.min():.3e}")
