"""Turn a (transformed) correlation matrix into a market graph.

Eight threshold constructions combine loops/no-loops, signed/absolute and
unweighted/weighted variants; the raw constructions take |C| or |C| - I
directly; the MST filter keeps the spanning tree through the most correlated
pairs (Prim, deterministic tie-breaks).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidParameterError


class AdjacencyOption(enum.Enum):
    """Adjacency constructions. OPT1..OPT8 are the thresholded variants."""

    OPT1 = "1"  # C > theta
    OPT2 = "2"  # |C| > theta
    OPT3 = "3"  # (C - I) > theta
    OPT4 = "4"  # (|C| - I) > theta
    OPT5 = "5"  # [C > theta] o C
    OPT6 = "6"  # [|C| > theta] o |C|
    OPT7 = "7"  # [(C - I) > theta] o (C - I)
    OPT8 = "8"  # [(|C| - I) > theta] o (|C| - I)
    RAW_ABS = "raw_abs"  # A = |C|
    RAW_ABS_NOLOOPS = "raw_abs_noloops"  # A = |C| - I
    MST = "mst"

    @property
    def thresholded(self) -> bool:
        return self.value in "12345678"

    @property
    def unweighted(self) -> bool:
        return self.value in "1234"


@dataclass(frozen=True)
class MarketGraph:
    tickers: tuple[str, ...]
    A: np.ndarray
    weighted: bool
    has_loops: bool
    construction: AdjacencyOption
    theta: float | None = None

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def degrees(self) -> np.ndarray:
        return self.A.sum(axis=1)

    def edge_list(self) -> list[tuple[int, int, float]]:
        """Undirected edges (i <= j) with weights, loops included."""
        out = []
        n = self.n
        for i in range(n):
            for j in range(i, n):
                if self.A[i, j] != 0.0:
                    out.append((i, j, float(self.A[i, j])))
        return out


def _check_symmetric(C: np.ndarray) -> np.ndarray:
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DataError(f"expected a square matrix, got shape {C.shape}")
    if not np.allclose(C, C.T, atol=1e-12, rtol=0.0):
        raise DataError("matrix is not symmetric")
    return 0.5 * (C + C.T)


def build_adjacency(
    C: np.ndarray, option: AdjacencyOption, theta: float, tickers: tuple[str, ...] | None = None
) -> MarketGraph:
    """Thresholded construction (strict inequality; ties at theta drop the edge)."""
    if not option.thresholded:
        raise InvalidParameterError(f"option {option.value} does not take a threshold")
    if not (0.0 <= theta < 1.0):
        raise InvalidParameterError(f"theta must be in [0, 1), got {theta}")
    C = _check_symmetric(C)
    n = C.shape[0]
    eye = np.eye(n)

    base = {
        AdjacencyOption.OPT1: C,
        AdjacencyOption.OPT2: np.abs(C),
        AdjacencyOption.OPT3: C - eye,
        AdjacencyOption.OPT4: np.abs(C) - eye,
        AdjacencyOption.OPT5: C,
        AdjacencyOption.OPT6: np.abs(C),
        AdjacencyOption.OPT7: C - eye,
        AdjacencyOption.OPT8: np.abs(C) - eye,
    }[option]
    mask = base > theta
    A = mask.astype(np.float64) if option.unweighted else np.where(mask, base, 0.0)
    if np.any(A < 0):
        raise DataError("thresholded adjacency produced a negative entry")
    return MarketGraph(
        tickers=tickers or tuple(f"N{i}" for i in range(n)),
        A=A,
        weighted=not option.unweighted,
        has_loops=bool(np.any(np.diag(A) != 0.0)),
        construction=option,
        theta=theta,
    )


def build_raw(C: np.ndarray, loops: bool, tickers: tuple[str, ...] | None = None) -> MarketGraph:
    """A = |C| (loops) or A = |C| - I (no loops); always weighted."""
    C = _check_symmetric(C)
    n = C.shape[0]
    A = np.abs(C)
    if not loops:
        A = A - np.eye(n)
        if np.any(np.diag(A) != 0.0):
            raise DataError("raw no-loops construction needs a unit diagonal")
    option = AdjacencyOption.RAW_ABS if loops else AdjacencyOption.RAW_ABS_NOLOOPS
    return MarketGraph(
        tickers=tickers or tuple(f"N{i}" for i in range(n)),
        A=A,
        weighted=True,
        has_loops=loops,
        construction=option,
        theta=None,
    )


def build_mst(C: np.ndarray, tickers: tuple[str, ...] | None = None) -> MarketGraph:
    """Maximum-correlation spanning tree via Prim; edge weights keep C_ij.

    Ties broken toward the lexicographically smallest (i, j) pair so repeated
    runs produce identical trees.
    """
    C = _check_symmetric(C)
    n = C.shape[0]
    if n < 2:
        raise InvalidParameterError(f"MST needs at least 2 nodes, got {n}")

    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, -np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    in_tree[0] = True
    best[0] = np.inf
    for j in range(1, n):
        best[j] = C[0, j]
        parent[j] = 0

    A = np.zeros((n, n))
    for _ in range(n - 1):
        cand = np.where(~in_tree)[0]
        v = cand[int(np.argmax(best[cand]))]  # argmax takes the first max: smallest index
        u = int(parent[v])
        A[u, v] = A[v, u] = C[u, v]
        in_tree[v] = True
        improve = ~in_tree & (C[v] > best)
        best[improve] = C[v][improve]
        parent[improve] = v

    return MarketGraph(
        tickers=tickers or tuple(f"N{i}" for i in range(n)),
        A=A,
        weighted=True,
        has_loops=False,
        construction=AdjacencyOption.MST,
        theta=None,
    )


def dump_adjacency_csv(graph: MarketGraph, path) -> None:
    """Debug dump: header row of tickers, then the dense adjacency."""
    with Path(path).open("w") as fh:
        fh.write(",".join(graph.tickers) + "\n")
        for row in graph.A:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def dump_edge_list(graph: MarketGraph, path) -> None:
    """Debug dump: one 'i,j,weight' line per undirected edge."""
    with Path(path).open("w") as fh:
        for i, j, w in graph.edge_list():
            fh.write(f"{i},{j},{w!r}\n")
