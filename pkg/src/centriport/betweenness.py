"""Shortest-path betweenness (Brandes accumulation).

Scores count unordered pairs (j, k), j != i != k: the fraction of shortest
j-k paths through i. Unweighted graphs use hop counts with a BFS vectorized
across sources; weighted graphs use Dijkstra on edge lengths 1/weight
(stronger correlation = shorter distance). Loops never lie on a shortest path
and are ignored.
"""

from __future__ import annotations

import numpy as np

_TIE_RTOL = 1e-12


def betweenness_scores(A: np.ndarray, weighted: bool) -> np.ndarray:
    adj = np.array(A, dtype=np.float64)
    np.fill_diagonal(adj, 0.0)
    if not np.any(adj):
        return np.zeros(A.shape[0])
    if weighted and not np.all((adj == 0.0) | (adj == 1.0)):
        return _weighted(adj)
    return _unweighted(adj)


def _unweighted(adj: np.ndarray) -> np.ndarray:
    """All-sources BFS with sigma counts carried in matrix form."""
    n = adj.shape[0]
    af = (adj > 0).astype(np.float64)
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    sigma = np.eye(n)
    frontier = np.eye(n, dtype=bool)
    level = 0
    while True:
        counts = np.where(frontier, sigma, 0.0) @ af
        newly = (dist == -1) & (counts > 0.0)
        if not newly.any():
            break
        level += 1
        dist[newly] = level
        sigma[newly] = counts[newly]
        frontier = newly

    delta = np.zeros((n, n))
    for lev in range(level, 0, -1):
        at = dist == lev
        x = np.where(at, (1.0 + delta) / np.where(at, sigma, 1.0), 0.0)
        y = x @ af
        pred = dist == lev - 1
        delta += np.where(pred, sigma * y, 0.0)
    return (delta.sum(axis=0) - np.diag(delta)) / 2.0


def _weighted(adj: np.ndarray) -> np.ndarray:
    """Per-source Dijkstra Brandes on lengths 1/weight, float ties tolerated."""
    n = adj.shape[0]
    with np.errstate(divide="ignore"):
        lengths = np.where(adj > 0.0, 1.0 / np.where(adj > 0.0, adj, 1.0), np.inf)
    bc = np.zeros(n)
    for s in range(n):
        dist = np.full(n, np.inf)
        dist[s] = 0.0
        sigma = np.zeros(n)
        sigma[s] = 1.0
        done = np.zeros(n, dtype=bool)
        order = []
        for _ in range(n):
            cand = np.where(~done, dist, np.inf)
            u = int(np.argmin(cand))
            if not np.isfinite(cand[u]):
                break
            done[u] = True
            order.append(u)
            alt = dist[u] + lengths[u]
            finite = np.isfinite(alt)
            tol = _TIE_RTOL * (1.0 + np.abs(np.where(finite, alt, 0.0)))
            with np.errstate(invalid="ignore"):
                shorter = ~done & finite & (alt < dist - tol)
                equal = ~done & finite & ~shorter & (np.abs(alt - dist) <= tol)
            dist[shorter] = alt[shorter]
            sigma[shorter] = sigma[u]
            sigma[equal] += sigma[u]

        delta = np.zeros(n)
        for v in reversed(order):
            if v == s:
                continue
            tol_v = _TIE_RTOL * (1.0 + abs(dist[v]))
            pred = (adj[:, v] > 0.0) & (np.abs(dist + lengths[:, v] - dist[v]) <= tol_v)
            pred[v] = False
            if pred.any():
                delta[pred] += sigma[pred] / sigma[v] * (1.0 + delta[v])
        delta[s] = 0.0
        bc += delta
    return bc / 2.0
