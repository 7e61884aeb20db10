"""Nonbacktracking-walk (NBTW) machinery.

For a symmetric nonnegative adjacency A (weights allowed, loops allowed) the
rational matrix

    Psi(a) = Psi_e(a) - Psi_o(a),
    Psi_e(a)_ii = 1 + sum_j a^2 A_ij^2 / (1 - a^2 A_ij^2),
    Psi_o(a)_ij = a A_ij / (1 - a^2 A_ij^2),

has inverse whose Taylor coefficients P_k enumerate weighted NBTWs of length
k. Unweighted loopless graphs admit the cheaper closed form
(1 - a^2) (I - a A + a^2 (D - I))^{-1}. The factorially damped variants sum
a^k P_k / k! via the coefficient recurrence

    P_k = sum_{p>=0} A^{o(2p+1)} P_{k-2p-1} - sum_{p>=1} dd(rowsum(A^{o2p})) P_{k-2p}

(o = elementwise power), run on the rescaled matrix A/sigma so the iterates
stay inside double range.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, NumericError

_SERIES_RTOL = 1e-12
_SERIES_KMAX = 200


def _sym_solve(M: np.ndarray, B: np.ndarray, what: str) -> np.ndarray:
    """Solve the SPD system M X = B with one refinement step and a residual gate.

    Loss of positive definiteness is reported as a parameter error: within the
    admissible alpha range these systems are PD by continuity from alpha = 0.
    """
    try:
        cf = scipy.linalg.cho_factor(M, check_finite=False)
    except scipy.linalg.LinAlgError:
        raise InvalidParameterError(f"{what}: system not positive definite (alpha out of range?)")
    X = scipy.linalg.cho_solve(cf, B, check_finite=False)
    X = X + scipy.linalg.cho_solve(cf, B - M @ X, check_finite=False)
    resid = np.max(np.abs(M @ X - B))
    n = M.shape[0]
    if not np.isfinite(resid) or resid > 1e-10 * n * max(1.0, np.max(np.abs(B))):
        raise NumericError(f"{what}: residual {resid:.3e} exceeds tolerance (near-singular system)")
    return X


def psi_matrix(A: np.ndarray, alpha: float) -> np.ndarray:
    """Psi(alpha) for symmetric A; parameter error if any denominator <= 0."""
    if alpha < 0:
        raise InvalidParameterError(f"alpha must be >= 0, got {alpha}")
    E = A * A
    denom = 1.0 - alpha**2 * E
    if np.any(denom[A != 0.0] <= 0.0):
        raise InvalidParameterError(
            f"alpha={alpha} reaches a pole of Psi (needs alpha < 1/max|A_ij|)"
    )
    psi_o = alpha * A / denom
    psi_e = 1.0 + (alpha**2 * E / denom).sum(axis=1)
    psi = -psi_o
    psi[np.diag_indices_from(psi)] += psi_e
    return psi


def quadratic_matrix(A: np.ndarray, alpha: float) -> np.ndarray:
    """I - alpha A + alpha^2 (D - I) with D = diag of row sums."""
    n = A.shape[0]
    d = A.sum(axis=1)
    M = -alpha * A
    M[np.diag_indices(n)] += 1.0 + alpha**2 * (d - 1.0)
    return M


def polynomial_alpha_max(A: np.ndarray) -> float:
    """Smallest positive real eigenvalue of I - alpha A + alpha^2 (D - I).

    Solved through the companion pencil of the quadratic; infinite and complex
    eigenvalues are discarded. The Laplacian zero guarantees a real root <= 1
    for any nonzero A.
    """
    n = A.shape[0]
    if not np.any(A):
        return np.inf
    d = A.sum(axis=1)
    a2 = np.diag(d - 1.0)
    top = np.hstack([A, -np.eye(n)])
    bot = np.hstack([np.eye(n), np.zeros((n, n))])
    lhs = np.vstack([top, bot])
    rhs = np.block([[a2, np.zeros((n, n))], [np.zeros((n, n)), np.eye(n)]])
    vals = scipy.linalg.eig(lhs, rhs, right=False, check_finite=False)
    vals = vals[np.isfinite(vals)]
    # double roots perturb by ~sqrt(eps) off the real axis, so the imaginary
    # filter must sit well above 1e-8
    real = vals[np.abs(vals.imag) <= 1e-6 * np.maximum(1.0, np.abs(vals.real))].real
    pos = real[real > 1e-12]
    if pos.size == 0:
        raise NumericError("no positive real root found for the NBTW polynomial")
    return float(pos.min())


def nbtw_alpha_max(A: np.ndarray, plain_unweighted: bool) -> float:
    """Admissible-alpha supremum: polynomial root, capped by the first Psi pole."""
    root = polynomial_alpha_max(A)
    if plain_unweighted:
        return root
    nz = np.abs(A[A != 0.0])
    if nz.size == 0:
        return root
    return float(min(root, 1.0 / nz.max()))


def nbtw_resolvent(A: np.ndarray, alpha: float, plain_unweighted: bool, diag_only: bool) -> np.ndarray:
    """NBTW resolvent applied to the ones vector, or its diagonal.

    plain_unweighted graphs use (1 - a^2)(I - a A + a^2 (D - I))^{-1}; anything
    weighted or loopy goes through Psi(alpha).
    """
    n = A.shape[0]
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    if plain_unweighted:
        M = quadratic_matrix(A, alpha)
        scale = 1.0 - alpha**2
    else:
        M = psi_matrix(A, alpha)
        scale = 1.0
    if diag_only:
        X = _sym_solve(M, np.eye(n), "nbtw subgraph")
        return scale * np.diag(X).copy()
    v = _sym_solve(M, np.ones(n), "nbtw")
    return scale * v


def _rho_estimate(A: np.ndarray, iters: int = 60) -> float:
    """Deterministic power-iteration Rayleigh estimate of the spectral radius."""
    n = A.shape[0]
    v = 1.0 + 1e-3 * (np.arange(n) % 7)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(iters):
        w = A @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        rho = float(v @ (A @ v))
    return abs(rho)


def _row_scale(d: np.ndarray, state: np.ndarray) -> np.ndarray:
    return (d * state.T).T


def nbtw_exp_series(
    A: np.ndarray,
    alpha: float,
    diag_mode: bool,
    rtol: float = _SERIES_RTOL,
    kmax: int = _SERIES_KMAX,
) -> np.ndarray:
    """sum_k (alpha^k / k!) P_k 1  (or its diagonal for diag_mode).

    Runs the NBTW coefficient recurrence on A/sigma (sigma ~ spectral radius)
    so iterates stay O(1); the factorial coefficients then absorb sigma^k.
    Elementwise-power terms are pruned once their entries cannot contribute at
    working precision, which keeps the convolution depth small for dense
    graphs. Failure to converge within kmax terms raises NumericError.
    """
    n = A.shape[0]
    if alpha <= 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    if not np.any(A):
        return np.ones(n)

    sigma = max(1.0, 1.001 * _rho_estimate(A))
    ab = alpha * sigma
    if ab > 700.0:
        raise NumericError(f"alpha * spectral radius = {ab:.1f} overflows double-precision series")
    At = A / sigma
    unweighted = bool(np.all((A == 0.0) | (A == 1.0)))

    # Odd/even elementwise-power coefficient tables for the general path,
    # pruned where entries are negligible relative to the leading term.
    odds: list[np.ndarray] = []
    even_rowsums: list[np.ndarray] = []
    if not unweighted:
        drop = 1e-17 / max(1, n)
        sq = At * At
        g = np.ones_like(At)
        for _ in range(kmax // 2 + 1):
            f = At * g  # At^{o(2p+1)}
            if f.max() < drop and odds:
                break
            odds.append(f)
            g = g * sq  # At^{o(2p+2)}
            if g.max() >= drop:
                even_rowsums.append(g.sum(axis=1))
            else:
                break

    deg = A.sum(axis=1)
    inv_s2 = 1.0 / sigma**2

    state0 = np.eye(n) if diag_mode else np.ones(n)
    y = np.diag(state0).copy() if diag_mode else state0.copy()
    hist: list[np.ndarray] = [state0]
    max_shift = 2 if unweighted else max(2 * len(odds) - 1, 2 * len(even_rowsums), 2)

    # Parity-indexed geometric accumulators for the unweighted collapse.
    s_odd = {0: None, 1: None}
    s_even = {0: None, 1: None}

    coef = 1.0
    y_norm = float(np.max(np.abs(y)))
    prev_unorm = 1.0
    for k in range(1, kmax + 1):
        coef *= ab / k
        if unweighted:
            par1 = (k - 1) % 2
            acc = hist[-1] if s_odd[par1] is None else hist[-1] + inv_s2 * s_odd[par1]
            s_odd[par1] = acc
            par2 = k % 2
            prev2 = hist[-2] if k >= 2 else None
            if prev2 is None:
                ev = None
            else:
                ev = inv_s2 * (prev2 if s_even[par2] is None else prev2 + s_even[par2])
                s_even[par2] = ev
            u = At @ acc
            if ev is not None:
                u -= _row_scale(deg, ev)
        else:
            u = np.zeros_like(state0)
            for p, f in enumerate(odds):
                shift = 2 * p + 1
                if shift > k:
                    break
                u += f @ hist[-shift]
            for p, rs in enumerate(even_rowsums, start=1):
                shift = 2 * p
                if shift > k:
                    break
                u -= _row_scale(rs, hist[-shift])
        hist.append(u)
        if len(hist) > max_shift + 1:
            hist.pop(0)

        contrib = np.diag(u) if diag_mode else u
        y = y + coef * contrib
        unorm = float(np.max(np.abs(u)))
        y_norm = float(np.max(np.abs(y)))
        if not np.isfinite(y_norm):
            raise NumericError("NBTW exponential series overflowed")

        growth = max(1.0, unorm / prev_unorm) if prev_unorm > 0 else 1.0
        prev_unorm = max(unorm, 1e-300)
        ratio = ab * growth / (k + 1)
        if k > ab and ratio < 0.9:
            tail = coef * unorm * ratio / (1.0 - ratio)
            if tail <= rtol * max(y_norm, 1e-300):
                return y
    raise NumericError(f"NBTW exponential series did not converge within {kmax} terms")
