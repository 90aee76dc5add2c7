"""Least squares over the probability simplex.

Solves ``min ||S p - b||^2`` subject to ``p >= 0`` and ``sum(p) = 1``.  A
penalised NNLS (the sum constraint appended as a heavily weighted row) picks
the starting active set; an exact active-set loop with the equality
eliminated by substitution then finishes the job and produces the KKT
certificate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core


@dataclass(frozen=True)
class SimplexLsResult:
    weights: np.ndarray
    residual_norm: float
    kkt_gap: float
    certified: bool
    iterations: int


def _eq_solve(S, b, idx):
    """Minimise over the affine set ``sum(z) = 1`` restricted to columns ``idx``."""
    if idx.size == 1:
        return np.ones(1)
    last = S[:, idx[-1]]
    M = S[:, idx[:-1]] - last[:, None]
    y = np.linalg.lstsq(M, b - last, rcond=None)[0]
    return np.append(y, 1.0 - y.sum())


def kkt_gap(S, b, p, active_tol: float = 0.0) -> float:
    """Largest violation of the simplex-LS optimality conditions at ``p``."""
    g = 2.0 * S.T @ (S @ p - b)
    act = p > active_tol
    lam = float(np.mean(g[act]))
    gap = float(np.max(np.abs(g[act] - lam)))
    if (~act).any():
        gap = max(gap, float(np.max(lam - g[~act])))
    return max(gap, 0.0)


def solve_simplex_ls(S, b, maxiter: int | None = None, warm_start=None) -> SimplexLsResult:
    """Solve the simplex-constrained least-squares problem.

    Parameters
    ----------
    S : array_like, shape (m, n)
        Design matrix, one column per candidate support point.
    b : array_like, shape (m,)
        Target vector.
    maxiter : int, optional
        Iteration cap; defaults to ``max(100, 10 n)``.
    warm_start : array_like, optional
        Feasible starting weights; skips the penalised NNLS stage.

    Returns
    -------
    SimplexLsResult
        ``certified`` is False when the iteration cap was hit or the KKT gap
        exceeds ``1e-8 (1 + ||b||)``.
    """
    S = np.asarray(S, dtype=float)
    b = np.asarray(b, dtype=float)
    if S.ndim != 2 or b.ndim != 1 or S.shape[0] != b.shape[0] or S.shape[1] < 1:
        raise ValueError("S must be (m, n) with n >= 1 and b of length m")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in the least-squares problem")
    m, n = S.shape
    if maxiter is None:
        maxiter = max(100, 10 * n)
    bnorm = float(np.linalg.norm(b))
    cert_tol = 1e-8 * (1.0 + bnorm)
    if n == 1:
        p = np.ones(1)
        return SimplexLsResult(p, float(np.linalg.norm(S @ p - b)), 0.0, True, 0)

    colnorm = float(np.max(np.linalg.norm(S, axis=0)))
    if warm_start is None:
        gamma = 1e4 * (1.0 + colnorm)
        A = np.vstack([S, np.full((1, n), gamma)])
        rhs = np.append(b, gamma)
        x, _ = _core.nnls(np.ascontiguousarray(A), rhs, max(3 * n, 30))
    else:
        x = np.asarray(warm_start, dtype=float).copy()
    if not np.any(x > 0):
        # fall back to the best vertex
        x = np.zeros(n)
        x[int(np.argmin(np.linalg.norm(S - b[:, None], axis=0)))] = 1.0
    p = np.where(x > 0, x, 0.0)
    p /= p.sum()

    add_tol = 1e-12 * (1.0 + bnorm) * (1.0 + colnorm)
    passive = p > 0
    it = 0
    last_added = -1
    done = False
    while it < maxiter:
        it += 1
        idx = np.flatnonzero(passive)
        z = _eq_solve(S, b, idx)
        if np.all(z > 0):
            p = np.zeros(n)
            p[idx] = z
            g = 2.0 * S.T @ (S @ p - b)
            lam = float(np.mean(g[idx]))
            cand = np.where(passive, np.inf, g)
            j = int(np.argmin(cand))
            if cand[j] >= lam - add_tol or j == last_added:
                done = True
                break
            passive[j] = True
            last_added = j
            continue
        # step back toward the feasible iterate until a coordinate hits zero
        pz = p[idx]
        neg = z <= 0
        alpha = float(np.min(pz[neg] / (pz[neg] - z[neg])))
        pz = pz + alpha * (z - pz)
        pz[neg & (pz <= 1e-15)] = 0.0
        pz[pz < 1e-15] = 0.0
        p = np.zeros(n)
        p[idx] = pz
        if p.sum() <= 0:
            p[idx[np.argmax(z)]] = 1.0
        p /= p.sum()
        passive = p > 0
        last_added = -1

    gap = kkt_gap(S, b, p)
    resid = float(np.linalg.norm(S @ p - b))
    return SimplexLsResult(p, resid, gap, bool(done and gap <= cert_tol), it)
