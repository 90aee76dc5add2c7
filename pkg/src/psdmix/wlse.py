"""Weighted least-squares and hybrid estimators.

The weighted LSE minimises ``sum_k w(k) (pi_bar(k) - pi(k; Q))^2`` over
mixings ``Q`` with weights ``w(k) = pi_hat(k)^(-alpha)`` taken from the
NPMLE.  The hybrid estimator keeps the empirical pmf up to a cutoff and
switches to the NPMLE beyond it.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from .kernels import KernelSpec
from .metrics import EmpiricalPmf
from .mixtures import DiscreteMixing, MixturePmf
from .npmle import FitConfig, FitResult, expand_support, fit_npmle, log_kernel_matrix
from .simplex_ls import solve_simplex_ls

WEIGHT_FLOOR = 1e-300
WEIGHT_CAP = 1e15
TAIL_EPS = 1e-10
EXTRA_CELLS = 200


class WeightedLsProblem:
    """``-D_K(Q)`` and its directional derivative, arranged for :func:`expand_support`."""

    def __init__(self, kernel: KernelSpec, emp: EmpiricalPmf, w, grid=None):
        self.kernel = kernel
        self.w = np.asarray(w, dtype=float)
        self.ks = np.arange(self.w.size, dtype=float)
        self.log_b = kernel.log_coeff(self.ks)
        self.target = emp.pmf(self.ks.astype(np.int64))
        self.sw = np.sqrt(self.w)
        if grid is not None:
            self.grid_F = np.exp(log_kernel_matrix(kernel, grid, self.ks, self.log_b))

    def F(self, support):
        return np.exp(log_kernel_matrix(self.kernel, support, self.ks, self.log_b))

    def objective(self, support, p):
        resid = p @ self.F(support) - self.target
        return float(np.dot(self.w, resid * resid))

    def score(self, support, p):
        return -self.objective(support, p)

    def coefs(self, support, p):
        pi = p @ self.F(support)
        c = -2.0 * self.w * (pi - self.target)
        return c, -float(np.dot(c, pi))

    def gradient(self, thetas, support, p):
        """``d(theta; Q) = 2 sum_k w(k) [pi(k) - pi_bar(k)] [f_theta(k) - pi(k)]``."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        c, c0 = self.coefs(support, p)
        return -(np.exp(log_kernel_matrix(self.kernel, thetas, self.ks, self.log_b)) @ c + c0)

    def weight_step(self, support, p):
        S = self.sw[:, None] * self.F(support).T
        b = self.sw * self.target
        p_new = solve_simplex_ls(S, b, warm_start=p).weights
        if self.objective(support, p_new) > self.objective(support, p):
            return p
        return p_new


def npmle_weights(mixture: MixturePmf, K: int, alpha: float):
    """``pi_hat(k)^(-alpha)`` for ``k <= K`` with the floor/cap; flags whether either bit."""
    pi_hat = mixture.pmf(np.arange(K + 1))
    floored = bool(np.any(pi_hat < WEIGHT_FLOOR))
    w = np.maximum(pi_hat, WEIGHT_FLOOR) ** (-alpha)
    capped = bool(np.any(w > WEIGHT_CAP))
    return np.minimum(w, WEIGHT_CAP), floored or capped


def wlse_horizon(mixture: MixturePmf, max_obs: int) -> int:
    return max(max_obs, min(mixture.horizon(TAIL_EPS), max_obs + EXTRA_CELLS))


def wlse_gradient(theta, Q: DiscreteMixing, weights, emp: EmpiricalPmf, K: int, kernel: KernelSpec):
    """Directional derivative of ``D_K`` at ``Q`` toward ``delta_theta``."""
    w = np.asarray(weights, dtype=float)[: K + 1]
    prob = WeightedLsProblem(kernel, emp, w)
    out = prob.gradient(theta, Q.support, Q.weights)
    return float(out[0]) if np.ndim(theta) == 0 else out


def fit_wlse(observations, kernel: KernelSpec, alpha: float, npmle: FitResult | None = None,
             config: FitConfig | None = None) -> FitResult:
    """Weighted least-squares estimate for ``alpha`` in [0, 1).

    The NPMLE (fitted here when not supplied) provides both the weights and
    the starting mixing.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    emp = observations if isinstance(observations, EmpiricalPmf) else EmpiricalPmf.from_observations(observations)
    cfg = (config or FitConfig()).resolve(kernel, emp.max_value)
    if npmle is None:
        npmle = fit_npmle(emp, kernel, config)
    K = wlse_horizon(npmle.mixture, emp.max_value)
    w, floored = npmle_weights(npmle.mixture, K, alpha)
    flags = []
    if floored:
        warnings.warn("NPMLE cell probabilities hit the weight floor/cap", RuntimeWarning, stacklevel=2)
        flags.append("weight_floor")
    problem = WeightedLsProblem(kernel, emp, w, cfg.grid())
    s0 = np.clip(npmle.mixing.support, cfg.theta_lo, cfg.theta_hi)
    out = expand_support(problem, cfg, s0, npmle.mixing.weights, cfg.grad_tol)
    mixing = DiscreteMixing(out.support, out.weights)
    if mixing.support.size > emp.max_value + 1:
        flags.append("support_exceeds_max_obs_plus_one")
    return FitResult(
        mixing=mixing,
        objective=-out.score,
        grad_sup=out.grad_sup,
        iterations=out.iterations,
        converged=out.converged,
        kernel=kernel,
        trace=tuple(-s for s in out.trace),
        estimator=f"wlse:{alpha:g}",
        alpha=float(alpha),
        flags=tuple(flags),
    )


class HybridPmf:
    """Empirical pmf up to ``k_tilde``, NPMLE beyond; deliberately not renormalised."""

    def __init__(self, empirical: EmpiricalPmf, tail_part: MixturePmf, k_tilde: int):
        self.empirical = empirical
        self.tail_part = tail_part
        self.k_tilde = int(k_tilde)
        self.total_mass = float(
            empirical.pmf(np.arange(self.k_tilde + 1)).sum() + tail_part.tail(self.k_tilde)
        )

    def pmf(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = np.where(k_arr <= self.k_tilde, self.empirical.pmf(k_arr), self.tail_part.pmf(k_arr))
        return out.reshape(np.shape(k)) if np.ndim(k) else float(out[0])

    def tail(self, K: int) -> float:
        if K >= self.k_tilde:
            return self.tail_part.tail(K)
        inner = self.empirical.pmf(np.arange(max(K + 1, 0), self.k_tilde + 1)).sum()
        return float(inner + self.tail_part.tail(self.k_tilde))

    def horizon(self, eps: float) -> int:
        K = self.tail_part.horizon(eps)
        if K > self.k_tilde:
            return K
        for j in range(self.k_tilde + 1):
            if self.tail(j) < eps:
                return j
        return self.k_tilde


def hybrid_threshold(n: int) -> float:
    return 1.0 / math.log(n) ** 3


def hybrid_estimate(emp: EmpiricalPmf, npmle_mixture: MixturePmf, n: int | None = None) -> HybridPmf:
    """Cut over at the smallest ``K >= 1`` with NPMLE tail mass ``<= (log n)^-3``."""
    n = emp.n if n is None else int(n)
    if n < 3:
        raise ValueError("hybrid estimator needs n >= 3")
    thr = hybrid_threshold(n)
    K = 1
    while npmle_mixture.tail(K) > thr:
        K += 1
    return HybridPmf(emp, npmle_mixture, K)
