"""Nonparametric maximum likelihood for PSD mixtures.

The fit alternates two steps, in the style of the constrained Newton method:

* scan the directional-derivative (gradient) function over a grid of
  ``theta`` values, refine each positive local maximum by golden-section
  search and add it to the support with zero mass;
* re-solve the weights from a second-order expansion of the log-likelihood,
  which is a least-squares problem over the simplex, followed by a
  backtracking line search that keeps the log-likelihood nondecreasing.

The same driver (:func:`expand_support`) also runs the weighted least-squares
fits in :mod:`psdmix.wlse`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _core
from .kernels import KernelSpec
from .metrics import EmpiricalPmf
from .mixtures import DiscreteMixing, MixturePmf
from .simplex_ls import solve_simplex_ls


@dataclass(frozen=True)
class FitConfig:
    theta_lo: float | None = None
    theta_hi: float | None = None
    grid_size: int = 100
    grad_tol: float = 1e-6
    obj_tol: float = 1e-8
    prune_tol: float = 1e-10
    merge_tol: float = 1e-6
    max_iter: int = 500
    refine_iters: int = 40

    def resolve(self, kernel: KernelSpec, max_obs: int) -> "FitConfig":
        """Fill in the default theta interval for ``kernel`` and the data."""
        lo = 0.0 if self.theta_lo is None else float(self.theta_lo)
        if self.theta_hi is not None:
            hi = float(self.theta_hi)
        elif math.isinf(kernel.radius):
            hi = float(max_obs) + 1.0
        else:
            hi = kernel.radius - 1e-6
        cfg = replace(self, theta_lo=lo, theta_hi=hi)
        if not 0 <= lo < hi < kernel.radius:
            raise ValueError(f"need 0 <= theta_lo < theta_hi < {kernel.radius}, got [{lo}, {hi}]")
        if self.grid_size < 10:
            raise ValueError("grid_size must be at least 10")
        return cfg

    def grid(self) -> np.ndarray:
        return np.linspace(self.theta_lo, self.theta_hi, self.grid_size)


@dataclass(frozen=True)
class FitResult:
    mixing: DiscreteMixing
    objective: float
    grad_sup: float
    iterations: int
    converged: bool
    kernel: KernelSpec
    trace: tuple = ()
    estimator: str = "mle"
    alpha: float | None = None
    flags: tuple = ()

    @property
    def mixture(self) -> MixturePmf:
        return MixturePmf(self.kernel, self.mixing)


class CountData:
    """Distinct observed values with their multiplicities."""

    def __init__(self, observations):
        emp = observations if isinstance(observations, EmpiricalPmf) else EmpiricalPmf.from_observations(observations)
        self.emp = emp
        self.values = emp.values.astype(float)
        self.counts = emp.counts.astype(float)
        self.n = float(emp.n)
        self.log_counts = np.log(self.counts)
        self.sqrt_counts = np.sqrt(self.counts)


def log_kernel_matrix(kernel: KernelSpec, thetas, ks, log_b=None) -> np.ndarray:
    """``log f_theta(k)`` as a ``(len(thetas), len(ks))`` array."""
    thetas = np.asarray(thetas, dtype=float)
    ks = np.asarray(ks, dtype=float)
    if log_b is None:
        log_b = kernel.log_coeff(ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.log(thetas)
        klog = np.where(ks[None, :] == 0, 0.0, ks[None, :] * logt[:, None])
    return log_b[None, :] + klog - kernel.log_normalizer(thetas)[:, None]


# --- generic support-expansion driver ---------------------------------------


def _search_brackets(grid, vals, support):
    """Brackets for local refinement of the gradient.

    One bracket per grid local maximum (whatever its sign) and one of a grid
    step either side of every support point, where a slightly misplaced atom
    leaves a narrow positive bump that the grid itself can miss.
    """
    G = vals.size
    left = np.r_[-np.inf, vals[:-1]]
    right = np.r_[vals[1:], -np.inf]
    idx = np.flatnonzero((vals > left) & (vals >= right))
    step = grid[1] - grid[0]
    lo = np.concatenate([grid[np.maximum(idx - 1, 0)], np.maximum(support - step, grid[0])])
    hi = np.concatenate([grid[np.minimum(idx + 1, G - 1)], np.minimum(support + step, grid[-1])])
    return lo, hi


def _prune_merge(support, p, prune_tol, merge_abs):
    keep = p > prune_tol
    support, p = support[keep], p[keep]
    order = np.argsort(support, kind="stable")
    support, p = support[order], p[order]
    if support.size > 1 and np.any(np.diff(support) <= merge_abs):
        s_out, p_out = [support[0]], [p[0]]
        for s, w in zip(support[1:], p[1:]):
            if s - s_out[-1] <= merge_abs:
                tot = p_out[-1] + w
                s_out[-1] = (s_out[-1] * p_out[-1] + s * w) / tot
                p_out[-1] = tot
            else:
                s_out.append(s)
                p_out.append(w)
        support, p = np.array(s_out), np.array(p_out)
    return support, p / p.sum()


@dataclass
class ExpansionOutcome:
    support: np.ndarray
    weights: np.ndarray
    score: float
    grad_sup: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


def expand_support(problem, cfg: FitConfig, support, weights, tol_abs: float) -> ExpansionOutcome:
    """Maximise ``problem.score`` over discrete mixings by support expansion.

    The directional derivative of the score toward ``delta_theta`` must be
    linear in the kernel: ``sum_j c_j f_theta(k_j) + c_0`` with
    ``(c, c_0) = problem.coefs(support, p)`` over ``problem.ks``.  The problem
    also supplies ``score``, ``weight_step`` and ``grid_F`` (the kernel
    evaluated on ``cfg.grid()``).
    """
    grid = cfg.grid()
    merge_abs = cfg.merge_tol * max(abs(cfg.theta_hi), 1e-12)
    code, r = problem.kernel.code, float(problem.kernel.r)
    support = np.asarray(support, dtype=float)
    p = np.asarray(weights, dtype=float)
    score = problem.score(support, p)
    trace = [score]
    stalled = 0
    converged = False
    it = 0
    grad_sup = math.inf
    while True:
        coef, offset = problem.coefs(support, p)
        dg = problem.grid_F @ coef + offset
        lo, hi = _search_brackets(grid, dg, support)
        new_t, new_v = _core.golden_max_lin(
            code, r, lo, hi, problem.ks, problem.log_b, coef, offset, cfg.refine_iters
        )
        at_support = _core.lin_grad(code, r, support, problem.ks, problem.log_b, coef, offset)
        grad_sup = max(
            float(np.max(dg)),
            float(np.max(new_v)) if new_v.size else -math.inf,
            float(np.max(np.abs(at_support[p > cfg.prune_tol]))),
            0.0,
        )
        if grad_sup <= tol_abs:
            converged = True
            break
        if it >= cfg.max_iter or stalled >= 20:
            break
        it += 1
        add = new_t[new_v > 0]
        ext_s = np.concatenate([support, add])
        ext_p = np.concatenate([p, np.zeros(add.size)])
        p_new = problem.weight_step(ext_s, ext_p)
        keep = p_new > 0
        full_s, full_p = ext_s[keep], p_new[keep] / p_new[keep].sum()
        full_score = problem.score(full_s, full_p)
        new_support, new_p = _prune_merge(ext_s, p_new, cfg.prune_tol, merge_abs)
        new_score = problem.score(new_support, new_p)
        if new_score < full_score - 1e-12 * (1.0 + abs(full_score)):
            # a freshly added atom can start with a tiny but useful weight
            # (far-out data cells); pruning it would undo the step
            new_support, new_p, new_score = full_s, full_p, full_score
        if new_score < score:
            new_support, new_p, new_score = support, p, score
        gain = new_score - score
        stalled = stalled + 1 if gain <= cfg.obj_tol * 1e-6 * (1.0 + abs(score)) else 0
        support, p, score = new_support, new_p, new_score
        trace.append(score)
    return ExpansionOutcome(support, p, score, grad_sup, it, converged, trace)


def lse_rows(logf, p):
    """``log sum_l p_l exp(logf[l, :])`` column-wise, without overflow."""
    with np.errstate(divide="ignore"):
        m = np.max(logf, axis=0)
        m = np.where(np.isfinite(m), m, 0.0)
        s = p @ np.exp(logf - m[None, :])
        return np.log(s) + m


# --- likelihood problem ------------------------------------------------------


class LikelihoodProblem:
    """Log-likelihood of counted data as a function of a discrete mixing."""

    def __init__(self, kernel: KernelSpec, data: CountData, grid=None):
        self.kernel = kernel
        self.data = data
        self.ks = data.values
        self.log_b = kernel.log_coeff(data.values)
        if grid is not None:
            self.grid_F = np.exp(log_kernel_matrix(kernel, grid, data.values, self.log_b))

    def logf(self, thetas):
        return log_kernel_matrix(self.kernel, thetas, self.ks, self.log_b)

    def log_pi(self, support, p):
        return lse_rows(self.logf(support), p)

    def score(self, support, p):
        return float(self.data.counts @ self.log_pi(support, p))

    def coefs(self, support, p):
        coef = np.exp(np.minimum(self.data.log_counts - self.log_pi(support, p), 700.0))
        return coef, -self.data.n

    def grad(self, thetas, support, p):
        coef, offset = self.coefs(support, p)
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        return _core.lin_grad(self.kernel.code, float(self.kernel.r), thetas, self.ks, self.log_b, coef, offset)

    def weight_step(self, support, p):
        log_pi = self.log_pi(support, p)
        ratio = np.exp(self.logf(support) - log_pi[None, :]).T
        A = self.data.sqrt_counts[:, None] * ratio
        c = 2.0 * self.data.sqrt_counts
        p_ls = solve_simplex_ls(A, c, warm_start=p).weights
        old = float(self.data.counts @ log_pi)
        step = 1.0
        for _ in range(31):
            trial = p + step * (p_ls - p)
            if self.score(support, trial) >= old:
                return trial
            step *= 0.5
        return p


def loglik(data, kernel: KernelSpec, Q: DiscreteMixing) -> float:
    """``sum_j n_j log pi(k_j; Q)``; ``-inf`` when an observed cell has zero mass."""
    cd = data if isinstance(data, CountData) else CountData(data)
    return LikelihoodProblem(kernel, cd).score(Q.support, Q.weights)


def loglik_gradient(theta, data, kernel: KernelSpec, Q: DiscreteMixing):
    """Directional derivative of the log-likelihood at ``Q`` toward ``delta_theta``."""
    cd = data if isinstance(data, CountData) else CountData(data)
    out = LikelihoodProblem(kernel, cd).grad(theta, Q.support, Q.weights)
    return float(out[0]) if np.ndim(theta) == 0 else out


def _initial_support(cfg: FitConfig):
    span = cfg.theta_hi - cfg.theta_lo
    return np.array([cfg.theta_lo + 0.25 * span, cfg.theta_lo + 0.75 * span]), np.array([0.5, 0.5])


def fit_npmle(observations, kernel: KernelSpec, config: FitConfig | None = None, init: DiscreteMixing | None = None) -> FitResult:
    """Fit the NPMLE of the mixing distribution.

    ``init`` optionally replaces the default two-point starting mixing; the
    optimum does not depend on it.
    """
    data = CountData(observations)
    cfg = (config or FitConfig()).resolve(kernel, int(data.values[-1]))
    problem = LikelihoodProblem(kernel, data, cfg.grid())
    if init is None:
        s0, p0 = _initial_support(cfg)
    else:
        s0 = np.clip(init.support, cfg.theta_lo, cfg.theta_hi)
        p0 = init.weights
    out = expand_support(problem, cfg, s0, p0, cfg.grad_tol * data.n)
    mixing = DiscreteMixing(out.support, out.weights)
    return FitResult(
        mixing=mixing,
        objective=out.score,
        grad_sup=out.grad_sup,
        iterations=out.iterations,
        converged=out.converged,
        kernel=kernel,
        trace=tuple(out.trace),
    )
