"""Mixing distributions and mixture pmfs ``pi(k; Q) = int f_theta(k) dQ(theta)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special as sp

from .kernels import KernelSpec, invert_psd, log_pmf, sf

MERGE_REL = 1e-8


class DiscreteMixing:
    """Finitely many atoms ``theta_j`` with weights ``p_j``."""

    kind = "discrete"

    def __init__(self, support, weights):
        support = np.atleast_1d(np.asarray(support, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if support.shape != weights.shape or support.ndim != 1 or support.size == 0:
            raise ValueError("support and weights must be nonempty vectors of equal length")
        if np.any(~np.isfinite(support)) or np.any(support < 0):
            raise ValueError("support points must be finite and nonnegative")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {total!r}, not 1")
        order = np.argsort(support, kind="stable")
        support, weights = support[order], weights[order]
        support, weights = _merge(support, weights, MERGE_REL * max(1.0, support[-1]))
        self.support = support
        self.weights = weights / weights.sum()
        self.support.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def upper(self) -> float:
        return float(self.support[-1])

    def sample_theta(self, rng, n):
        idx = np.searchsorted(np.cumsum(self.weights), rng.random(n), side="right")
        return self.support[np.minimum(idx, self.support.size - 1)]

    def to_record(self):
        return {"kind": "discrete", "support": self.support.tolist(), "weights": self.weights.tolist()}

    def __repr__(self):
        return f"DiscreteMixing(support={self.support.tolist()}, weights={self.weights.tolist()})"

    def __eq__(self, other):
        return (
            isinstance(other, DiscreteMixing)
            and np.array_equal(self.support, other.support)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None


def _merge(support, weights, tol):
    if support.size < 2 or np.all(np.diff(support) > tol):
        return support, weights
    out_s, out_w = [support[0]], [weights[0]]
    for s, w in zip(support[1:], weights[1:]):
        if s - out_s[-1] <= tol:
            tot = out_w[-1] + w
            if tot > 0:
                out_s[-1] = (out_s[-1] * out_w[-1] + s * w) / tot
            out_w[-1] = tot
        else:
            out_s.append(s)
            out_w.append(w)
    return np.array(out_s), np.array(out_w)


def point_mass(theta: float) -> DiscreteMixing:
    return DiscreteMixing([theta], [1.0])


@dataclass(frozen=True)
class UniformMixing:
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError("uniform mixing needs 0 <= lo < hi")

    @property
    def upper(self):
        return self.hi

    def density(self, theta):
        return np.full_like(np.asarray(theta, dtype=float), 1.0 / (self.hi - self.lo))

    def sample_theta(self, rng, n):
        return self.lo + (self.hi - self.lo) * rng.random(n)

    def to_record(self):
        return {"kind": "uniform", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class ScaledBetaMixing:
    """Beta(alpha, beta) moved from [0, 1] onto [lo, hi]."""

    alpha: float
    beta: float
    lo: float
    hi: float
    kind = "scaled_beta"

    def __post_init__(self):
        if not 0 <= self.lo < self.hi:
            raise ValueError("scaled beta mixing needs 0 <= lo < hi")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("beta shape parameters must be positive")

    @property
    def upper(self):
        return self.hi

    def density(self, theta):
        width = self.hi - self.lo
        x = (np.asarray(theta, dtype=float) - self.lo) / width
        logd = (self.alpha - 1) * np.log(x) + (self.beta - 1) * np.log1p(-x) - sp.betaln(self.alpha, self.beta)
        return np.exp(logd) / width

    def sample_theta(self, rng, n):
        return self.lo + (self.hi - self.lo) * sp.betaincinv(self.alpha, self.beta, rng.random(n))

    def to_record(self):
        return {"kind": "scaled_beta", "alpha": self.alpha, "beta": self.beta, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class PointMassPlus:
    """``mass0 * delta_0 + (1 - mass0) * rest``."""

    mass0: float
    rest: object
    kind = "point_mass_plus"

    def __post_init__(self):
        if not 0 <= self.mass0 < 1:
            raise ValueError("mass0 must lie in [0, 1)")

    @property
    def upper(self):
        return self.rest.upper

    def sample_theta(self, rng, n):
        at_zero = rng.random(n) < self.mass0
        return np.where(at_zero, 0.0, self.rest.sample_theta(rng, n))

    def to_record(self):
        return {"kind": "point_mass_plus", "mass0": self.mass0, "rest": self.rest.to_record()}


def mixing_from_record(rec: dict):
    kind = rec["kind"]
    if kind == "discrete":
        return DiscreteMixing(rec["support"], rec["weights"])
    if kind == "uniform":
        return UniformMixing(float(rec["lo"]), float(rec["hi"]))
    if kind == "scaled_beta":
        return ScaledBetaMixing(float(rec["alpha"]), float(rec["beta"]), float(rec["lo"]), float(rec["hi"]))
    if kind == "point_mass_plus":
        return PointMassPlus(float(rec["mass0"]), mixing_from_record(rec["rest"]))
    raise ValueError(f"unknown mixing kind {kind!r}")


def _scaled_quad(logf, density, lo, hi):
    """Integrate ``exp(logf) * density`` over [lo, hi] to ~1e-10 relative accuracy."""
    grid = np.linspace(lo, hi, 65)
    with np.errstate(divide="ignore"):
        peak = float(np.max(logf(grid)))
    if peak == -math.inf:
        return 0.0
    pts = grid[np.argmax(logf(grid))]
    points = [pts] if lo < pts < hi else None

    def integrand(t):
        return math.exp(float(logf(t)) - peak) * float(density(t))

    val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200, points=points)
    return val * math.exp(peak)


@dataclass(frozen=True, eq=False)
class MixturePmf:
    kernel: KernelSpec
    mixing: object
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mixing.upper >= self.kernel.radius:
            raise ValueError("mixing support reaches the radius of convergence")

    def pmf(self, k):
        """Mixture probabilities at integer ``k`` (scalar or array)."""
        k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = self._eval(k_arr)
        return out.reshape(np.shape(k)) if np.ndim(k) else float(out[0])

    def _eval(self, ks):
        return _eval_mixing(self.kernel, self.mixing, ks, self._cache)

    def tail(self, K: int) -> float:
        """``sum_{k > K} pi(k)``; equals 1 for ``K < 0``."""
        if K < 0:
            return 1.0
        key = ("tail", int(K))
        if key not in self._cache:
            self._cache[key] = _tail_mixing(self.kernel, self.mixing, int(K))
        return self._cache[key]

    def horizon(self, eps: float) -> int:
        return truncation_horizon(self, eps)

    def sample(self, n: int, seed) -> np.ndarray:
        return sample_mixture(self, n, seed)


def _eval_mixing(kernel, mixing, ks, cache):
    if isinstance(mixing, DiscreteMixing):
        logf = log_pmf(kernel, mixing.support[None, :], ks[:, None].astype(float))
        return np.exp(logf) @ mixing.weights
    if isinstance(mixing, PointMassPlus):
        rest = _eval_mixing(kernel, mixing.rest, ks, cache)
        return mixing.mass0 * (ks == 0) + (1.0 - mixing.mass0) * rest
    out = np.empty(ks.size)
    for i, k in enumerate(ks):
        key = ("pmf", id(mixing), int(k))
        if key not in cache:
            cache[key] = _scaled_quad(
                lambda t, k=float(k): log_pmf(kernel, t, k), mixing.density, mixing.lo, mixing.hi
            )
        out[i] = cache[key]
    return out


def _tail_mixing(kernel, mixing, K):
    if isinstance(mixing, DiscreteMixing):
        return float(np.clip(sf(kernel, mixing.support, K) @ mixing.weights, 0.0, 1.0))
    if isinstance(mixing, PointMassPlus):
        return (1.0 - mixing.mass0) * _tail_mixing(kernel, mixing.rest, K)

    def logsf(t):
        with np.errstate(divide="ignore"):
            return np.log(sf(kernel, t, K))

    return float(np.clip(_scaled_quad(logsf, mixing.density, mixing.lo, mixing.hi), 0.0, 1.0))


def eval_mixture(m: MixturePmf, k):
    return m.pmf(k)


def tail_mass(m: MixturePmf, K: int) -> float:
    return m.tail(K)


def truncation_horizon(m, eps: float) -> int:
    """Smallest ``K`` with ``tail(K) < eps`` (doubling, then bisection)."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if m.tail(0) < eps:
        return 0
    lo, hi = 0, 1
    while m.tail(hi) >= eps:
        lo, hi = hi, hi * 2
        if hi > 1 << 40:
            raise RuntimeError("tail does not fall below eps")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if m.tail(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi


def sample_mixture(m: MixturePmf, n: int, seed) -> np.ndarray:
    """Two-stage draw: ``theta`` from the mixing law, then ``k`` from ``f_theta``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    thetas = np.asarray(m.mixing.sample_theta(rng, n), dtype=float)
    return invert_psd(m.kernel, thetas, rng.random(n))
