"""Empirical pmfs and distances between pmfs on the nonnegative integers.

Every pmf handle exposes ``pmf(k)``, ``tail(K)`` (mass strictly above ``K``)
and ``horizon(eps)`` (smallest ``K`` with ``tail(K) < eps``).  Distances sum
exactly up to a horizon chosen from the tails, so the neglected part is
bounded rather than estimated.
"""
from __future__ import annotations

import math

import numpy as np

DEFAULT_TOL = 1e-8
# horizons are taken this much tighter than the requested accuracy
HORIZON_MARGIN = 1e-3
# long horizons are summed in blocks of this many cells to bound memory
BLOCK = 1 << 16


class EmpiricalPmf:
    """Relative frequencies of observed counts."""

    def __init__(self, values, counts):
        values = np.asarray(values, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        if values.size == 0:
            raise ValueError("no observations")
        if np.any(counts <= 0) or np.any(values < 0):
            raise ValueError("counts must be positive and values nonnegative")
        order = np.argsort(values)
        self.values = values[order]
        self.counts = counts[order]
        if np.any(np.diff(self.values) == 0):
            raise ValueError("values must be distinct")
        self.n = int(self.counts.sum())
        self.freqs = self.counts / self.n

    @classmethod
    def from_observations(cls, observations) -> "EmpiricalPmf":
        obs = np.asarray(observations)
        if obs.size == 0:
            raise ValueError("no observations")
        if np.any(obs < 0) or np.any(obs != np.round(obs)):
            raise ValueError("observations must be nonnegative integers")
        values, counts = np.unique(obs.astype(np.int64), return_counts=True)
        return cls(values, counts)

    @property
    def max_value(self) -> int:
        return int(self.values[-1])

    def as_dict(self) -> dict:
        return {int(v): float(f) for v, f in zip(self.values, self.freqs)}

    def pmf(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
        idx = np.searchsorted(self.values, k_arr)
        idx_c = np.minimum(idx, self.values.size - 1)
        out = np.where(self.values[idx_c] == k_arr, self.freqs[idx_c], 0.0)
        return out.reshape(np.shape(k)) if np.ndim(k) else float(out[0])

    def tail(self, K: int) -> float:
        return float(self.freqs[self.values > K].sum())

    def horizon(self, eps: float) -> int:
        above = self.values[np.cumsum(self.freqs[::-1])[::-1] >= eps]
        return int(above[-1]) if above.size else 0

    def __repr__(self):
        return f"EmpiricalPmf(n={self.n}, {self.as_dict()})"


def empirical_pmf(observations) -> EmpiricalPmf:
    return EmpiricalPmf.from_observations(observations)


class ArrayPmf:
    """Explicit finite pmf ``p[0..K]`` with zero mass beyond."""

    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=float)

    def pmf(self, k):
        k_arr = np.atleast_1d(np.asarray(k, dtype=np.int64))
        ok = k_arr < self.probs.size
        out = np.where(ok, self.probs[np.minimum(k_arr, self.probs.size - 1)], 0.0)
        return out.reshape(np.shape(k)) if np.ndim(k) else float(out[0])

    def tail(self, K: int) -> float:
        return float(self.probs[max(K + 1, 0):].sum())

    def horizon(self, eps: float) -> int:
        tails = np.cumsum(self.probs[::-1])[::-1]
        # tails[j] = mass at k >= j, so tail(K) = tails[K + 1]
        bad = np.flatnonzero(tails >= eps)
        return int(bad[-1]) if bad.size else 0


def _common_horizon(p, q, eps: float) -> int:
    eps = max(eps * HORIZON_MARGIN, 1e-300)
    return max(p.horizon(eps / 2.0), q.horizon(eps / 2.0))


def _blocks(start: int, stop: int):
    """Consecutive ``arange`` chunks covering ``start..stop`` inclusive."""
    for lo in range(start, stop + 1, BLOCK):
        yield np.arange(lo, min(lo + BLOCK, stop + 1))


def hellinger(p, q, tol: float = DEFAULT_TOL) -> float:
    """``h(p, q) = (1/2 sum (sqrt p - sqrt q)^2)^{1/2}``, accurate to ``tol``.

    For probability vectors this equals ``(1 - sum sqrt(p q))^{1/2}``.  The
    squared form avoids cancellation when ``h`` is small.  The neglected tail
    contributes at most ``(tail_p + tail_q) / 2`` to ``h^2``.
    """
    if not 0 < tol <= 1e-3:
        raise ValueError("tol must lie in (0, 1e-3]")
    K = _common_horizon(p, q, 2.0 * tol * tol)
    total = 0.0
    for ks in _blocks(0, K):
        d = np.sqrt(p.pmf(ks)) - np.sqrt(q.pmf(ks))
        total += float(np.dot(d, d))
    return float(min(1.0, math.sqrt(0.5 * total)))


def lp_distance(p, q, order: float = 2.0, tol: float = DEFAULT_TOL) -> float:
    """``l_p`` distance for ``order`` in [1, inf], accurate to ``tol``."""
    if not order >= 1:
        raise ValueError("order must be >= 1")
    if math.isinf(order):
        K = _common_horizon(p, q, tol)
        return float(max(np.max(np.abs(p.pmf(ks) - q.pmf(ks))) for ks in _blocks(0, K + 1)))
    # tail terms obey |a - b|^r <= |a - b| <= a + b, so tails below tol^r suffice
    K = _common_horizon(p, q, tol**order)
    total = 0.0
    for ks in _blocks(0, K):
        d = np.abs(p.pmf(ks) - q.pmf(ks))
        total += float(d.sum()) if order == 1 else float(np.sum(d**order))
    if order == 1:
        return total
    return float(total ** (1.0 / order))


def distances(p, q, tol: float = DEFAULT_TOL) -> dict:
    """Hellinger, l1 and l2 in one call."""
    return {"h": hellinger(p, q, tol), "l1": lp_distance(p, q, 1, tol), "l2": lp_distance(p, q, 2, tol)}


def weighted_chisq(emp, ref, weight_ref, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """``(sum (emp(k) - ref(k))^2 / weight_ref(k)^alpha)^{1/2}``.

    Summed over the observed values and ``ref``'s horizon at ``tol^2``.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    K = max(emp.horizon(tol * tol), ref.horizon(tol * tol))
    ks = np.arange(K + 1)
    e = emp.pmf(ks)
    r = ref.pmf(ks)
    diff2 = (e - r) ** 2
    if alpha == 0:
        return float(math.sqrt(diff2.sum()))
    w = weight_ref.pmf(ks)
    need = (e > 0) | (r > 0)
    bad = np.flatnonzero(need & (w <= 0))
    if bad.size:
        raise ZeroDivisionError(f"weight pmf vanishes at k={int(ks[bad[0]])}")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(need, diff2 / w**alpha, 0.0)
    return float(math.sqrt(terms.sum()))


def tail_region_ratios(truth, estimate, start: int, tol: float = 1e-12) -> dict:
    """Error ratios of the empirical estimator vs ``estimate`` on ``{start, start+1, ...}``.

    The empirical pmf is zero on that region, so its errors reduce to the
    truth's own tail quantities.  Returns ``{"h", "l1", "l2"}``; a ratio is
    ``inf`` when the estimate matches the truth exactly there.
    """
    K = max(truth.horizon(tol * tol), estimate.horizon(tol * tol), start)
    acc = np.zeros(5)
    for ks in _blocks(start, K):
        t = truth.pmf(ks)
        e = estimate.pmf(ks)
        acc += [t.sum(), np.dot(t, t), np.sum((np.sqrt(e) - np.sqrt(t)) ** 2), np.sum(np.abs(e - t)),
                np.sum((e - t) ** 2)]
    num = {"h": math.sqrt(acc[0]), "l1": float(acc[0]), "l2": math.sqrt(acc[1])}
    den = {"h": math.sqrt(acc[2]), "l1": float(acc[3]), "l2": math.sqrt(acc[4])}
    return {key: (num[key] / den[key] if den[key] > 0 else math.inf) for key in num}
