"""Percentile bootstrap intervals, coverage studies and two-fold cross-validation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import canonical_name, fit_estimators, replicate_rng
from .kernels import KernelSpec
from .metrics import EmpiricalPmf, distances
from .npmle import FitConfig, fit_npmle

MODES = {"np": "nonparametric", "nonparametric": "nonparametric",
         "param": "parametric", "parametric": "parametric"}
MAX_DROP_FRACTION = 0.05
METRICS = ("h", "l2", "l1")


@dataclass(frozen=True)
class CiTable:
    k_values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    point: np.ndarray
    mode: str
    B: int
    level: float
    dropped: int = 0

    def rows(self):
        for i, k in enumerate(self.k_values):
            yield int(k), float(self.point[i]), float(self.lower[i]), float(self.upper[i])

    @property
    def length(self) -> np.ndarray:
        return self.upper - self.lower


def percentile_ranks(B: int, level: float) -> tuple[int, int]:
    """1-based order-statistic ranks of the lower and upper endpoints."""
    # round first so that e.g. 40 * 0.025 does not ceil to 2
    lo = max(1, math.ceil(round(B * (1.0 - level) / 2.0, 9)))
    return lo, B + 1 - lo


def _k_values(k_range):
    lo, hi = (int(k_range[0]), int(k_range[1]))
    if lo < 0 or hi < lo:
        raise ValueError("k_range must be an interval 0 <= lo <= hi")
    return np.arange(lo, hi + 1)


def _check_drops(dropped: int, total: int, what: str):
    if dropped > MAX_DROP_FRACTION * total:
        raise RuntimeError(f"{dropped} of {total} {what} failed to converge (limit 5%)")


def bootstrap_ci(observations, kernel: KernelSpec, mode: str = "nonparametric", B: int = 200,
                 level: float = 0.95, k_range=(0, 10), config: FitConfig | None = None,
                 seed: int = 0, base_fit=None) -> CiTable:
    """Percentile bootstrap intervals for the NPMLE pmf values ``pi_hat(k)``.

    Parameters
    ----------
    mode : {"nonparametric", "parametric"} (or "np", "param")
        Resample the data with replacement, or draw from the fitted mixture.
    B : int
        Bootstrap replicates, at least 20.
    k_range : (int, int)
        Inclusive range of ``k`` to report.
    base_fit : FitResult, optional
        NPMLE of ``observations`` if already available.

    Notes
    -----
    Replicate ``b`` draws from its own stream keyed by ``(seed, b)``.  A replicate
    whose fit does not converge is retried once on the stream
    ``(seed, b, 1)`` and dropped if it fails again.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {sorted(MODES)}")
    mode = MODES[mode]
    if B < 20:
        raise ValueError("B must be at least 20")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    obs = np.asarray(observations)
    if obs.size == 0:
        raise ValueError("no observations")
    ks = _k_values(k_range)
    base = base_fit if base_fit is not None else fit_npmle(obs, kernel, config)
    base_mix = base.mixture
    n = obs.size

    values = []
    dropped = 0
    for b in range(B):
        for attempt in range(2):
            rng = replicate_rng(seed, b) if attempt == 0 else replicate_rng(seed, b, 1)
            if mode == "nonparametric":
                sample = obs[rng.integers(0, n, n)]
            else:
                sample = base_mix.sample(n, rng)
            fit = fit_npmle(sample, kernel, config, init=base.mixing)
            if fit.converged:
                values.append(fit.mixture.pmf(ks))
                break
        else:
            dropped += 1
    _check_drops(dropped, B, "bootstrap fits")

    vals = np.sort(np.array(values), axis=0)
    lo_rank, hi_rank = percentile_ranks(len(values), level)
    return CiTable(
        k_values=ks,
        lower=vals[lo_rank - 1],
        upper=vals[hi_rank - 1],
        point=base_mix.pmf(ks),
        mode=mode,
        B=B,
        level=float(level),
        dropped=dropped,
    )


@dataclass(frozen=True)
class CoverageResult:
    k_values: np.ndarray
    coverage: np.ndarray
    mean_length: np.ndarray
    mode: str
    reps: int


def coverage_study(scenario, n: int, B: int, reps: int, level: float, k_range, seed: int,
                   modes=("parametric",), config: FitConfig | None = None) -> dict:
    """Coverage of the bootstrap intervals for the true ``pi_0(k)``.

    Every mode in ``modes`` is evaluated on the same simulated datasets.
    Returns ``{mode: CoverageResult}``.
    """
    if reps < 20:
        raise ValueError("reps must be at least 20")
    if isinstance(scenario, str):
        from .simlab import scenario as lookup

        scenario = lookup(scenario)
    modes = [MODES[m] for m in ([modes] if isinstance(modes, str) else modes)]
    ks = _k_values(k_range)
    truth = scenario.mixture.pmf(ks)
    hits = {m: np.zeros(ks.size) for m in modes}
    length = {m: np.zeros(ks.size) for m in modes}
    for rep in range(reps):
        data = scenario.mixture.sample(n, replicate_rng(seed, 0, rep))
        base = fit_npmle(data, scenario.kernel, config)
        for j, m in enumerate(modes):
            boot_seed = int(np.random.SeedSequence([int(seed), 1, rep, j]).generate_state(1)[0])
            ci = bootstrap_ci(data, scenario.kernel, m, B, level, (ks[0], ks[-1]), config, boot_seed, base)
            hits[m] += (ci.lower <= truth) & (truth <= ci.upper)
            length[m] += ci.length
    return {m: CoverageResult(ks, hits[m] / reps, length[m] / reps, m, reps) for m in modes}


@dataclass(frozen=True)
class CvRow:
    estimator: str
    metric: str
    mean: float
    se: float
    runs: int


def two_fold_cv(observations, kernel: KernelSpec, estimators, runs: int, seed: int,
                config: FitConfig | None = None, shuffle: bool = True) -> list[CvRow]:
    """Repeated two-fold cross-validation of pmf estimators.

    Each run splits the data at random into halves of sizes ``floor(n/2)``
    and ``ceil(n/2)``, fits every estimator on one half and measures its
    Hellinger, l2 and l1 distance to the empirical pmf of the other, then
    swaps the halves.  Means and standard errors are over runs and both
    directions.  With ``shuffle=False`` the split is simply the first and
    second half in the given order.
    """
    obs = np.asarray(observations)
    if obs.size < 4:
        raise ValueError("cross-validation needs at least 4 observations")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    names = [canonical_name(e) for e in estimators]
    n = obs.size
    half = n // 2
    scores = {(e, m): [] for e in names for m in METRICS}
    skipped = {e: 0 for e in names}
    for r in range(runs):
        perm = replicate_rng(seed, r).permutation(n) if shuffle else np.arange(n)
        folds = (obs[perm[:half]], obs[perm[half:]])
        for train, test in (folds, folds[::-1]):
            test_emp = EmpiricalPmf.from_observations(test)
            fits = fit_estimators(train, kernel, names, config)
            for e in names:
                if not fits[e].converged:
                    skipped[e] += 1
                    continue
                d = distances(fits[e].pmf, test_emp)
                for m in METRICS:
                    scores[e, m].append(d[m])
    for e in names:
        _check_drops(skipped[e], 2 * runs, f"{e} fits")
    out = []
    for e in names:
        for m in METRICS:
            x = np.array(scores[e, m])
            se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
            out.append(CvRow(e, m, float(x.mean()), se, runs))
    return out
