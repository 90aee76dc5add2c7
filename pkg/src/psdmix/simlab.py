"""Simulation scenarios, the sqrt(n)-scaled convergence study and tail-error ratios."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property

import numpy as np

from .estimators import canonical_name, fit_estimators, replicate_rng
from .kernels import KernelSpec
from .metrics import distances, tail_region_ratios
from .mixtures import DiscreteMixing, MixturePmf, PointMassPlus, ScaledBetaMixing, UniformMixing
from .npmle import FitConfig, fit_npmle

METRICS = ("h", "l1", "l2")
MAX_DROP_FRACTION = 0.05


@dataclass(frozen=True)
class Scenario:
    name: str
    kernel: KernelSpec
    mixing: object
    description: str = ""

    def __post_init__(self):
        if self.mixing.upper >= self.kernel.radius:
            raise ValueError(f"scenario {self.name!r}: mixing reaches the radius of convergence")

    @cached_property
    def mixture(self) -> MixturePmf:
        return MixturePmf(self.kernel, self.mixing)


def _geometric_decay(m: int) -> DiscreteMixing:
    w = 0.8 ** np.arange(m)
    return DiscreteMixing(np.arange(1.0, m + 1), w / w.sum())


def _seven_points() -> DiscreteMixing:
    return DiscreteMixing(np.round(np.arange(0.2, 0.85, 0.1), 10), np.full(7, 1 / 7))


POISSON = KernelSpec("poisson")
GEOMETRIC = KernelSpec("geometric")
NB10 = KernelSpec("negbinomial", 10)

_REGISTRY = {
    "poisson-finite-2": lambda: (POISSON, _geometric_decay(2),
                                 "Poisson, means 1, 2 with weights proportional to 0.8^(theta-1)"),
    "poisson-finite-8": lambda: (POISSON, _geometric_decay(8),
                                 "Poisson, means 1..8 with weights proportional to 0.8^(theta-1)"),
    "ex1-as-printed": lambda: (POISSON, DiscreteMixing([1.0, 2.0], [4 / 9, 5 / 9]),
                               "Poisson, 4/9 at theta=1 and 5/9 at theta=2"),
    "ex2": lambda: (POISSON, _geometric_decay(8), "same mixture as poisson-finite-8"),
    "poisson-unif": lambda: (POISSON, UniformMixing(0.2, 5.0), "Poisson, U(0.2, 5) mixing"),
    "poisson-zero-unif": lambda: (POISSON, PointMassPlus(1 / 3, UniformMixing(0.2, 5.0)),
                                  "Poisson, mass 1/3 at 0 and 2/3 spread as U(0.2, 5)"),
    "poisson-unif-10-30": lambda: (POISSON, UniformMixing(10.0, 30.0), "Poisson, U(10, 30) mixing"),
    "geom-finite-7": lambda: (GEOMETRIC, _seven_points(), "Geometric, theta = 0.2..0.8 with weight 1/7 each"),
    "geom-beta": lambda: (GEOMETRIC, ScaledBetaMixing(2.0, 3.0, 0.1, 0.9), "Geometric, Beta(2, 3) on [0.1, 0.9]"),
    "nb-finite-7": lambda: (NB10, _seven_points(), "NegBinomial r=10, theta = 0.2..0.8 with weight 1/7 each"),
    "nb-beta": lambda: (NB10, ScaledBetaMixing(2.0, 3.0, 0.1, 0.9), "NegBinomial r=10, Beta(2, 3) on [0.1, 0.9]"),
}
ALIASES = {"fig1-m2-rule": "poisson-finite-2"}


def scenario_names() -> list[str]:
    return sorted(_REGISTRY) + sorted(ALIASES)


def scenario(name: str) -> Scenario:
    key = ALIASES.get(name, name)
    if key not in _REGISTRY:
        raise KeyError(f"unknown scenario {name!r}; available: {', '.join(scenario_names())}")
    kernel, mixing, desc = _REGISTRY[key]()
    return Scenario(name, kernel, mixing, desc)


@dataclass(frozen=True)
class SimRecord:
    scenario: str
    n: int
    estimator: str
    metric: str
    scaled_mean: float
    std_error: float
    reps: int
    seed: int
    dropped: int = field(default=0, compare=False)

    CSV_FIELDS = ("scenario", "n", "estimator", "metric", "scaled_mean", "std_error", "reps", "seed")

    def as_row(self):
        d = asdict(self)
        return [d[f] for f in self.CSV_FIELDS]


def write_records(records, path_or_file):
    """Write SimRecords as CSV with the fixed header."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(SimRecord.CSV_FIELDS)
        for r in records:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r.as_row()])
    finally:
        if own:
            fh.close()


def _as_scenario(sc) -> Scenario:
    return scenario(sc) if isinstance(sc, str) else sc


def run_convergence_study(sc, ns, estimators, reps: int, seed: int,
                          config: FitConfig | None = None) -> list[SimRecord]:
    """Mean of ``sqrt(n) * distance(estimate, truth)`` over replications.

    Replicate ``rep`` at sample size ``n`` uses the stream keyed by
    ``(seed, n, rep)``, so results for one ``n`` do not depend on which other
    sizes are requested.  Non-converged fits are excluded per estimator; more
    than 5% exclusions is an error.
    """
    sc = _as_scenario(sc)
    ns = [int(n) for n in ns]
    if reps < 1 or not ns:
        raise ValueError("need reps >= 1 and at least one sample size")
    names = [canonical_name(e) for e in estimators]
    truth = sc.mixture
    out = []
    for n in ns:
        vals = {(e, m): [] for e in names for m in METRICS}
        failed = {e: 0 for e in names}
        root_n = math.sqrt(n)
        for rep in range(reps):
            data = truth.sample(n, replicate_rng(seed, n, rep))
            fits = fit_estimators(data, sc.kernel, names, config)
            for e in names:
                if not fits[e].converged:
                    failed[e] += 1
                    continue
                d = distances(fits[e].pmf, truth)
                for m in METRICS:
                    vals[e, m].append(root_n * d[m])
        for e in names:
            if failed[e] > MAX_DROP_FRACTION * reps:
                raise RuntimeError(f"{e}: {failed[e]} of {reps} fits failed at n={n} (limit 5%)")
            for m in METRICS:
                x = np.array(vals[e, m])
                se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
                out.append(SimRecord(sc.name, n, e, m, float(x.mean()), se, x.size, int(seed), failed[e]))
    return out


@dataclass(frozen=True)
class TailRatioSummary:
    mean: dict
    median: dict
    reps: int
    dropped: int
    ratios: np.ndarray = field(repr=False)


def tail_error_ratios(sc, n: int, reps: int, seed: int, config: FitConfig | None = None) -> TailRatioSummary:
    """Empirical-vs-NPMLE error ratios beyond the sample maximum.

    Replicates where the NPMLE fit does not converge or a ratio is infinite
    (NPMLE exact on the region) are dropped and counted.
    """
    if reps < 10:
        raise ValueError("reps must be at least 10")
    sc = _as_scenario(sc)
    truth = sc.mixture
    rows = []
    dropped = 0
    for rep in range(reps):
        data = truth.sample(n, replicate_rng(seed, n, rep))
        fit = fit_npmle(data, sc.kernel, config)
        r = tail_region_ratios(truth, fit.mixture, int(data.max()) + 1)
        vals = [r[m] for m in METRICS]
        if not fit.converged or not all(map(math.isfinite, vals)):
            dropped += 1
            continue
        rows.append(vals)
    arr = np.array(rows).reshape(-1, len(METRICS))
    if arr.shape[0] == 0:
        raise RuntimeError("every replicate was dropped")
    mean = {m: float(arr[:, i].mean()) for i, m in enumerate(METRICS)}
    median = {m: float(np.median(arr[:, i])) for i, m in enumerate(METRICS)}
    return TailRatioSummary(mean, median, arr.shape[0], dropped, arr)
