"""Name-based dispatch over the estimators: ``empirical``, ``mle``, ``hybrid``, ``wlse:<alpha>``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec
from .metrics import EmpiricalPmf
from .npmle import FitConfig, FitResult, fit_npmle
from .wlse import fit_wlse, hybrid_estimate

DEFAULT_ALPHAS = (0.0, 0.2, 0.4, 0.6, 0.8)
ALIASES = {"emp": "empirical", "npmle": "mle", "hyb": "hybrid"}


@dataclass
class Estimate:
    name: str
    pmf: object
    converged: bool
    fit: FitResult | None = None


def parse_estimator(name: str) -> tuple[str, float | None]:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key in ("empirical", "mle", "hybrid"):
        return key, None
    if key.startswith("wlse:") or key.startswith("lse:"):
        try:
            alpha = float(key.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad alpha in estimator {name!r}") from None
        if not 0 <= alpha < 1:
            raise ValueError("wlse alpha must lie in [0, 1)")
        return "wlse", alpha
    raise ValueError(f"unknown estimator {name!r}; use empirical, mle, hybrid or wlse:<alpha>")


def canonical_name(name: str) -> str:
    kind, alpha = parse_estimator(name)
    return kind if alpha is None else f"wlse:{alpha:g}"


def fit_estimators(observations, kernel: KernelSpec, names, config: FitConfig | None = None,
                   init=None) -> dict[str, Estimate]:
    """Fit every named estimator on one sample, sharing a single NPMLE fit."""
    emp = observations if isinstance(observations, EmpiricalPmf) else EmpiricalPmf.from_observations(observations)
    parsed = [(canonical_name(n), *parse_estimator(n)) for n in names]
    npmle = None
    if any(kind != "empirical" for _, kind, _ in parsed):
        npmle = fit_npmle(emp, kernel, config, init=init)
    out = {}
    for label, kind, alpha in parsed:
        if kind == "empirical":
            out[label] = Estimate(label, emp, True)
        elif kind == "mle":
            out[label] = Estimate(label, npmle.mixture, npmle.converged, npmle)
        elif kind == "hybrid":
            out[label] = Estimate(label, hybrid_estimate(emp, npmle.mixture), npmle.converged, npmle)
        else:
            fit = fit_wlse(emp, kernel, alpha, npmle, config)
            out[label] = Estimate(label, fit.mixture, fit.converged and npmle.converged, fit)
    return out


def replicate_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``; order of use does not matter."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
