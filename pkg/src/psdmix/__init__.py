"""Estimation of mixtures of power-series distributions from count data."""
from ._core import BACKEND
from .datasets import CountDataset, load_counts
from .estimators import fit_estimators
from .kernels import KernelSpec, TheoryConstants, log_pmf, pmf, sample_kernel, sf, tail_bound, theory_constants
from .metrics import EmpiricalPmf, distances, empirical_pmf, hellinger, lp_distance, weighted_chisq
from .mixtures import (
    DiscreteMixing,
    MixturePmf,
    PointMassPlus,
    ScaledBetaMixing,
    UniformMixing,
    eval_mixture,
    point_mass,
    sample_mixture,
    tail_mass,
    truncation_horizon,
)
from .npmle import FitConfig, FitResult, fit_npmle, loglik, loglik_gradient
from .resampling import CiTable, bootstrap_ci, coverage_study, two_fold_cv
from .simlab import Scenario, SimRecord, run_convergence_study, scenario, tail_error_ratios
from .simplex_ls import SimplexLsResult, solve_simplex_ls
from .wlse import HybridPmf, fit_wlse, hybrid_estimate, wlse_gradient

__version__ = "0.1.0"
