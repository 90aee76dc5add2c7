import numpy as np
import pytest

from psdmix.kernels import KernelSpec
from psdmix.mixtures import DiscreteMixing, MixturePmf
from psdmix.resampling import bootstrap_ci, coverage_study, percentile_ranks, two_fold_cv
from psdmix.simlab import Scenario, scenario

POISSON = KernelSpec("poisson")
EX1 = DiscreteMixing([1.0, 2.0], [4 / 9, 5 / 9])


def test_percentile_ranks():
    assert percentile_ranks(40, 0.95) == (1, 40)
    assert percentile_ranks(200, 0.95) == (5, 196)
    assert percentile_ranks(1000, 0.95) == (25, 976)
    assert percentile_ranks(20, 0.999) == (1, 20)


def test_identical_observations_give_zero_width():
    ci = bootstrap_ci([3] * 30, POISSON, "np", B=20, level=0.95, k_range=(0, 6), seed=1)
    np.testing.assert_allclose(ci.lower, ci.upper, atol=1e-12)
    np.testing.assert_allclose(ci.point, ci.lower, atol=1e-9)


def test_bootstrap_deterministic_and_ordered():
    x = MixturePmf(POISSON, EX1).sample(150, 3)
    for mode in ("np", "param"):
        a = bootstrap_ci(x, POISSON, mode, B=25, level=0.9, k_range=(0, 8), seed=9)
        b = bootstrap_ci(x, POISSON, mode, B=25, level=0.9, k_range=(0, 8), seed=9)
        np.testing.assert_array_equal(a.lower, b.lower)
        np.testing.assert_array_equal(a.upper, b.upper)
        assert np.all(a.lower <= a.upper)
        assert np.all((a.lower >= 0) & (a.upper <= 1))
        assert a.k_values.tolist() == list(range(9))


def test_bootstrap_preconditions():
    with pytest.raises(ValueError):
        bootstrap_ci([1, 2, 3], POISSON, "np", B=19, level=0.95, k_range=(0, 3), seed=0)
    with pytest.raises(ValueError):
        bootstrap_ci([1, 2, 3], POISSON, "np", B=20, level=1.0, k_range=(0, 3), seed=0)
    with pytest.raises(ValueError):
        bootstrap_ci([], POISSON, "np", B=20, level=0.95, k_range=(0, 3), seed=0)
    with pytest.raises(ValueError):
        bootstrap_ci([1, 2], POISSON, "bca", B=20, level=0.95, k_range=(0, 3), seed=0)


def test_intervals_overlap_between_modes():
    x = MixturePmf(POISSON, EX1).sample(300, 4)
    a = bootstrap_ci(x, POISSON, "np", B=40, level=0.95, k_range=(0, 5), seed=2)
    b = bootstrap_ci(x, POISSON, "param", B=40, level=0.95, k_range=(0, 5), seed=2)
    assert np.all(np.maximum(a.lower, b.lower) <= np.minimum(a.upper, b.upper))


@pytest.mark.slow
def test_width_nonincreasing_in_B_on_average():
    mix = MixturePmf(POISSON, EX1)
    widths = {50: [], 200: [], 800: []}
    for s in range(3):
        x = mix.sample(500, 100 + s)
        for B in widths:
            ci = bootstrap_ci(x, POISSON, "np", B=B, level=0.95, k_range=(0, 6), seed=s)
            widths[B].append(ci.length.mean())
    assert np.mean(widths[800]) <= np.mean(widths[50])


def test_coverage_bounds():
    sc = Scenario("ex1", POISSON, EX1)
    res = coverage_study(sc, n=60, B=20, reps=20, level=0.999, k_range=(0, 4), seed=3,
                         modes=("parametric", "nonparametric"))
    for r in res.values():
        assert np.all((r.coverage >= 0) & (r.coverage <= 1))
        assert np.all(r.mean_length >= 0)
    with pytest.raises(ValueError):
        coverage_study(sc, n=60, B=20, reps=19, level=0.95, k_range=(0, 4), seed=3)


@pytest.mark.slow
def test_coverage_deteriorates_far_out():
    # central: mode 18 +- 2; far: from the 0.999 quantile (k=43) upward
    sc = scenario("poisson-unif-10-30")
    r = coverage_study(sc, n=500, B=50, reps=40, level=0.95, k_range=(16, 53), seed=8)["parametric"]
    central = r.coverage[:5].mean()
    far = r.coverage[43 - 16:].mean()
    assert far < central


def test_cv_identical_folds_give_zero():
    x = np.array([0, 1, 1, 2, 3, 5, 8])
    rows = two_fold_cv(np.concatenate([x, x]), POISSON, ["empirical"], runs=1, seed=0, shuffle=False)
    assert all(r.mean == 0.0 for r in rows)


def test_cv_deterministic_and_shapes():
    x = MixturePmf(POISSON, EX1).sample(41, 6)
    a = two_fold_cv(x, POISSON, ["emp", "mle", "hybrid", "wlse:0.2"], runs=3, seed=5)
    b = two_fold_cv(x, POISSON, ["emp", "mle", "hybrid", "wlse:0.2"], runs=3, seed=5)
    assert a == b
    assert {r.estimator for r in a} == {"empirical", "mle", "hybrid", "wlse:0.2"}
    assert all(r.runs == 3 and r.mean >= 0 and r.se >= 0 for r in a)


def test_cv_preconditions():
    with pytest.raises(ValueError):
        two_fold_cv([1, 2, 3], POISSON, ["mle"], runs=1, seed=0)
    with pytest.raises(ValueError):
        two_fold_cv([1, 2, 3, 4], POISSON, ["mle"], runs=0, seed=0)
    with pytest.raises(ValueError):
        two_fold_cv([1, 2, 3, 4], POISSON, ["kde"], runs=1, seed=0)
