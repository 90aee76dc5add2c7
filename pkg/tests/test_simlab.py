import io
import math

import numpy as np
import pytest

from psdmix.mixtures import DiscreteMixing, PointMassPlus, ScaledBetaMixing, UniformMixing
from psdmix.simlab import SimRecord, run_convergence_study, scenario, scenario_names, tail_error_ratios, write_records


def test_registry_contents():
    g = scenario("geom-finite-7")
    assert g.kernel.family == "geometric"
    np.testing.assert_allclose(g.mixing.support, [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])
    np.testing.assert_allclose(g.mixing.weights, np.full(7, 1 / 7))
    nb = scenario("nb-finite-7")
    assert (nb.kernel.family, nb.kernel.r) == ("negbinomial", 10)
    assert nb.mixing == g.mixing
    ex1 = scenario("ex1-as-printed")
    np.testing.assert_allclose(ex1.mixing.weights, [4 / 9, 5 / 9])
    p2 = scenario("poisson-finite-2")
    np.testing.assert_allclose(p2.mixing.weights, [1 / 1.8, 0.8 / 1.8])
    p8 = scenario("poisson-finite-8").mixing
    w = 0.8 ** np.arange(8)
    np.testing.assert_allclose(p8.weights, w / w.sum())
    np.testing.assert_allclose(p8.weights[0], 1 / (5 * (1 - 0.8**8)))
    assert scenario("ex2").mixing == p8
    assert isinstance(scenario("poisson-unif").mixing, UniformMixing)
    z = scenario("poisson-zero-unif").mixing
    assert isinstance(z, PointMassPlus) and z.mass0 == pytest.approx(1 / 3)
    b = scenario("geom-beta").mixing
    assert isinstance(b, ScaledBetaMixing) and (b.alpha, b.beta, b.lo, b.hi) == (2, 3, 0.1, 0.9)
    assert scenario("fig1-m2-rule").mixing == p2.mixing


def test_unknown_scenario_lists_registry():
    with pytest.raises(KeyError, match="geom-finite-7"):
        scenario("nope")


def test_every_scenario_builds():
    for name in scenario_names():
        sc = scenario(name)
        assert sc.mixture.pmf(0) > 0


def test_convergence_study_empirical_and_determinism():
    a = run_convergence_study("geom-finite-7", [50, 200], ["empirical"], reps=3, seed=4)
    assert len(a) == 6
    assert all(r.scaled_mean > 0 and math.isfinite(r.scaled_mean) for r in a)
    b = run_convergence_study("geom-finite-7", [50, 200], ["empirical"], reps=3, seed=4)
    assert a == b
    c = run_convergence_study("poisson-finite-2", [100], ["mle", "wlse:0.4"], reps=1, seed=9)
    d = run_convergence_study("poisson-finite-2", [100], ["mle", "wlse:0.4"], reps=1, seed=9)
    assert [r.scaled_mean for r in c] == [r.scaled_mean for r in d]
    assert all(r.std_error == 0.0 and r.reps == 1 for r in c)


def test_records_csv():
    recs = [SimRecord("s", 10, "mle", "h", 0.5, 0.01, 3, 7)]
    buf = io.StringIO()
    write_records(recs, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "scenario,n,estimator,metric,scaled_mean,std_error,reps,seed"
    assert lines[1] == "s,10,mle,h,0.5,0.01,3,7"


def test_tail_ratios_positive():
    res = tail_error_ratios("ex1-as-printed", n=100, reps=10, seed=1)
    assert res.reps + res.dropped == 10
    assert all(v > 0 for v in res.mean.values())
    with pytest.raises(ValueError):
        tail_error_ratios("ex1-as-printed", n=100, reps=9, seed=1)


@pytest.mark.slow
def test_tail_ratio_means_exceed_one():
    for n in (100, 1000):
        res = tail_error_ratios("ex1-as-printed", n=n, reps=100, seed=12)
        assert all(v > 1 for v in res.mean.values())


@pytest.mark.slow
def test_empirical_rate_bounded():
    recs = run_convergence_study("poisson-finite-2", [100, 1000, 10_000], ["empirical"], reps=100, seed=2)
    for metric in ("l1", "l2"):
        v = [r.scaled_mean for r in recs if r.metric == metric]
        assert max(v) / min(v) <= 2
