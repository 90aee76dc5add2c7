import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from psdmix.kernels import KernelSpec
from psdmix.metrics import (
    ArrayPmf,
    EmpiricalPmf,
    distances,
    empirical_pmf,
    hellinger,
    lp_distance,
    tail_region_ratios,
    weighted_chisq,
)
from psdmix.mixtures import DiscreteMixing, MixturePmf, point_mass

POISSON = KernelSpec("poisson")
GEOM = KernelSpec("geometric")


def poisson(theta):
    return MixturePmf(POISSON, point_mass(theta))


def test_empirical_examples():
    e = empirical_pmf([0, 0, 3])
    assert e.n == 3
    assert e.as_dict() == {0: pytest.approx(2 / 3), 3: pytest.approx(1 / 3)}
    assert empirical_pmf([5]).as_dict() == {5: 1.0}
    with pytest.raises(ValueError, match="no observations"):
        empirical_pmf([])
    with pytest.raises(ValueError):
        empirical_pmf([1, -2])


def test_empirical_tail_and_horizon():
    e = empirical_pmf([0, 0, 3, 7])
    assert e.tail(7) == 0.0
    assert e.tail(3) == pytest.approx(0.25)
    assert e.horizon(1e-9) == 7
    assert e.pmf(np.array([0, 1, 3, 8])).tolist() == [0.5, 0.0, 0.25, 0.0]


def test_hellinger_examples():
    p = poisson(1.7)
    assert hellinger(p, p) < 1e-8
    assert hellinger(ArrayPmf([1.0]), ArrayPmf([0.0, 1.0])) == pytest.approx(1.0)
    closed = math.sqrt(1 - math.exp(math.sqrt(2) - 1.5))
    assert hellinger(poisson(1.0), poisson(2.0)) == pytest.approx(closed, abs=1e-10)


def test_hellinger_tol_domain():
    with pytest.raises(ValueError):
        hellinger(poisson(1.0), poisson(2.0), tol=0.01)


def test_lp_examples():
    p = MixturePmf(GEOM, point_mass(0.3))
    for order in [1, 2, 4, math.inf]:
        assert lp_distance(p, p, order) == 0.0
    delta0 = MixturePmf(GEOM, point_mass(0.0))
    assert lp_distance(delta0, MixturePmf(GEOM, point_mass(0.5)), math.inf) == pytest.approx(0.5)
    ks = np.arange(201)
    brute = np.abs(stats.poisson.pmf(ks, 1.0) - stats.poisson.pmf(ks, 1.1)).sum()
    assert abs(lp_distance(poisson(1.0), poisson(1.1), 1) - brute) < 1e-10
    with pytest.raises(ValueError):
        lp_distance(p, p, 0.5)


def test_weighted_chisq_examples():
    emp = empirical_pmf([0])
    ref = ArrayPmf([0.5, 0.5])
    # (1 - 0.5)^2 / 0.5 + (0 - 0.5)^2 / 0.5 = 1
    assert weighted_chisq(emp, ref, ref, 1.0) == pytest.approx(math.sqrt(0.25 / 0.5 + 0.25 / 0.5))
    e2 = empirical_pmf([0, 1, 1, 3])
    same = ArrayPmf([0.25, 0.5, 0.0, 0.25])
    assert weighted_chisq(e2, same, same, 0.5) == 0.0
    m = poisson(1.3)
    assert weighted_chisq(e2, m, m, 0.0) == pytest.approx(lp_distance(e2, m, 2), abs=1e-8)


def test_weighted_chisq_zero_weight_names_k():
    with pytest.raises(ZeroDivisionError, match="k=2"):
        weighted_chisq(empirical_pmf([2]), ArrayPmf([1.0]), ArrayPmf([1.0]), 0.5)


def test_distances_bundle():
    d = distances(poisson(1.0), poisson(2.0))
    assert set(d) == {"h", "l1", "l2"}
    assert d["l2"] <= d["l1"]


def test_tail_region_ratios_formula():
    truth = poisson(2.0)
    est = poisson(2.2)
    start = 6
    ks = np.arange(start, 400)
    t = stats.poisson.pmf(ks, 2.0)
    e = stats.poisson.pmf(ks, 2.2)
    r = tail_region_ratios(truth, est, start)
    assert r["h"] == pytest.approx(math.sqrt(t.sum()) / math.sqrt(np.sum((np.sqrt(e) - np.sqrt(t)) ** 2)), rel=1e-9)
    assert r["l1"] == pytest.approx(t.sum() / np.abs(e - t).sum(), rel=1e-9)
    assert r["l2"] == pytest.approx(math.sqrt(np.sum(t * t)) / math.sqrt(np.sum((e - t) ** 2)), rel=1e-9)
    assert tail_region_ratios(truth, truth, start)["h"] == math.inf


pmf_lists = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8).filter(lambda v: sum(v) > 0.01)


def _norm(v):
    a = np.array(v)
    return ArrayPmf(a / a.sum())


@settings(max_examples=80, deadline=None)
@given(a=pmf_lists, b=pmf_lists, c=pmf_lists)
def test_hellinger_metric_properties(a, b, c):
    p, q, r = _norm(a), _norm(b), _norm(c)
    hpq = hellinger(p, q)
    assert 0 <= hpq <= 1
    assert hpq == pytest.approx(hellinger(q, p), abs=1e-12)
    assert hpq <= hellinger(p, r) + hellinger(r, q) + 2e-8


@settings(max_examples=80, deadline=None)
@given(a=pmf_lists, b=pmf_lists)
def test_lp_nonincreasing_in_order(a, b):
    p, q = _norm(a), _norm(b)
    vals = [lp_distance(p, q, order) for order in (1, 2, 4, math.inf)]
    assert all(y <= x + 1e-12 for x, y in zip(vals, vals[1:]))


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(0.05, 0.95), t2=st.floats(0.05, 0.95), w=st.floats(0.05, 0.95))
def test_distances_match_long_horizon_oracle(t1, t2, w):
    p = MixturePmf(GEOM, DiscreteMixing([t1, t2], [w, 1 - w]))
    q = MixturePmf(GEOM, point_mass(0.5))
    ks = np.arange(0, 3000)
    pa = w * stats.geom.pmf(ks + 1, 1 - t1) + (1 - w) * stats.geom.pmf(ks + 1, 1 - t2)
    pb = stats.geom.pmf(ks + 1, 0.5)
    assert abs(hellinger(p, q) - math.sqrt(0.5 * np.sum((np.sqrt(pa) - np.sqrt(pb)) ** 2))) < 1e-8
    assert abs(lp_distance(p, q, 1) - np.abs(pa - pb).sum()) < 1e-8
    assert abs(lp_distance(p, q, 2) - math.sqrt(np.sum((pa - pb) ** 2))) < 1e-8
