import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from psdmix.kernels import KernelSpec, pmf, sample_kernel
from psdmix.metrics import EmpiricalPmf, lp_distance
from psdmix.mixtures import (
    DiscreteMixing,
    MixturePmf,
    PointMassPlus,
    ScaledBetaMixing,
    UniformMixing,
    eval_mixture,
    mixing_from_record,
    point_mass,
    sample_mixture,
    tail_mass,
    truncation_horizon,
)
from psdmix.simlab import scenario, scenario_names

POISSON = KernelSpec("poisson")
GEOM = KernelSpec("geometric")


def ex1():
    return MixturePmf(POISSON, DiscreteMixing([1.0, 2.0], [4 / 9, 5 / 9]))


def test_point_mass_equals_kernel():
    m = MixturePmf(KernelSpec("negbinomial", 4), point_mass(0.35))
    ks = np.arange(30)
    np.testing.assert_array_equal(m.pmf(ks), pmf(KernelSpec("negbinomial", 4), 0.35, ks))


def test_ex1_at_zero():
    expected = 4 / 9 * math.exp(-1) + 5 / 9 * math.exp(-2)
    assert eval_mixture(ex1(), 0) == pytest.approx(expected, rel=1e-15)


def test_geometric_two_point_at_zero():
    m = MixturePmf(GEOM, DiscreteMixing([0.2, 0.8], [0.5, 0.5]))
    assert m.pmf(0) == pytest.approx(0.5, rel=1e-15)


def test_tail_examples():
    assert tail_mass(MixturePmf(GEOM, point_mass(0.5)), 1) == pytest.approx(0.25, rel=1e-15)
    assert tail_mass(MixturePmf(POISSON, point_mass(1.0)), 0) == pytest.approx(1 - math.exp(-1), rel=1e-14)
    m = ex1()
    p = m.pmf(np.arange(0, 200))
    assert abs(m.tail(30) - p[31:].sum()) < 1e-12
    assert abs(m.tail(30) - (1 - p[:31].sum())) < 1e-12


def test_tail_conventions_and_monotone():
    m = ex1()
    assert m.tail(-1) == 1.0
    assert m.tail(0) == pytest.approx(1 - m.pmf(0), rel=1e-14)
    tails = [m.tail(K) for K in range(40)]
    assert all(b <= a for a, b in zip(tails, tails[1:]))


def test_horizon_examples():
    assert truncation_horizon(MixturePmf(GEOM, point_mass(0.5)), 0.3) == 1
    m = ex1()
    K = 0
    while m.tail(K) >= 1e-10:
        K += 1
    assert truncation_horizon(m, 1e-10) == K
    hs = [m.horizon(eps) for eps in [1e-2, 1e-4, 1e-8, 1e-12]]
    assert hs == sorted(hs)


def test_sampling_basics():
    m = ex1()
    assert sample_mixture(m, 0, 3).size == 0
    np.testing.assert_array_equal(sample_mixture(m, 100, 3), sample_mixture(m, 100, 3))


def test_point_mass_sampling_matches_kernel_sampler():
    m = MixturePmf(POISSON, point_mass(3.0))
    a = sample_mixture(m, 20_000, 1)
    b = sample_kernel(POISSON, 3.0, 20_000, 2)
    top = max(a.max(), b.max()) + 1
    table = np.vstack([np.bincount(a, minlength=top), np.bincount(b, minlength=top)])
    table = table[:, table.sum(axis=0) > 0]
    assert stats.chi2_contingency(table)[1] > 0.001


def test_discrete_mixing_is_linear_in_weights():
    support = np.array([0.5, 2.0, 7.0])
    w = np.array([0.2, 0.5, 0.3])
    ks = np.arange(40)
    m = MixturePmf(POISSON, DiscreteMixing(support, w))
    direct = sum(wj * pmf(POISSON, t, ks) for t, wj in zip(support, w))
    np.testing.assert_allclose(m.pmf(ks), direct, rtol=1e-14)


def test_merge_close_support_points():
    q = DiscreteMixing([1.0, 1.0 + 1e-10, 3.0], [0.25, 0.25, 0.5])
    assert q.support.size == 2
    assert q.weights[0] == pytest.approx(0.5)


def test_invalid_mixings():
    with pytest.raises(ValueError):
        DiscreteMixing([1.0, 2.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMixing([-1.0], [1.0])
    with pytest.raises(ValueError):
        MixturePmf(GEOM, point_mass(1.0))
    with pytest.raises(ValueError):
        UniformMixing(2.0, 1.0)


def test_uniform_mixing_matches_direct_quadrature():
    m = MixturePmf(POISSON, UniformMixing(0.2, 5.0))
    for k in [0, 3, 12]:
        direct = integrate.quad(lambda t: stats.poisson.pmf(k, t) / 4.8, 0.2, 5.0, epsabs=1e-14)[0]
        assert m.pmf(k) == pytest.approx(direct, rel=1e-9)
    assert m.pmf(np.arange(200)).sum() == pytest.approx(1.0, abs=1e-10)
    assert m.tail(6) == pytest.approx(m.pmf(np.arange(7, 200)).sum(), rel=1e-8)


def test_beta_mixing_geometric_closed_form():
    # E[1 - theta] under Beta(2, 3) on [0.1, 0.9]
    m = MixturePmf(GEOM, ScaledBetaMixing(2.0, 3.0, 0.1, 0.9))
    assert m.pmf(0) == pytest.approx(1 - (0.1 + 0.8 * 0.4), rel=1e-10)
    assert m.tail(0) == pytest.approx(0.1 + 0.8 * 0.4, rel=1e-10)


def test_point_mass_plus():
    rest = DiscreteMixing([2.0], [1.0])
    m = MixturePmf(POISSON, PointMassPlus(1 / 3, rest))
    assert m.pmf(0) == pytest.approx(1 / 3 + 2 / 3 * math.exp(-2))
    assert m.tail(3) == pytest.approx(2 / 3 * stats.poisson.sf(3, 2.0))


def test_record_round_trip():
    for q in [DiscreteMixing([0.1, 0.4], [0.3, 0.7]), UniformMixing(0.2, 5.0),
              ScaledBetaMixing(2, 3, 0.1, 0.9), PointMassPlus(0.25, UniformMixing(1.0, 2.0))]:
        back = mixing_from_record(q.to_record())
        assert back.to_record() == q.to_record()


@pytest.mark.slow
@pytest.mark.parametrize("name", [n for n in scenario_names() if n != "fig1-m2-rule"])
def test_large_sample_empirical_converges(name):
    sc = scenario(name)
    x = sc.mixture.sample(100_000, 11)
    assert lp_distance(EmpiricalPmf.from_observations(x), sc.mixture, 1) < 0.05


@settings(max_examples=40, deadline=None)
@given(
    support=st.lists(st.floats(0.0, 0.95), min_size=1, max_size=4),
    raw=st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4),
)
def test_geometric_mixture_pmf_sums_to_one(support, raw):
    w = np.array(raw[: len(support)])
    m = MixturePmf(GEOM, DiscreteMixing(support, w / w.sum()))
    K = m.horizon(1e-12)
    assert abs(m.pmf(np.arange(K + 1)).sum() + m.tail(K) - 1) < 1e-10
