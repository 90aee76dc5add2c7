import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from psdmix.simplex_ls import kkt_gap, solve_simplex_ls


def obj(S, b, p):
    r = S @ p - b
    return float(r @ r)


def test_identity_on_simplex():
    res = solve_simplex_ls(np.eye(2), np.array([0.3, 0.7]))
    np.testing.assert_allclose(res.weights, [0.3, 0.7], atol=1e-12)
    assert res.residual_norm < 1e-12
    assert res.certified


def test_single_column():
    res = solve_simplex_ls(np.array([[2.0], [5.0]]), np.array([-1.0, 3.0]))
    assert res.weights.tolist() == [1.0]


def test_identity_off_simplex():
    res = solve_simplex_ls(np.eye(2), np.array([-1.0, 0.2]))
    np.testing.assert_allclose(res.weights, [0.0, 1.0], atol=1e-12)
    # brute force on a 1e-3 grid
    grid = np.linspace(0, 1, 1001)
    vals = [obj(np.eye(2), np.array([-1.0, 0.2]), np.array([1 - t, t])) for t in grid]
    assert obj(np.eye(2), np.array([-1.0, 0.2]), res.weights) <= min(vals) + 1e-12


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_simplex_ls(np.array([[np.nan, 1.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        solve_simplex_ls(np.ones((3, 2)), np.ones(2))
    with pytest.raises(ValueError):
        solve_simplex_ls(np.ones((3, 0)), np.ones(3))


def test_duplicate_columns_and_warm_start():
    rng = np.random.default_rng(0)
    S = rng.normal(size=(6, 3))
    S = np.hstack([S, S[:, :1]])
    b = rng.normal(size=6)
    cold = solve_simplex_ls(S, b)
    warm = solve_simplex_ls(S, b, warm_start=np.full(4, 0.25))
    assert obj(S, b, warm.weights) == pytest.approx(obj(S, b, cold.weights), abs=1e-10)


def test_iteration_cap_flags_non_certified():
    rng = np.random.default_rng(1)
    S = rng.normal(size=(8, 12))
    b = rng.normal(size=8)
    res = solve_simplex_ls(S, b, maxiter=1)
    assert res.weights.sum() == pytest.approx(1.0)
    assert not res.certified or res.kkt_gap <= 1e-8 * (1 + np.linalg.norm(b))


@settings(max_examples=100, deadline=None)
@given(
    S=arrays(np.float64, (5, 4), elements=st.floats(-5, 5)),
    b=arrays(np.float64, (5,), elements=st.floats(-5, 5)),
)
def test_certificate_and_vertex_dominance(S, b):
    res = solve_simplex_ls(S, b)
    p = res.weights
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-12
    assert res.certified
    assert res.kkt_gap <= 1e-8 * (1 + np.linalg.norm(b))
    assert kkt_gap(S, b, p) == pytest.approx(res.kkt_gap)
    best = obj(S, b, p)
    scale = 1e-9 * (1 + best)
    for j in range(4):
        assert best <= obj(S, b, np.eye(4)[j]) + scale
    assert best <= obj(S, b, np.full(4, 0.25)) + scale


def test_agrees_with_random_search():
    rng = np.random.default_rng(2)
    for _ in range(20):
        S = rng.normal(size=(7, 5))
        b = rng.normal(size=7)
        best = obj(S, b, solve_simplex_ls(S, b).weights)
        cand = rng.dirichlet(np.ones(5) * 0.3, size=20000)
        vals = np.sum((cand @ S.T - b) ** 2, axis=1)
        assert best <= vals.min() + 1e-10
