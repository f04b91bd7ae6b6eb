from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from discotrack.errors import InvalidArgumentError, MissingDataError
from discotrack.stochastic_space import (
    CdfTransform,
    ModelEvaluationCache,
    StochasticDomain,
    build_grid,
    coarse_to_fine_index,
    interpolate_multilinear,
    read_cache_csv,
    refine_grid,
)


def test_grid_1d_three_points():
    g = build_grid(StochasticDomain(1), 3)
    np.testing.assert_array_equal(g.points().ravel(), [-1.0, 0.0, 1.0])


def test_grid_3d_count():
    assert build_grid(StochasticDomain(3), 31).n_points == 29791


def test_refine_two_to_three():
    g = refine_grid(build_grid(StochasticDomain(1), 2))
    assert g.m == (3,) and g.level == 1


@pytest.mark.parametrize("m", [0, 1])
def test_grid_rejects_small_m(m):
    with pytest.raises(InvalidArgumentError):
        build_grid(StochasticDomain(2), m)


def test_trapezoid_weights_sum_to_one():
    g = build_grid(StochasticDomain(3), 7)
    assert abs(g.trapezoid_weights().sum() - 1.0) < 1e-14


@given(st.integers(1, 3), st.integers(2, 9))
def test_refinement_is_nested(d, m):
    g = build_grid(StochasticDomain(d), m)
    f = refine_grid(g)
    idx = coarse_to_fine_index(g, f)
    np.testing.assert_allclose(f.points()[idx], g.points(), atol=1e-14, rtol=0)


def test_interp_1d_midpoint():
    g = build_grid(StochasticDomain(1), 2)
    cache = ModelEvaluationCache(g, np.array([0.0, 2.0]))
    assert interpolate_multilinear(cache, [0.0]) == pytest.approx(1.0)


def test_interp_constant_cell():
    g = build_grid(StochasticDomain(2), 2)
    cache = ModelEvaluationCache(g, np.full(4, 5.0))
    assert interpolate_multilinear(cache, [0.3, -0.7]) == pytest.approx(5.0)


def test_interp_bilinear_centre():
    # corners (-1,-1), (-1,1), (1,-1), (1,1) in flat order carry 0, 0, 1, 1
    g = build_grid(StochasticDomain(2), 2)
    cache = ModelEvaluationCache(g, np.array([0.0, 0.0, 1.0, 1.0]))
    assert interpolate_multilinear(cache, [0.0, 0.0]) == pytest.approx(0.5)


@given(st.integers(1, 3), st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_interp_reproduces_multilinear(d, m, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(StochasticDomain(d), m)
    coef = rng.normal(size=(2,) * d)

    def f(x):
        out = np.zeros(len(x))
        for corner in np.ndindex(*(2,) * d):
            term = np.ones(len(x))
            for k, e in enumerate(corner):
                term *= x[:, k] ** e
            out += coef[corner] * term
        return out

    cache = ModelEvaluationCache(g, f(g.points()))
    x = rng.uniform(-1, 1, size=(20, d))
    np.testing.assert_allclose(interpolate_multilinear(cache, x), f(x), atol=1e-12)


@given(st.integers(1, 3), st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_interp_at_vertex_is_exact(d, m, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(StochasticDomain(d), m)
    vals = rng.normal(size=g.n_points)
    cache = ModelEvaluationCache(g, vals)
    np.testing.assert_array_equal(interpolate_multilinear(cache, g.points()), vals)


def test_cache_rejects_wrong_length():
    g = build_grid(StochasticDomain(2), 3)
    with pytest.raises(MissingDataError):
        ModelEvaluationCache(g, np.zeros(4))


def test_cache_csv_round_trip(tmp_path):
    dom = StochasticDomain(2)
    g = build_grid(dom, 4)
    rng = np.random.default_rng(1)
    cache = ModelEvaluationCache(g, rng.normal(size=g.n_points), rng.random(g.n_points) < 0.5)
    cache.to_csv(tmp_path / "c.csv")
    back = read_cache_csv(tmp_path / "c.csv", dom)
    np.testing.assert_array_equal(back.values, cache.values)
    np.testing.assert_array_equal(back.high, cache.high)


@pytest.mark.parametrize("dist", [stats.lognorm(s=0.25, scale=190.0), stats.expon(scale=1e-9)])
def test_cdf_transform_round_trip(dist):
    t = CdfTransform(dist)
    xi = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(t.to_xi(t.to_parameter(xi)), xi, atol=1e-10)
    vals = t.to_parameter(xi)
    np.testing.assert_allclose(t.to_parameter(t.to_xi(vals)), vals, rtol=1e-10)
