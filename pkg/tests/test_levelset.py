from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import hausdorff
from discotrack.errors import InvalidArgumentError, NonConvergenceError
from discotrack.forward_models import BurgersModel
from discotrack.levelset import (
    EvolveOptions,
    LevelSetField,
    SpeedField,
    build_speed_field,
    curvature,
    curvature_field,
    evolve_to_lock,
    init_levelset,
    redistance,
    zero_crossing_points,
)
from discotrack.stochastic_space import ModelEvaluationCache, StochasticDomain, build_grid


def _grid(d, m):
    return build_grid(StochasticDomain(d), m)


def test_init_centre_value():
    g = _grid(2, 41)
    phi = init_levelset(g, radius=0.25)
    assert phi.phi[g.flat_index(np.array([[20, 20]]))[0]] == pytest.approx(-0.25)


def test_init_corner_value():
    g = _grid(2, 41)
    phi = init_levelset(g, radius=0.25)
    assert phi.phi[-1] == pytest.approx(np.sqrt(2) - 0.25)


def test_init_zero_on_sphere():
    g = _grid(1, 5)  # points -1, -0.5, 0, 0.5, 1
    assert init_levelset(g, radius=0.5).phi[3] == pytest.approx(0.0)


def test_init_rejects_bad_radius():
    with pytest.raises(InvalidArgumentError):
        init_levelset(_grid(2, 5), radius=1.5)


def test_speed_constant_field_is_one():
    g = _grid(2, 11)
    sf = build_speed_field(ModelEvaluationCache(g, np.full(g.n_points, 3.0)))
    np.testing.assert_array_equal(sf.base, 1.0)


def test_speed_linear_field():
    g = _grid(1, 21)
    sf = build_speed_field(ModelEvaluationCache(g, g.points()[:, 0]))
    np.testing.assert_allclose(sf.base, np.exp(-1.0), rtol=1e-12)


def test_speed_jump_vanishes_with_refinement():
    vals = []
    for m in (11, 21, 41):
        g = _grid(1, m)
        sf = build_speed_field(ModelEvaluationCache(g, (g.points()[:, 0] > 0.01).astype(float)))
        vals.append(sf.base.min())
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-20


def test_speed_default_eps_is_two_dxi():
    g = _grid(2, 31)
    assert build_speed_field(ModelEvaluationCache(g, np.zeros(g.n_points))).eps == pytest.approx(2 * 2 / 30)


def test_curvature_circle_converges():
    errs = []
    for m in (41, 81, 161):
        g = _grid(2, m)
        r = 0.5
        f = LevelSetField(g, np.linalg.norm(g.points(), axis=1) - r)
        kappa = curvature_field(f.phi, g)
        band = np.abs(f.phi) < np.min(g.spacing)
        errs.append(np.max(np.abs(kappa[band] - 1 / r)))
        assert errs[-1] <= 5.0 / m * (1 / r) * 2
    assert errs[2] < errs[1] < errs[0]
    assert errs[1] / errs[2] > 1.8  # at least first order


def test_curvature_planar_zero():
    g = _grid(2, 21)
    p = g.points()
    f = LevelSetField(g, 0.3 * p[:, 0] - 0.7 * p[:, 1] + 0.1)
    assert abs(curvature(f, [10, 10])) < 1e-10


def test_curvature_sphere_3d():
    g = _grid(3, 41)
    f = LevelSetField(g, np.linalg.norm(g.points(), axis=1))
    kappa = curvature_field(f.phi, g)
    on_sphere = np.abs(f.phi - 1.0) < 0.5 * np.min(g.spacing)
    inner = np.all(np.abs(g.points()) < 0.99, axis=1)
    assert np.median(kappa[on_sphere & inner]) == pytest.approx(2.0, rel=0.02)


def test_zero_speed_locks_unchanged():
    g = _grid(2, 21)
    phi0 = init_levelset(g)
    sf = SpeedField(g, np.zeros(g.n_points), eps=0.0)
    out = evolve_to_lock(phi0, sf, EvolveOptions(use_curvature=False))
    assert out.steps == 20
    np.testing.assert_array_equal(out.phi, phi0.phi)


def test_unit_speed_grows_sphere():
    g = _grid(2, 101)
    phi0 = init_levelset(g, radius=0.25)
    sf = SpeedField(g, np.ones(g.n_points), eps=0.0)
    with pytest.raises(NonConvergenceError) as info:
        evolve_to_lock(phi0, sf, EvolveOptions(use_curvature=False, max_steps=20))
    last = info.value.last
    radius = np.linalg.norm(zero_crossing_points(last), axis=1)
    assert np.all(np.abs(radius - (0.25 + last.tau)) <= 2 * np.min(g.spacing))


def test_unit_speed_never_shrinks_inside():
    g = _grid(2, 41)
    phi = init_levelset(g, radius=0.3)
    sf = SpeedField(g, np.ones(g.n_points), eps=0.0)
    inside = phi.inside
    for _ in range(5):
        try:
            phi = evolve_to_lock(phi, sf, EvolveOptions(use_curvature=False, max_steps=3))
        except NonConvergenceError as exc:
            phi = exc.last
        assert np.all(phi.inside[inside])
        inside = phi.inside


def test_zero_crossing_midpoint_and_quarter():
    g = _grid(1, 3)  # points -1, 0, 1; the edge [0, 1] carries the sign change
    assert zero_crossing_points(LevelSetField(g, np.array([-2.0, -1.0, 1.0])))[0, 0] == pytest.approx(0.5)
    assert zero_crossing_points(LevelSetField(g, np.array([-2.0, -1.0, 3.0])))[0, 0] == pytest.approx(0.25)


def test_zero_crossing_one_signed_is_empty():
    g = _grid(2, 5)
    assert zero_crossing_points(LevelSetField(g, np.ones(g.n_points))).shape == (0, 2)


@given(st.floats(0.2, 0.8), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_redistance_keeps_signs(r, cx, cy):
    g = _grid(2, 31)
    p = g.points()
    f = LevelSetField(g, (p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2 - r * r)
    out = redistance(f)
    np.testing.assert_array_equal(out.inside, f.inside)
    exact = np.hypot(p[:, 0] - cx, p[:, 1] - cy) - r
    assert np.max(np.abs(out.phi - exact)) < 2 * np.min(g.spacing)


def test_burgers_lock_on_fine_grid(burgers_curve):
    g = _grid(2, 61)
    model = BurgersModel()
    cache = ModelEvaluationCache(g, model(g.points()))
    locked = evolve_to_lock(init_levelset(g), build_speed_field(cache))
    assert hausdorff(zero_crossing_points(locked), burgers_curve) <= 2 * 2 / 60
