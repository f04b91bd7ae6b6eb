from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discotrack.basis import GpcBasis
from discotrack.errors import InvalidArgumentError, UnsupportedConfigurationError
from discotrack.forward_models import BurgersModel
from discotrack.regression import (
    RegressionReport,
    estimate_jump_floor,
    null_space_basis,
    pivoted_qr,
    repair_misclassified,
    solve_lad,
    solve_ols_tsvd,
)
from discotrack.stochastic_space import build_grid
from discotrack.surrogates import fit_frames


def _design(n, N=2, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (n, 2))
    return GpcBasis(2, N).design(x), rng


def test_ols_orthonormal_columns():
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(30, 4)))
    u = np.random.default_rng(1).normal(size=30)
    np.testing.assert_allclose(solve_ols_tsvd(q, u).coefficients, q.T @ u, atol=1e-12)


def test_ols_constant():
    rep = solve_ols_tsvd(np.ones((4, 1)), np.full(4, 2.0))
    assert rep.coefficients[0] == pytest.approx(2.0) and np.allclose(rep.residual, 0.0)


def test_ols_duplicate_column_minimum_norm():
    x = np.linspace(-1, 1, 9)
    psi = np.column_stack([x, x])
    rep = solve_ols_tsvd(psi, 3 * x)
    np.testing.assert_allclose(rep.coefficients, [1.5, 1.5], atol=1e-12)
    assert rep.rank == 1 and rep.n_truncated == 1


def test_ols_rejects_mismatch():
    with pytest.raises(InvalidArgumentError):
        solve_ols_tsvd(np.ones((3, 2)), np.ones(4))


@given(st.integers(0, 2**31 - 1))
def test_ols_normal_equations(seed):
    psi, rng = _design(40, 3, seed)
    u = rng.normal(size=40)
    rep = solve_ols_tsvd(psi, u)
    assert np.max(np.abs(psi.T @ rep.residual)) <= 1e-10


def test_lad_median():
    rep = solve_lad(np.ones((4, 1)), np.array([0.0, 0.0, 0.0, 100.0]))
    assert rep.coefficients[0] == 0.0
    np.testing.assert_allclose(rep.g, [0, 0, 0, 100], atol=1e-12)


def test_lad_exact_on_polynomial_data():
    psi, rng = _design(60)
    c = rng.normal(size=psi.shape[1])
    rep = solve_lad(psi, psi @ c)
    np.testing.assert_allclose(rep.coefficients, c, atol=1e-8)
    assert np.max(np.abs(rep.g)) < 1e-8


def test_lad_outlier_robustness():
    psi, rng = _design(100, 2, seed=4)
    c = rng.normal(size=6)
    u = psi @ c
    bad = rng.choice(100, 5, replace=False)
    u[bad] += 10.0
    lad = solve_lad(psi, u).coefficients
    ols = solve_ols_tsvd(psi, u).coefficients
    assert np.max(np.abs(lad - c)) <= 1e-6
    assert np.max(np.abs(ols - c)) > 0.1


@pytest.mark.parametrize("backend", ["admm", "lp"])
def test_lad_backends_agree(backend):
    psi, rng = _design(80, 2, seed=9)
    u = rng.standard_t(2, size=80)
    ref = solve_lad(psi, u, backend="lp")
    rep = solve_lad(psi, u, backend=backend)
    assert np.abs(rep.residual).sum() == pytest.approx(np.abs(ref.residual).sum(), rel=1e-8)


def test_lad_without_null_space():
    with pytest.raises(UnsupportedConfigurationError):
        solve_lad(np.eye(3), np.ones(3))


@given(st.integers(0, 2**31 - 1))
def test_lad_not_worse_than_ols_in_l1(seed):
    psi, rng = _design(50, 2, seed)
    u = rng.normal(size=50) + (rng.random(50) < 0.1) * 5
    lad = solve_lad(psi, u)
    ols = solve_ols_tsvd(psi, u)
    assert np.abs(lad.residual).sum() <= np.abs(ols.residual).sum() + 1e-8


@given(st.integers(0, 2**31 - 1))
def test_lad_decomposition_consistency(seed):
    psi, rng = _design(40, 2, seed)
    u = rng.normal(size=40)
    rep = solve_lad(psi, u)
    gap = np.linalg.norm(psi @ rep.coefficients - (u - rep.g))
    assert gap == pytest.approx(rep.projection_residual, abs=1e-10)
    assert gap < 1e-8


@given(st.integers(0, 2**31 - 1))
def test_scaling_equivariance(seed):
    psi, rng = _design(40, 2, seed)
    u = rng.normal(size=40)
    for solve in (solve_ols_tsvd, solve_lad):
        np.testing.assert_allclose(solve(psi, 10 * u).coefficients, 10 * solve(psi, u).coefficients,
                                   atol=1e-10 * max(1.0, np.abs(solve(psi, u).coefficients).max() * 10))


def test_null_space_is_orthogonal():
    psi, _ = _design(20)
    z = null_space_basis(psi)
    assert z.shape == (20, 14)
    assert np.max(np.abs(psi.T @ z)) < 1e-12


def test_pivoted_qr_rank():
    x = np.linspace(-1, 1, 10)
    assert pivoted_qr(np.column_stack([x, 2 * x, np.ones(10)]))[3] == 2


def test_repair_examples():
    rep = RegressionReport(np.zeros(1), np.array([0.1, -0.9, 0.2]), 1)
    assert repair_misclassified(rep, 0.95).size == 0
    np.testing.assert_array_equal(repair_misclassified(rep, 0.6), [1])
    with pytest.raises(InvalidArgumentError):
        repair_misclassified(rep, 0.0)


def test_jump_floor_statistics():
    u = np.array([0.0, 0.0, 1.0, 3.0]).reshape(1, 4)
    lab = np.array([True, True, False, False]).reshape(1, 4)
    assert estimate_jump_floor(u, lab, (1, 4), "min") == pytest.approx(0.5)
    assert estimate_jump_floor(u, lab, (1, 4)) == pytest.approx(0.5)


def test_exact_classifier_needs_no_repair():
    model = BurgersModel()
    grid = build_grid(model.domain, 61)
    u = model(grid.points())
    fe = fit_frames(lambda x: model.indicator(x) < 0, GpcBasis(2, 6), grid, u, "lad", repair=True)
    assert fe.report.reassigned == ()


def test_report_json():
    rep = solve_ols_tsvd(np.ones((3, 1)), np.ones(3))
    d = json.loads(rep.to_json())
    assert d["method"] == "ols" and d["coefficients"] == [1.0]
