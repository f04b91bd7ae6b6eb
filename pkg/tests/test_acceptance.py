"""End-to-end acceptance criteria; each test prints one PASS/FAIL line.

Criteria that the implementation does not meet fail honestly; the analysis
lives in the project's decisions ledger.
"""

from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from discotrack.experiments import expand_sweep, load_config, run_single
from discotrack.forward_models import BurgersModel
from discotrack.levelset import zero_crossing_points
from discotrack.tracker import TrackerConfig, run_tracker

from conftest import hausdorff

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return emit


def _rows(name: str, **overrides):
    cfg = load_config(CONFIGS / name, overrides)
    return [run_single(c).row for _, c in expand_sweep(cfg)]


def _within_factor(values, targets, f=2.0):
    return all(t / f <= v <= t * f for v, t in zip(values, targets))


def _decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


def test_criterion_1_burgers_iso_zero(report, burgers_curve):
    t0 = time.perf_counter()
    tr = run_tracker(BurgersModel(), TrackerConfig(levels=2, m0=31))
    elapsed = time.perf_counter() - t0
    dxi = 2.0 / 60
    h = hausdorff(zero_crossing_points(tr.field), burgers_curve)
    ok = h <= 2 * dxi and elapsed <= 120
    assert report(1, ok, f"hausdorff={h:.4f} (limit {2 * dxi:.4f}) runtime={elapsed:.1f}s")


def test_criterion_2_megpc_table(report):
    t0 = time.perf_counter()
    rows = _rows("table1_megpc.yaml")
    elapsed = time.perf_counter() - t0
    eps = [r["eps_l1"] for r in rows]
    counts = [r["n_elements"] for r in rows]
    n_ev = [r["N_ev"] for r in rows]
    eps_ok = _within_factor(eps, [1.20e-1, 5.99e-2, 3.52e-2]) and _decreasing(eps)
    count_ok = all(abs(c - t) <= 0.4 * t for c, t in zip(counts, [144, 552, 1680]))
    budget_ok = _decreasing(eps) and all(b > a for a, b in zip(n_ev, n_ev[1:]))
    ok = eps_ok and count_ok and budget_ok and elapsed <= 300
    assert report(2, ok, f"eps={['%.3g' % e for e in eps]} elements={counts} N_ev={n_ev} "
                         f"eps_band={eps_ok} counts={count_ok} runtime={elapsed:.1f}s")


def test_criterion_3_sop_table(report):
    t0 = time.perf_counter()
    rows = _rows("table2_sop.yaml")
    elapsed = time.perf_counter() - t0
    eps = [r["eps_l1"] for r in rows]
    p = [r["p"] for r in rows]
    eps_ok = _within_factor(eps, [5.13e-2, 2.75e-2, 1.77e-2])
    p_ok = all(abs(a - b) <= 0.15 for a, b in zip(p, [0.46, 0.22, 0.10]))
    ok = eps_ok and _decreasing(eps) and p_ok and elapsed <= 600
    assert report(3, ok, f"eps={['%.3g' % e for e in eps]} p={['%.3f' % v for v in p]} eps_band={eps_ok} "
                         f"monotone={_decreasing(eps)} p_band={p_ok} runtime={elapsed:.1f}s")


@pytest.fixture(scope="module")
def fig7_rows():
    return _rows("fig7_fgpc.yaml")


def _eps(rows, solver, classifier):
    return {r["N"]: r["eps_l1"] for r in rows if r["solver"] == solver and r["classifier"] == classifier}


def test_criterion_4_lad_vs_ols(report, fig7_rows):
    lad, ols = _eps(fig7_rows, "lad", "computed"), _eps(fig7_rows, "ols", "computed")
    wins = sum(lad[n] <= ols[n] for n in (4, 6, 8))
    detail = " ".join(f"N={n}:lad={lad[n]:.3g}/ols={ols[n]:.3g}" for n in (4, 6, 8))
    assert report(4, wins >= 2, f"{detail} wins={wins}/3")


def test_criterion_5_exact_classifier_decay(report, fig7_rows):
    e = _eps(fig7_rows, "lad", "exact")
    ratio = e[2] / e[8]
    assert report(5, ratio >= 10, f"eps(N=2)={e[2]:.3g} eps(N=8)={e[8]:.3g} ratio={ratio:.3g}")


PROPERTY_SUITES = ["test_basis.py", "test_tessellation.py", "test_regression.py", "test_megpc.py",
                   "test_analytics.py"]


def test_criterion_6_property_suites(report):
    results = []
    for suite in PROPERTY_SUITES:
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                               str(ROOT / "tests" / suite)], capture_output=True, text=True, cwd=ROOT)
        results.append((suite, proc.returncode == 0, time.perf_counter() - t0))
    ok = all(passed and dt <= 60 for _, passed, dt in results)
    detail = " ".join(f"{s}:{'ok' if p else 'failed'}/{dt:.1f}s" for s, p, dt in results)
    assert report(6, ok, detail)


@pytest.mark.slow
def test_criterion_7_co2_smoke(report):
    t0 = time.perf_counter()
    cfg = load_config(CONFIGS / "co2_fgpc.yaml")
    res = run_single(cfg)
    elapsed = time.perf_counter() - t0
    eps = res.row["eps_l1"]
    # a nonempty iso-zero is enforced by the fit itself: an empty side raises before a row exists
    ok = np.isfinite(eps) and eps <= 0.3 and elapsed <= 1200
    assert report(7, ok, f"eps={eps:.4f} (limit 0.3) p={res.row['p']:.3f} runtime={elapsed:.0f}s")
