from __future__ import annotations

import json

import numpy as np
import pytest

from discotrack.forward_models import BurgersModel, burgers_discontinuity_indicator
from discotrack.stochastic_space import build_grid, coarse_to_fine_index, refine_grid
from discotrack.tracker import TrackerConfig, classify_new_points, record_dicts, run_tracker


@pytest.fixture(scope="module")
def burgers_two_level(tmp_path_factory):
    log = tmp_path_factory.mktemp("tracker") / "log.jsonl"
    return run_tracker(BurgersModel(), TrackerConfig(levels=2), log_path=log), log


def test_single_level_is_all_high():
    res = run_tracker(BurgersModel(), TrackerConfig(levels=1))
    assert res.records[0].p == 1.0 and res.cache.high.all()


def test_classify_on_interface_is_high():
    assert classify_new_points([0.0], 3.0, 0.1)[0]


def test_classify_far_is_surrogate():
    assert not classify_new_points([1.0], 3.0, 0.1)[0]


def test_classify_tie_is_surrogate():
    assert not classify_new_points([0.75], 3.0, 0.25)[0]


def test_coarse_values_are_reused(burgers_two_level):
    res, _ = burgers_two_level
    model = BurgersModel()
    coarse = build_grid(model.domain, 31)
    idx = coarse_to_fine_index(coarse, res.grid)
    np.testing.assert_array_equal(res.cache.values[idx], model(coarse.points()))
    assert res.cache.high[idx].all()


def test_high_values_are_model_values(burgers_two_level):
    res, _ = burgers_two_level
    pts = res.grid.points()[res.cache.high]
    np.testing.assert_array_equal(res.cache.values[res.cache.high], BurgersModel()(pts))


def test_band_covers_straddling_cells(burgers_two_level):
    res, _ = burgers_two_level
    model = BurgersModel()
    coarse = build_grid(model.domain, 31)
    fine = refine_grid(coarse)
    side = burgers_discontinuity_indicator(model.config, fine.points()) >= 0
    mi = fine.multi_index(np.arange(fine.n_points))
    lo, hi = mi // 2 * 2, (mi + 1) // 2 * 2
    for k in np.flatnonzero(~res.cache.high):
        corners = np.array([[lo[k, 0], lo[k, 1]], [lo[k, 0], hi[k, 1]], [hi[k, 0], lo[k, 1]], [hi[k, 0], hi[k, 1]]])
        s = side[fine.flat_index(corners)]
        assert s.all() or not s.any(), f"surrogate point {mi[k]} lies in a cell cut by the discontinuity"


def test_warm_start_steps():
    res = run_tracker(BurgersModel(), TrackerConfig(levels=3))
    steps = [r.steps_to_lock for r in res.records]
    for a, b in zip(steps, steps[1:]):
        assert b <= 2 * a


def test_log_lines(burgers_two_level):
    res, log = burgers_two_level
    lines = [json.loads(s) for s in log.read_text().splitlines()]
    assert [r["m"] for r in lines] == [31, 61]
    assert set(lines[0]) == {"level", "m", "N_ev_high_cum", "p", "steps_to_lock"}
    assert lines[1]["N_ev_high_cum"] == res.cache.n_high
    assert record_dicts(res)[1]["p"] == pytest.approx(res.cache.high_fraction)


def test_config_validation():
    from discotrack.errors import InvalidArgumentError

    with pytest.raises(InvalidArgumentError):
        TrackerConfig(levels=0)
    with pytest.raises(InvalidArgumentError):
        TrackerConfig(band_tol=0)
