from __future__ import annotations

import csv
import json

import pytest
import yaml

from discotrack.cli import main
from discotrack.errors import ConfigError
from discotrack.experiments import dump_config, env_overrides, load_config, plot_series

SMALL = """
experiment: small
method: fgpc
tracker: {levels: 1, m0: 11}
basis: {N: 2}
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text(SMALL)
    return p


def _metrics(run_dir):
    return (run_dir / "metrics.csv").read_text()


def test_run_writes_artifacts(cfg_file, tmp_path, capsys):
    assert main(["run", str(cfg_file), "--out", str(tmp_path / "runs")]) == 0
    run_dir = tmp_path / "runs" / capsys.readouterr().out.strip().split("/")[-1]
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["n_runs"] == 1 and "metrics.csv" in manifest["files"]
    assert yaml.safe_load((run_dir / "config.yaml").read_text())["tracker"]["levels"] == 1
    rows = list(csv.DictReader(open(run_dir / "metrics.csv")))
    assert rows[0]["method"] == "F-gPC" and float(rows[0]["eps_l1"]) > 0


def test_same_config_same_metrics_new_directory(cfg_file, tmp_path, capsys):
    main(["run", str(cfg_file), "--out", str(tmp_path)])
    main(["run", str(cfg_file), "--out", str(tmp_path)])
    dirs = sorted(p for p in tmp_path.iterdir() if p.is_dir())
    assert len(dirs) == 2
    assert _metrics(dirs[0]) == _metrics(dirs[1])


def test_unknown_key_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text(SMALL + "tracker_typo: 1\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_missing_config_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    p = tmp_path / "bb.yaml"
    p.write_text("method: megpc\nmodel: {name: blackbox, command: 'false', dim: 2}\nmetrics: {moments: none}\n")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 3
    assert json.loads(capsys.readouterr().err)["kind"] == "numerical"


def test_set_override_and_sweep(cfg_file, tmp_path, capsys):
    assert main(["run", str(cfg_file), "--out", str(tmp_path), "--set", "sweep={basis.N: [1, 2]}",
                 "--set", "regression.solver=ols"]) == 0
    run_dir = next(p for p in tmp_path.iterdir() if p.is_dir())
    rows = list(csv.DictReader(open(run_dir / "metrics.csv")))
    assert [r["N"] for r in rows] == ["1", "2"] and {r["solver"] for r in rows} == {"ols"}


def test_env_override():
    over = env_overrides({"DISCOTRACK_TRACKER__LEVELS": "3", "OTHER": "x"})
    assert over == {"tracker.levels": 3}
    cfg = load_config(SMALL, environ={"DISCOTRACK_TRACKER__LEVELS": "3"})
    assert cfg["tracker"]["levels"] == 3


def test_explicit_override_beats_env():
    cfg = load_config(SMALL, {"tracker.levels": 2}, environ={"DISCOTRACK_TRACKER__LEVELS": "3"})
    assert cfg["tracker"]["levels"] == 2


def test_schema_version_checked():
    with pytest.raises(ConfigError):
        load_config({"schema_version": 99})


def test_config_round_trip():
    cfg = load_config(SMALL)
    assert load_config(dump_config(cfg)) == cfg


def test_plot_data_empty(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["plot-data", "-o", str(out)]) == 0
    assert out.read_text().splitlines() == ["series,x,y"]


def test_plot_series_groups():
    rows = [{"method": "F-gPC", "solver": s, "classifier": c, "N": n, "eps_l1": 0.1}
            for s in ("lad", "ols") for c in ("exact", "computed") for n in (4, 2)]
    out = plot_series(rows)
    assert len({r["series"] for r in out}) == 4
    assert [r["x"] for r in out[:2]] == [2, 4]


def test_plot_data_missing_input(tmp_path):
    assert main(["plot-data", str(tmp_path / "none.csv"), "-o", str(tmp_path / "o.csv")]) == 2
