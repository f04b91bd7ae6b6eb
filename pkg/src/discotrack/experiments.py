"""Declarative experiment configs and the megpc / sop / fgpc pipelines.

A config is a nested mapping (YAML on disk).  Unknown keys are errors so that
a typo can never silently fall back to a default.  ``sweep`` maps dotted keys
to value lists; the cartesian product of all sweeps is run and every
combination becomes one metrics row.
"""

from __future__ import annotations

import copy
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .analytics import MonteCarloStats, monte_carlo_reference, rel_l1_error, rel_moment_errors
from .basis import GpcBasis, count_basis
from .errors import ConfigError, InvalidArgumentError
from .forward_models import (
    BlackBoxModel,
    BurgersModel,
    BurgersRiemannConfig,
    CO2Model,
    CO2ModelConfig,
    burgers_exact_moments,
)
from .megpc import run_adaptive_megpc
from .stochastic_space import build_grid
from .surrogates import fit_frames, fit_sop, levelset_classifier
from .tessellation import default_coarse_n, initial_mesh, refine_by_levelset
from .tracker import TrackerConfig, run_tracker

SCHEMA_VERSION = 1
ENV_PREFIX = "DISCOTRACK_"

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "experiment": "experiment",
    "method": "fgpc",
    "seed": 0,
    "workers": 1,
    "model": {"name": "burgers", "config": {}, "n_cells": None, "command": None, "dim": None, "timeout": None},
    "tracker": {"levels": 2, "m0": 31, "band_tol": 3.0, "lock_window": 20, "max_steps": 20_000,
                "seed_center": None, "seed_radius": None, "gamma": 1.0, "redistance": True},
    "basis": {"N": 2},
    "regression": {"solver": "lad", "eps": 1e-8, "lad_backend": "auto"},
    "megpc": {"theta1": 1e-3, "theta2": 0.2, "alpha": 0.5, "n_quad": None, "max_elements": 100_000,
              "max_evals": None},
    "sop": {"coarse_n": None, "min_sep": None},
    "fgpc": {"classifier": "computed", "data": None, "repair": False, "jump_floor": None},
    "metrics": {"m": None, "reference_cells": 800, "moments": "auto", "mc_samples": 100_000},
    "sweep": {},
    "output": {"dir": "runs"},
}

METHODS = ("megpc", "sop", "fgpc")
FREE_FORM = {("model", "config"), ("sweep",)}


def _merge(base: dict, over: dict, path: tuple = ()) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {'.'.join(path + (k,))!r}")
        if isinstance(base[k], dict) and path + (k,) not in FREE_FORM:
            if not isinstance(v, dict):
                raise ConfigError(f"config key {'.'.join(path + (k,))!r} must be a mapping")
            out[k] = _merge(base[k], v, path + (k,))
        else:
            out[k] = copy.deepcopy(v)
    return out


def set_dotted(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node, ref = cfg, DEFAULTS
    for i, p in enumerate(parts[:-1]):
        if not isinstance(node.get(p), dict) or (ref is not None and p not in ref):
            raise ConfigError(f"unknown config key {key!r}")
        node = node[p]
        ref = None if tuple(parts[:i + 1]) in FREE_FORM else ref[p]
    if ref is not None and parts[-1] not in ref:
        raise ConfigError(f"unknown config key {key!r}")
    node[parts[-1]] = value


def env_overrides(environ=None) -> dict:
    """DISCOTRACK_TRACKER__LEVELS=3 -> {"tracker.levels": 3}; values parsed as YAML scalars."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, raw in environ.items():
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].lower().replace("__", ".")
            out[key] = yaml.safe_load(raw)
    return out


def load_config(source, overrides: dict | None = None, environ=None) -> dict:
    """Validated config from a path, a YAML string or a mapping, plus overrides."""
    if isinstance(source, dict):
        raw = source
    else:
        is_text = isinstance(source, str) and "\n" in source
        try:
            text = str(source) if is_text or not Path(source).is_file() else Path(source).read_text()
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    cfg = _merge(DEFAULTS, raw)
    for key, value in {**env_overrides(environ), **(overrides or {})}.items():
        set_dotted(cfg, key, value)
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    if cfg["method"] not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}")
    if cfg["regression"]["solver"] not in ("ols", "lad"):
        raise ConfigError("regression.solver must be 'ols' or 'lad'")
    if cfg["fgpc"]["classifier"] not in ("computed", "exact"):
        raise ConfigError("fgpc.classifier must be 'computed' or 'exact'")
    if cfg["model"]["name"] not in ("burgers", "co2", "blackbox"):
        raise ConfigError(f"unknown model {cfg['model']['name']!r}")
    for key, values in cfg["sweep"].items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{key} must be a non-empty list")
        set_dotted(copy.deepcopy(cfg), key, values[0])


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=True)


def build_model(cfg: dict):
    spec = cfg["model"]
    try:
        if spec["name"] == "burgers":
            return BurgersModel(BurgersRiemannConfig(**spec["config"]))
        if spec["name"] == "co2":
            kw = {k: tuple(v) if isinstance(v, list) else v for k, v in spec["config"].items()}
            return CO2Model(CO2ModelConfig(**kw), n_cells=spec["n_cells"])
        return BlackBoxModel(spec["command"], int(spec["dim"]), spec["timeout"])
    except TypeError as exc:
        raise ConfigError(f"bad model config: {exc}") from exc


def reference_model(cfg: dict, model):
    """Model used for the reference values (a finer FV resolution for CO2)."""
    if isinstance(model, CO2Model):
        return CO2Model(model.config, n_cells=cfg["metrics"]["reference_cells"])
    return model


def tracker_config(cfg: dict) -> TrackerConfig:
    t = dict(cfg["tracker"])
    if t["seed_center"] is not None:
        t["seed_center"] = tuple(t["seed_center"])
    return TrackerConfig(**t, workers=cfg["workers"])


@dataclass
class RunResult:
    row: dict
    artifacts: dict = field(default_factory=dict)


def _moments_reference(cfg: dict, model, ref_model) -> MonteCarloStats | None:
    mode = cfg["metrics"]["moments"]
    if mode == "none":
        return None
    if mode == "auto":
        mode = "exact" if isinstance(model, BurgersModel) else "mc"
    if mode == "exact":
        if not isinstance(model, BurgersModel):
            raise ConfigError("exact moments are only available for the Burgers model")
        mu, sd = burgers_exact_moments(model.config)
        return MonteCarloStats(mu, sd, 0, 0.0, 0.0, None)
    if mode == "mc":
        return monte_carlo_reference(ref_model, int(cfg["metrics"]["mc_samples"]), seed=cfg["seed"],
                                     workers=cfg["workers"])
    raise ConfigError("metrics.moments must be auto, exact, mc or none")


def _row(cfg, method, N, P, n_ev, eps_l1, stats, mom_ref, extra=None):
    mean, var = stats
    eps_mu = eps_sigma = math.nan
    if mom_ref is not None:
        eps_mu, eps_sigma = rel_moment_errors(mean, math.sqrt(max(var, 0.0)), mom_ref)
    row = {"experiment": cfg["experiment"], "method": method, "N": N, "P": P, "N_ev": int(n_ev),
           "eps_l1": float(eps_l1), "eps_mu": float(eps_mu), "eps_sigma": float(eps_sigma)}
    row.update(extra or {})
    return row


def run_single(cfg: dict, out_dir: Path | None = None, tag: str = "") -> RunResult:
    """One pipeline execution for a fully resolved (sweep-free) config."""
    model = build_model(cfg)
    ref_model = reference_model(cfg, model)
    N = int(cfg["basis"]["N"])
    reg = cfg["regression"]
    method = cfg["method"]
    art = {}

    def path(name):
        if out_dir is None:
            return None
        p = out_dir / f"{tag}{name}"
        art[name] = str(p)
        return p

    if method == "megpc":
        mc = cfg["megpc"]
        tree = run_adaptive_megpc(model, N, mc["theta1"], mc["theta2"], mc["alpha"], mc["n_quad"],
                                  mc["max_elements"], mc["max_evals"], cfg["workers"])
        grid = build_grid(model.domain, cfg["metrics"]["m"] or 241)
        pts = grid.points()
        eps_l1 = rel_l1_error(tree.evaluate(pts), ref_model(pts, workers=cfg["workers"]), grid)
        row = _row(cfg, "ME-gPC", N, count_basis(N, model.dim), tree.n_ev, eps_l1, tree.statistics(),
                   _moments_reference(cfg, model, ref_model),
                   {"theta1": mc["theta1"], "n_elements": tree.n_elements})
        return RunResult(row, art)

    tr = run_tracker(model, tracker_config(cfg), log_path=path("tracker.jsonl"))
    grid = tr.grid
    if out_dir is not None:
        tr.cache.to_csv(path("cache.csv"))
        tr.field.to_csv(path("levelset.csv"))
    metric_grid = grid if cfg["metrics"]["m"] is None else build_grid(model.domain, cfg["metrics"]["m"])
    mpts = metric_grid.points()
    u_ref = ref_model(mpts, workers=cfg["workers"])
    mom_ref = _moments_reference(cfg, model, ref_model)
    extra = {"levels": tr.records[-1].level + 1, "p": tr.records[-1].p}

    if method == "sop":
        sc = cfg["sop"]
        coarse_n = sc["coarse_n"] or default_coarse_n(grid.m[0])
        min_sep = None if sc["min_sep"] is None else sc["min_sep"] * float(np.min(grid.spacing))
        mesh = refine_by_levelset(initial_mesh(grid, coarse_n), tr.field, min_sep)
        sop = fit_sop(mesh, grid, tr.cache.values, N, reg["solver"], reg["eps"], tr.field.phi,
                      reg["lad_backend"])
        if out_dir is not None:
            sop.mesh.to_csv(path("mesh_vertices.csv"), path("mesh_simplices.csv"))
        eps_l1 = rel_l1_error(sop.evaluate(mpts), u_ref, metric_grid)
        extra["n_elements"] = sop.mesh.n_simplices
        return RunResult(_row(cfg, "SOP", N, count_basis(N, model.dim), tr.cache.n_high, eps_l1,
                              sop.statistics(), mom_ref, extra), art)

    fc = cfg["fgpc"]
    if fc["classifier"] == "exact":
        if not hasattr(model, "indicator"):
            raise ConfigError("the exact classifier needs a model with an indicator")
        classifier = lambda x: model.indicator(x) < 0.0  # noqa: E731
    else:
        classifier = levelset_classifier(tr.field)
    data = fc["data"] or ("exact" if fc["classifier"] == "exact" else "cache")
    if data == "exact":
        values, n_ev = model(grid.points(), workers=cfg["workers"]), grid.n_points
    elif data == "cache":
        values, n_ev = tr.cache.values, tr.cache.n_high
    else:
        raise ConfigError("fgpc.data must be 'cache' or 'exact'")
    gpc = GpcBasis(model.dim, N)
    fe = fit_frames(classifier, gpc, grid, values, reg["solver"], reg["eps"], fc["repair"], fc["jump_floor"],
                    reg["lad_backend"])
    if metric_grid is grid:
        s = fe.grid_values()
    else:
        s = fe.evaluate(mpts)
    eps_l1 = rel_l1_error(s, u_ref, metric_grid)
    if out_dir is not None:
        Path(path("regression.json")).write_text(fe.report.to_json())
    extra.update({"classifier": fc["classifier"], "solver": reg["solver"], "reassigned": len(fe.report.reassigned)})
    return RunResult(_row(cfg, "F-gPC", N, fe.frames.size, n_ev, eps_l1, fe.statistics(), mom_ref, extra), art)


def expand_sweep(cfg: dict) -> list:
    """[(label, resolved config)] over the cartesian product of ``cfg['sweep']``."""
    keys = sorted(cfg["sweep"])
    combos = itertools.product(*(cfg["sweep"][k] for k in keys)) if keys else [()]
    out = []
    for combo in combos:
        c = copy.deepcopy(cfg)
        c["sweep"] = {}
        for k, v in zip(keys, combo):
            set_dotted(c, k, v)
        validate(c)
        label = "_".join(f"{k.split('.')[-1]}={v}" for k, v in zip(keys, combo))
        out.append((label, c))
    return out


def new_run_dir(root: Path, name: str) -> Path:
    """A fresh directory under ``root``; existing runs are never touched."""
    root.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    for k in itertools.count():
        d = root / f"{name}-{stamp}-{k:03d}"
        try:
            d.mkdir()
            return d
        except FileExistsError:
            continue


def run_experiment(cfg: dict, out_root=None) -> tuple:
    """Run every sweep point; write config, metrics CSV and manifest. Returns (run_dir, rows)."""
    from .analytics import METRIC_FIELDS

    root = Path(out_root or cfg["output"]["dir"])
    run_dir = new_run_dir(root, cfg["experiment"])
    (run_dir / "config.yaml").write_text(dump_config(cfg))
    rows, artifacts, t0 = [], {}, time.time()
    for i, (label, c) in enumerate(expand_sweep(cfg)):
        np.random.seed(c["seed"])  # only third-party code could read the legacy global state
        res = run_single(c, run_dir, f"{i:03d}_")
        res.row["sweep"] = label
        rows.append(res.row)
        artifacts[label or "run"] = res.artifacts
    fields = METRIC_FIELDS + sorted({k for r in rows for k in r} - set(METRIC_FIELDS))
    write_rows_csv(rows, run_dir / "metrics.csv", fields)
    manifest = {"schema_version": SCHEMA_VERSION, "experiment": cfg["experiment"], "method": cfg["method"],
                "seed": cfg["seed"], "n_runs": len(rows), "wall_time_s": round(time.time() - t0, 3),
                "files": sorted(p.name for p in run_dir.iterdir()), "artifacts": artifacts}
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return run_dir, rows


def write_rows_csv(rows, path, fields) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})


PLOT_FIELDS = ["series", "x", "y"]


def plot_series(rows, x: str = "N", y: str = "eps_l1") -> list:
    """Plot-ready rows: one series per (solver, classifier) pair present in ``rows``."""
    out = []
    for r in rows:
        if x not in r or y not in r or r[x] in ("", None):
            raise InvalidArgumentError(f"metrics row lacks {x!r} or {y!r}")
        series = "/".join(str(r[k]) for k in ("method", "solver", "classifier") if r.get(k) not in (None, ""))
        out.append({"series": series, "x": r[x], "y": r[y]})
    out.sort(key=lambda d: (d["series"], float(d["x"])))
    return out
