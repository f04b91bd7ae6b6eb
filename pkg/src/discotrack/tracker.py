"""Adaptive discontinuity tracking over nested grid levels.

Level 0 evaluates the model everywhere on the coarse grid and locks a level
set.  Each refinement interpolates phi to the new points, runs the model only
where |phi| is below ``band_tol`` coarse cells and interpolates u elsewhere,
then re-locks phi warm-started from the interpolated field.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, NonConvergenceError
from .forward_models.base import ForwardModel
from .levelset import (
    EvolveOptions,
    LevelSetField,
    build_speed_field,
    evolve_to_lock,
    init_levelset,
    redistance,
)
from .stochastic_space import (
    HIGH,
    SURROGATE,
    ModelEvaluationCache,
    StochasticGrid,
    build_grid,
    coarse_to_fine_index,
    interpolate_grid_values,
    refine_grid,
)


@dataclass(frozen=True)
class TrackerConfig:
    levels: int = 2
    m0: int = 31
    band_tol: float = 3.0
    lock_window: int = 20
    max_steps: int = 20_000
    seed_center: tuple | None = None
    # None: max(0.25, 3 (d - 1) dxi), which keeps eps * kappa <= 2/3 on the
    # seed sphere so the curvature term cannot collapse it on coarse 3D grids
    seed_radius: float | None = None
    gamma: float = 1.0
    # rebuild phi as a signed distance after each lock so |phi| measures
    # distance to the front on both sides
    redistance: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.levels < 1:
            raise InvalidArgumentError("levels must be >= 1")
        if self.m0 < 3:
            raise InvalidArgumentError("m0 must be >= 3")
        if self.band_tol <= 0:
            raise InvalidArgumentError("band_tol must be positive")

    def evolve_options(self) -> EvolveOptions:
        return EvolveOptions(lock_window=self.lock_window, max_steps=self.max_steps)


@dataclass
class LevelRecord:
    level: int
    m: int
    n_ev_high: int  # cumulative
    n_ev_total: int
    p: float
    steps_to_lock: int
    tau_lock: float


@dataclass
class TrackerResult:
    field: LevelSetField
    cache: ModelEvaluationCache
    records: list = field(default_factory=list)

    @property
    def grid(self) -> StochasticGrid:
        return self.cache.grid

    def write_log(self, path) -> None:
        with open(Path(path), "w") as fh:
            for r in self.records:
                fh.write(json.dumps({"level": r.level, "m": r.m, "N_ev_high_cum": r.n_ev_high,
                                     "p": r.p, "steps_to_lock": r.steps_to_lock}) + "\n")


def classify_new_points(phi_interp, band_tol: float, dxi_coarse: float) -> np.ndarray:
    """HIGH (True) where |phi| < band_tol * dxi_coarse, strictly."""
    return np.abs(np.asarray(phi_interp, dtype=float)) < band_tol * dxi_coarse


def _lock(phi: LevelSetField, cache: ModelEvaluationCache, cfg: TrackerConfig, level: int) -> LevelSetField:
    speed = build_speed_field(cache, gamma=cfg.gamma)
    try:
        locked = evolve_to_lock(phi, speed, cfg.evolve_options())
    except NonConvergenceError as exc:
        exc.diagnostics["level"] = level
        raise
    locked = LevelSetField(locked.grid, locked.phi, locked.tau, locked.steps - phi.steps)
    if not locked.has_interface:
        warnings.warn(f"the zero level set vanished at level {level}", RuntimeWarning, stacklevel=3)
    return redistance(locked) if cfg.redistance else locked


def run_tracker(model: ForwardModel, cfg: TrackerConfig | None = None, log_path=None) -> TrackerResult:
    cfg = cfg or TrackerConfig()
    grid = build_grid(model.domain, cfg.m0)
    values = model(grid.points(), workers=cfg.workers)
    cache = ModelEvaluationCache(grid, values)
    radius = cfg.seed_radius
    if radius is None:
        radius = max(0.25, 3.0 * (grid.dim - 1) * float(np.min(grid.spacing)))
    phi = init_levelset(grid, cfg.seed_center, radius)
    phi = _lock(phi, cache, cfg, 0)
    records = [LevelRecord(0, cfg.m0, grid.n_points, grid.n_points, 1.0, phi.steps, phi.tau)]

    for level in range(1, cfg.levels):
        fine = refine_grid(grid)
        old = coarse_to_fine_index(grid, fine)
        is_new = np.ones(fine.n_points, dtype=bool)
        is_new[old] = False
        pts = fine.points()
        new_pts = pts[is_new]

        phi_new = interpolate_grid_values(grid, phi.phi, new_pts)
        high_new = classify_new_points(phi_new, cfg.band_tol, float(np.min(grid.spacing)))

        u = np.empty(fine.n_points)
        high = np.empty(fine.n_points, dtype=bool)
        u[old], high[old] = cache.values, cache.high
        new_idx = np.flatnonzero(is_new)
        u_new = interpolate_grid_values(grid, cache.values, new_pts)
        if high_new.any():
            u_new[high_new] = model(new_pts[high_new], workers=cfg.workers)
        u[new_idx] = u_new
        high[new_idx] = np.where(high_new, HIGH, SURROGATE)
        cache = ModelEvaluationCache(fine, u, high)

        phi_f = np.empty(fine.n_points)
        phi_f[old] = phi.phi
        phi_f[new_idx] = phi_new
        phi = _lock(LevelSetField(fine, phi_f), cache, cfg, level)
        grid = fine
        records.append(LevelRecord(level, fine.m[0], cache.n_high, fine.n_points,
                                   cache.high_fraction, phi.steps, phi.tau))
        if records[-1].p > records[-2].p:
            warnings.warn(f"high-fidelity fraction grew at level {level}", RuntimeWarning, stacklevel=2)

    result = TrackerResult(phi, cache, records)
    if log_path is not None:
        result.write_log(log_path)
    return result


def record_dicts(result: TrackerResult) -> list:
    return [asdict(r) for r in result.records]
