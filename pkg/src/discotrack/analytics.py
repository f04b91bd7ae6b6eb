"""Error metrics and Monte Carlo reference statistics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, UndefinedMetricError
from .stochastic_space import StochasticGrid


@dataclass(frozen=True)
class MonteCarloStats:
    mean: float
    std: float
    n_samples: int
    se_mean: float
    se_std: float
    seed: int | None = None


def weighted_l1_norm(values, grid: StochasticGrid) -> float:
    """prod(dxi) * sum rho |u| over the grid points."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.n_points,):
        raise InvalidArgumentError("values do not match the grid")
    return float(np.prod(grid.spacing) * grid.domain.density * np.abs(v).sum())


def rel_l1_error(surrogate, reference, grid: StochasticGrid) -> float:
    """||s - r||_{rho,l1} / ||r||_{rho,l1} on the grid points.

    ``surrogate`` and ``reference`` are value arrays on the grid or callables
    taking the (n, d) point array.
    """
    pts = None
    vals = []
    for f in (surrogate, reference):
        if callable(f):
            pts = grid.points() if pts is None else pts
            f = f(pts)
        vals.append(np.asarray(f, dtype=float))
    s, r = vals
    den = weighted_l1_norm(r, grid)
    if den == 0.0:
        raise UndefinedMetricError("reference has zero l1 norm")
    return weighted_l1_norm(s - r, grid) / den


def rel_moment_errors(mean, std, ref: MonteCarloStats | tuple):
    """(|mu - mu_ref| / |mu_ref|, |sigma - sigma_ref| / |sigma_ref|)."""
    mu_ref, sd_ref = (ref.mean, ref.std) if isinstance(ref, MonteCarloStats) else ref
    if mu_ref == 0.0 or sd_ref == 0.0:
        raise UndefinedMetricError("reference mean or standard deviation is zero")
    return abs(mean - mu_ref) / abs(mu_ref), abs(std - sd_ref) / abs(sd_ref)


def monte_carlo_reference(model, n_samples: int, seed: int = 0, batch: int = 1_000_000,
                          workers: int = 1) -> MonteCarloStats:
    """Sample mean and standard deviation of ``model`` under uniform xi.

    Samples are drawn in batches from per-batch streams spawned off ``seed``,
    so the result depends on (seed, batch) only.  Moments are merged with
    Chan's pairwise update.
    """
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    d = model.dim
    n_batches = -(-n_samples // batch)
    streams = np.random.SeedSequence(seed).spawn(n_batches)
    n_tot, mean, m2 = 0, 0.0, 0.0
    for k, ss in enumerate(streams):
        n = min(batch, n_samples - k * batch)
        xi = np.random.default_rng(ss).uniform(-1.0, 1.0, (n, d))
        u = np.asarray(model(xi, workers=workers), dtype=float)
        b_mean = float(u.mean())
        b_m2 = float(((u - b_mean) ** 2).sum())
        delta = b_mean - mean
        tot = n_tot + n
        mean += delta * n / tot
        m2 += b_m2 + delta * delta * n_tot * n / tot
        n_tot = tot
    var = m2 / (n_tot - 1) if n_tot > 1 else 0.0
    std = float(np.sqrt(var))
    # normal-approximation standard error of the standard deviation
    se_std = std / np.sqrt(2.0 * (n_tot - 1)) if n_tot > 1 else 0.0
    return MonteCarloStats(float(mean), std, n_tot, std / np.sqrt(n_tot), float(se_std), seed)


METRIC_FIELDS = ["experiment", "method", "N", "P", "N_ev", "eps_l1", "eps_mu", "eps_sigma"]


def write_metrics_csv(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=METRIC_FIELDS, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
