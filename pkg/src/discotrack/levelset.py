"""Level-set evolution in stochastic space.

    phi_tau + F |grad phi| = 0,   F = (1 - eps kappa) exp(-gamma |grad u|^2)

phi is negative inside the seed sphere and F >= 0 pushes the front outwards
until the sensing factor exp(-gamma |grad u|^2) vanishes at a discontinuity of
u.  Spatial derivatives use first-order Godunov upwinding for the Hamiltonian
and central differences for the curvature, with linearly extrapolated ghost
nodes on the faces of E.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgumentError, MissingDataError, NonConvergenceError
from .stochastic_space import ModelEvaluationCache, StochasticGrid

GRAD_FLOOR = 1e-12


@dataclass(frozen=True)
class LevelSetField:
    """phi on every grid point (flat C order) plus pseudo-time bookkeeping."""

    grid: StochasticGrid
    phi: np.ndarray
    tau: float = 0.0
    steps: int = 0
    inside: np.ndarray = field(default=None)  # sign snapshot: phi < 0

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.grid.n_points,):
            raise InvalidArgumentError("phi does not match the grid")
        if not np.all(np.isfinite(phi)):
            raise InvalidArgumentError("phi must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "inside", phi < 0.0)

    @property
    def has_interface(self) -> bool:
        return bool(self.inside.any() and (~self.inside).any())

    def to_csv(self, path) -> None:
        pts = self.grid.points()
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"xi_{k + 1}" for k in range(self.grid.dim)] + ["phi"])
            for p, v in zip(pts, self.phi):
                w.writerow([*(f"{x:.17g}" for x in p), f"{v:.17g}"])


@dataclass(frozen=True)
class SpeedField:
    """Grid values of exp(-gamma |grad u|^2) and the curvature weight eps."""

    grid: StochasticGrid
    base: np.ndarray
    eps: float
    gamma: float = 1.0


@dataclass(frozen=True)
class EvolveOptions:
    lock_window: int = 20
    max_steps: int = 20_000
    cfl: float = 0.5
    use_curvature: bool = True
    # curvature is clipped to the largest value the grid can represent
    kappa_clip: bool = True
    scheme: str = "euler"  # or "rk2" (SSP/TVD Runge-Kutta)


def init_levelset(grid: StochasticGrid, center=None, radius: float = 0.25) -> LevelSetField:
    """Signed distance to a sphere, negative inside."""
    if not 0.0 < radius < 1.0:
        raise InvalidArgumentError(f"seed radius must lie in (0, 1), got {radius}")
    center = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    if center.shape != (grid.dim,):
        raise InvalidArgumentError("seed center has the wrong dimension")
    phi = np.linalg.norm(grid.points() - center, axis=1) - radius
    return LevelSetField(grid, phi)


def build_speed_field(cache: ModelEvaluationCache, gamma: float = 1.0, eps: float | None = None) -> SpeedField:
    """Discontinuity sensor exp(-gamma |grad u|^2) from cached values.

    Gradients are second-order central in the interior and second-order
    one-sided on the faces.  ``eps`` defaults to twice the smallest spacing.
    """
    grid = cache.grid
    u = np.asarray(cache.values, dtype=float)
    if u.shape != (grid.n_points,) or not np.all(np.isfinite(u)):
        raise MissingDataError("cache must hold a finite value at every grid point")
    if gamma < 0:
        raise InvalidArgumentError("gamma must be non-negative")
    grads = _gradient(u.reshape(grid.shape), grid.spacing)
    g2 = sum(g * g for g in grads)
    base = np.exp(-gamma * g2).ravel()
    eps = 2.0 * float(np.min(grid.spacing)) if eps is None else float(eps)
    return SpeedField(grid, base, eps, gamma)


def _gradient(a, spacing):
    if a.ndim == 1:
        return [np.gradient(a, spacing[0], edge_order=2)]
    return list(np.gradient(a, *spacing, edge_order=2))


def _pad_linear(a):
    """One ghost layer per face, linearly extrapolated; corners follow."""
    for ax in range(a.ndim):
        lo = 2 * np.take(a, [0], axis=ax) - np.take(a, [1], axis=ax)
        hi = 2 * np.take(a, [-1], axis=ax) - np.take(a, [-2], axis=ax)
        a = np.concatenate([lo, a, hi], axis=ax)
    return a


def _interior(d):
    return (slice(1, -1),) * d


def _window(k):
    # interior window shifted by k in {-1, 0, 1} along one padded axis
    return slice(1 + k, -1 + k if k < 1 else None)


def _shift(d, ax, k):
    s = [slice(1, -1)] * d
    s[ax] = _window(k)
    return tuple(s)


def curvature_field(phi, grid: StochasticGrid) -> np.ndarray:
    """Mean curvature div(grad phi / |grad phi|) at every grid point (flat)."""
    a = _pad_linear(np.asarray(phi, dtype=float).reshape(grid.shape))
    d, h = grid.dim, grid.spacing
    c = a[_interior(d)]
    g = [(a[_shift(d, i, 1)] - a[_shift(d, i, -1)]) / (2 * h[i]) for i in range(d)]
    norm2 = sum(gi * gi for gi in g)
    lap_term = np.zeros_like(c)
    hess_term = np.zeros_like(c)
    for i in range(d):
        hii = (a[_shift(d, i, 1)] - 2 * c + a[_shift(d, i, -1)]) / h[i] ** 2
        lap_term += hii
        hess_term += g[i] * g[i] * hii
        for j in range(i + 1, d):
            hij = _cross(a, d, i, j) / (4 * h[i] * h[j])
            hess_term += 2 * g[i] * g[j] * hij
    norm = np.maximum(np.sqrt(norm2), GRAD_FLOOR)
    kappa = (norm2 * lap_term - hess_term) / norm**3
    return kappa.ravel()


def _cross(a, d, i, j):
    def sl(di, dj):
        s = [slice(1, -1)] * d
        s[i] = _window(di)
        s[j] = _window(dj)
        return tuple(s)
    return a[sl(1, 1)] - a[sl(1, -1)] - a[sl(-1, 1)] + a[sl(-1, -1)]


def curvature(field_: LevelSetField, at) -> float:
    """Curvature at one grid point, given by multi-index or flat index."""
    idx = np.asarray(at)
    flat = int(field_.grid.flat_index(idx[None, :])[0]) if idx.ndim == 1 else int(idx)
    return float(curvature_field(field_.phi, field_.grid)[flat])


def _godunov_norm(phi, grid: StochasticGrid, speed):
    """Upwind |grad phi| for F |grad phi| (selects by the sign of F)."""
    a = _pad_linear(phi.reshape(grid.shape))
    d, h = grid.dim, grid.spacing
    c = a[_interior(d)]
    pos = np.zeros_like(c)
    neg = np.zeros_like(c)
    for i in range(d):
        dm = (c - a[_shift(d, i, -1)]) / h[i]
        dp = (a[_shift(d, i, 1)] - c) / h[i]
        pos += np.maximum(dm, 0.0) ** 2 + np.minimum(dp, 0.0) ** 2
        neg += np.minimum(dm, 0.0) ** 2 + np.maximum(dp, 0.0) ** 2
    return np.sqrt(np.where(speed.reshape(grid.shape) > 0.0, pos, neg)).ravel()


def _total_speed(phi, speed: SpeedField, opts: EvolveOptions):
    if not opts.use_curvature or speed.eps == 0.0:
        return speed.base
    kappa = curvature_field(phi, speed.grid)
    if opts.kappa_clip:
        kmax = 1.0 / float(np.min(speed.grid.spacing))
        kappa = np.clip(kappa, -kmax, kmax)
    return (1.0 - speed.eps * kappa) * speed.base


def _rate(phi, speed, opts):
    f = _total_speed(phi, speed, opts)
    return -f * _godunov_norm(phi, speed.grid, f), f


def evolve_to_lock(phi0: LevelSetField, speed: SpeedField, opts: EvolveOptions | None = None) -> LevelSetField:
    """March phi in pseudo-time until its sign pattern is frozen.

    Locks once the vector of signs has not changed for ``lock_window``
    consecutive steps.  Raises NonConvergenceError (carrying the last field)
    when ``max_steps`` is exhausted first.
    """
    opts = opts or EvolveOptions()
    grid = phi0.grid
    if speed.grid.shape != grid.shape:
        raise InvalidArgumentError("speed field and level set live on different grids")
    if not 0.0 < opts.cfl <= 0.5:
        raise InvalidArgumentError("CFL number must be in (0, 0.5]")
    if opts.scheme not in ("euler", "rk2"):
        raise InvalidArgumentError(f"unknown time scheme {opts.scheme!r}")
    h = float(np.min(grid.spacing))
    phi = phi0.phi.copy()
    inside = phi < 0.0
    tau, unchanged = phi0.tau, 0
    for step in range(1, opts.max_steps + 1):
        r1, f = _rate(phi, speed, opts)
        fmax = float(np.max(np.abs(f)))
        dt = opts.cfl * h / fmax if fmax > 0.0 else opts.cfl * h
        if opts.scheme == "euler":
            phi = phi + dt * r1
        else:
            p1 = phi + dt * r1
            phi = 0.5 * (phi + p1 + dt * _rate(p1, speed, opts)[0])
        tau += dt
        now = phi < 0.0
        unchanged = unchanged + 1 if np.array_equal(now, inside) else 0
        inside = now
        if unchanged >= opts.lock_window:
            return LevelSetField(grid, phi, tau, phi0.steps + step)
    raise NonConvergenceError(
        f"level set did not lock within {opts.max_steps} steps",
        last=LevelSetField(grid, phi, tau, phi0.steps + opts.max_steps),
        diagnostics={"tau": tau},
    )


def zero_crossing_points(field_: LevelSetField) -> np.ndarray:
    """Linear-interpolation roots on every grid edge whose end signs differ.

    Returns an array of shape (n, d), possibly empty.
    """
    grid = field_.grid
    phi = field_.phi.reshape(grid.shape)
    axes = grid.axes
    out = []
    for ax in range(grid.dim):
        a = np.moveaxis(phi, ax, -1)
        lo, hi = a[..., :-1], a[..., 1:]
        mask = (lo < 0.0) != (hi < 0.0)
        if not mask.any():
            continue
        idx = np.argwhere(mask)
        pa, pb = lo[mask], hi[mask]
        t = pa / (pa - pb)
        coords = np.empty((len(idx), grid.dim))
        others = [k for k in range(grid.dim) if k != ax]
        for col, k in enumerate(others):
            coords[:, k] = axes[k][idx[:, col]]
        x = axes[ax]
        coords[:, ax] = x[idx[:, -1]] + t * (x[idx[:, -1] + 1] - x[idx[:, -1]])
        out.append(coords)
    if not out:
        return np.empty((0, grid.dim))
    return np.vstack(out)


def redistance(field_: LevelSetField) -> LevelSetField:
    """Replace phi by the signed distance to its own zero crossings.

    The sign pattern is kept.  A one-signed field is returned unchanged.
    """
    pts = zero_crossing_points(field_)
    if len(pts) == 0:
        return field_
    dist, _ = cKDTree(pts).query(field_.grid.points())
    # an inside point sitting on a crossing keeps its sign
    dist = np.where(field_.inside, -np.maximum(dist, np.finfo(float).tiny), dist)
    return replace(field_, phi=dist)


def write_crossings_csv(points, path) -> None:
    points = np.atleast_2d(points)
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"xi_{k + 1}" for k in range(points.shape[1])])
        for p in points:
            w.writerow([f"{x:.17g}" for x in p])
