"""Tensor grids on E = [-1, 1]^d, model-evaluation caches and d-linear interpolation.

Grid points are stored flat in row-major (C) multi-index order, so the last
coordinate varies fastest.  Refinement ``m -> 2m - 1`` keeps every old point.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError, MissingDataError, OutOfDomainError

HIGH = True
SURROGATE = False

_SNAP = 1e-9


@dataclass(frozen=True)
class CdfTransform:
    """Map xi in [-1, 1] to a physical parameter through an inverse CDF.

    The probability level is ``p_lo + (p_hi - p_lo) * (xi + 1) / 2``, i.e. the
    distribution is truncated to its ``[p_lo, p_hi]`` quantile range so that the
    grid endpoints xi = +-1 map to finite values.
    """

    dist: object  # frozen scipy.stats distribution
    p_lo: float = 1e-3
    p_hi: float = 1.0 - 1e-3
    name: str = ""

    def to_parameter(self, xi):
        p = self.p_lo + (self.p_hi - self.p_lo) * (np.asarray(xi, dtype=float) + 1.0) / 2.0
        return self.dist.ppf(p)

    def to_xi(self, value):
        p = self.dist.cdf(np.asarray(value, dtype=float))
        return 2.0 * (p - self.p_lo) / (self.p_hi - self.p_lo) - 1.0


@dataclass(frozen=True)
class StochasticDomain:
    """Product domain E = [-1, 1]^d with independent uniform xi_i.

    ``transforms`` optionally maps each coordinate to a physical parameter; the
    density of xi itself is always uniform, rho = 2^-d.
    """

    dim: int
    transforms: tuple = ()

    def __post_init__(self):
        if not 1 <= self.dim <= 6:
            raise InvalidArgumentError(f"dimension must be in 1..6, got {self.dim}")
        if self.transforms and len(self.transforms) != self.dim:
            raise InvalidArgumentError("need one transform per dimension")

    @property
    def density(self) -> float:
        return 0.5**self.dim

    def contains(self, xi, tol: float = 1e-12) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.all(np.abs(xi) <= 1.0 + tol, axis=1)

    def to_parameters(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if not self.transforms:
            return xi.copy()
        return np.column_stack([t.to_parameter(xi[:, k]) for k, t in enumerate(self.transforms)])


def uniform_transform(low: float, high: float, **kw) -> CdfTransform:
    return CdfTransform(stats.uniform(loc=low, scale=high - low), p_lo=0.0, p_hi=1.0, **kw)


@dataclass(frozen=True)
class StochasticGrid:
    domain: StochasticDomain
    m: tuple
    level: int = 0

    def __post_init__(self):
        if len(self.m) != self.domain.dim:
            raise InvalidArgumentError("points-per-dimension must match the domain dimension")
        if any(mk < 2 for mk in self.m):
            raise InvalidArgumentError(f"need at least 2 points per dimension, got {self.m}")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple:
        return tuple(self.m)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.m))

    @property
    def spacing(self) -> np.ndarray:
        return 2.0 / (np.asarray(self.m, dtype=float) - 1.0)

    @property
    def axes(self) -> list:
        return [np.linspace(-1.0, 1.0, mk) for mk in self.m]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g.ravel() for g in mesh])

    def flat_index(self, multi_index) -> np.ndarray:
        return np.ravel_multi_index(tuple(np.asarray(multi_index).T), self.shape)

    def multi_index(self, flat) -> np.ndarray:
        return np.column_stack(np.unravel_index(np.asarray(flat), self.shape))

    def trapezoid_weights(self) -> np.ndarray:
        """Tensor trapezoid weights (including rho) on the flat point list."""
        w1 = []
        for mk, h in zip(self.m, self.spacing):
            w = np.full(mk, h)
            w[0] = w[-1] = h / 2.0
            w1.append(w * 0.5)
        out = w1[0]
        for w in w1[1:]:
            out = np.multiply.outer(out, w)
        return out.ravel()

    def reshape(self, values) -> np.ndarray:
        return np.asarray(values).reshape(self.shape)


def build_grid(domain: StochasticDomain, m) -> StochasticGrid:
    """Equidistant grid with ``m`` points per dimension (int or per-dimension sequence)."""
    if np.isscalar(m):
        m = (int(m),) * domain.dim
    m = tuple(int(mk) for mk in m)
    if any(mk < 2 for mk in m):
        raise InvalidArgumentError(f"m must be >= 2, got {m}")
    return StochasticGrid(domain, m, 0)


def refine_grid(g: StochasticGrid) -> StochasticGrid:
    return StochasticGrid(g.domain, tuple(2 * mk - 1 for mk in g.m), g.level + 1)


def coarse_to_fine_index(coarse: StochasticGrid, fine: StochasticGrid) -> np.ndarray:
    """Flat fine-grid indices of the coarse points (coarse flat order)."""
    if fine.m != tuple(2 * mk - 1 for mk in coarse.m):
        raise InvalidArgumentError("fine grid is not the one-level refinement of coarse")
    idx = np.indices(coarse.shape).reshape(coarse.dim, -1).T * 2
    return fine.flat_index(idx)


@dataclass(frozen=True)
class ModelEvaluationCache:
    """QI values on every grid point with a per-point fidelity flag (True = high)."""

    grid: StochasticGrid
    values: np.ndarray
    high: np.ndarray = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.grid.n_points,):
            raise MissingDataError(
                f"cache needs {self.grid.n_points} values, got shape {values.shape}")
        high = (np.ones(values.shape, dtype=bool) if self.high is None
                else np.asarray(self.high, dtype=bool).copy())
        values.flags.writeable = False
        high.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "high", high)

    @property
    def n_high(self) -> int:
        return int(self.high.sum())

    @property
    def high_fraction(self) -> float:
        return self.n_high / self.grid.n_points

    def to_csv(self, path) -> None:
        pts = self.grid.points()
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"xi_{k + 1}" for k in range(self.grid.dim)] + ["value", "fidelity"])
            for p, v, h in zip(pts, self.values, self.high):
                w.writerow([*(f"{x:.17g}" for x in p), f"{v:.17g}", "HIGH" if h else "SURROGATE"])


def interpolate_grid_values(grid: StochasticGrid, values, xi) -> np.ndarray:
    """d-linear interpolation of nodal ``values`` at the points ``xi`` (n, d)."""
    values = np.asarray(values, dtype=float).reshape(grid.shape)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != grid.dim:
        raise InvalidArgumentError("point dimension does not match the grid")
    if not np.all(grid.domain.contains(xi)):
        raise OutOfDomainError("interpolation point outside [-1, 1]^d")
    m = np.asarray(grid.m)
    s = (np.clip(xi, -1.0, 1.0) + 1.0) / grid.spacing
    r = np.rint(s)
    s = np.where(np.abs(s - r) < _SNAP, r, s)
    cell = np.clip(np.floor(s).astype(int), 0, m - 2)
    t = s - cell
    out = np.zeros(len(xi))
    for corner in itertools.product((0, 1), repeat=grid.dim):
        c = np.asarray(corner)
        w = np.prod(np.where(c == 1, t, 1.0 - t), axis=1)
        out += w * values[tuple((cell + c).T)]
    return out


def interpolate_multilinear(cache: ModelEvaluationCache, xi) -> np.ndarray | float:
    """Interpolate cached QI values; scalar in, scalar out."""
    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim == 0 or (xi_arr.ndim == 1 and cache.grid.dim > 1)
    out = interpolate_grid_values(cache.grid, cache.values, xi_arr.reshape(-1, cache.grid.dim))
    return float(out[0]) if single else out


def read_cache_csv(path, domain: StochasticDomain) -> ModelEvaluationCache:
    rows = list(csv.reader(open(Path(path))))[1:]
    pts = np.array([[float(x) for x in r[: domain.dim]] for r in rows])
    n = round(len(pts) ** (1.0 / domain.dim))
    grid = build_grid(domain, n)
    if not np.allclose(pts, grid.points(), atol=1e-12):
        raise InvalidArgumentError("CSV points do not form a full tensor grid")
    vals = [float(r[domain.dim]) for r in rows]
    high = [r[domain.dim + 1] == "HIGH" for r in rows]
    return ModelEvaluationCache(grid, np.array(vals), np.array(high))

