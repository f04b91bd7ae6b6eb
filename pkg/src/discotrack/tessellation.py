"""Simplex meshes of E that conform to the zero level set.

Start from a Kuhn split of a coarse box partition, add the linear roots of phi
on sign-changing edges as new vertices (kept only if farther than ``min_sep``
from every existing vertex), re-triangulate by Delaunay and repeat until no
vertex is added.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .errors import DegenerateGeometryError, InvalidArgumentError
from .levelset import LevelSetField
from .stochastic_space import StochasticGrid, interpolate_grid_values

BARY_TOL = 1e-12


@dataclass(frozen=True)
class SimplexMesh:
    vertices: np.ndarray  # (n_v, d)
    simplices: np.ndarray  # (n_s, d + 1) vertex indices
    point_lists: tuple = field(default=())  # per simplex: indices of assigned points
    labels: np.ndarray | None = None  # per simplex: True where phi < 0 for the majority

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_simplices(self) -> int:
        return len(self.simplices)

    def vertex_matrix(self, s: int) -> np.ndarray:
        """Vertex coordinates of simplex ``s``, shape (d + 1, d)."""
        return self.vertices[self.simplices[s]]

    def volumes(self) -> np.ndarray:
        v = self.vertices[self.simplices]
        t = v[:, :-1, :] - v[:, -1:, :]
        return np.abs(np.linalg.det(t)) / math.factorial(self.dim)

    @property
    def empty(self) -> np.ndarray:
        """Simplices without assigned points (no local basis is fitted there)."""
        return np.array([len(p) == 0 for p in self.point_lists], dtype=bool)

    def to_csv(self, vertex_path, simplex_path) -> None:
        with open(Path(vertex_path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"xi_{k + 1}" for k in range(self.dim)])
            w.writerows([[f"{x:.17g}" for x in v] for v in self.vertices])
        with open(Path(simplex_path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"v{k}" for k in range(self.dim + 1)] + ["n_points", "label"])
            for s, verts in enumerate(self.simplices):
                n = len(self.point_lists[s]) if self.point_lists else ""
                lab = "" if self.labels is None else ("-" if self.labels[s] else "+")
                w.writerow([*map(int, verts), n, lab])


def initial_mesh(grid_or_dim, coarse_n: int) -> SimplexMesh:
    """Kuhn split of a coarse_n^d box partition of [-1, 1]^d into d! simplices per box."""
    d = grid_or_dim.dim if isinstance(grid_or_dim, StochasticGrid) else int(grid_or_dim)
    if coarse_n < 1:
        raise InvalidArgumentError("coarse_n must be >= 1")
    ticks = np.linspace(-1.0, 1.0, coarse_n + 1)
    shape = (coarse_n + 1,) * d
    verts = np.column_stack([g.ravel() for g in np.meshgrid(*([ticks] * d), indexing="ij")])
    simplices = []
    for box in itertools.product(range(coarse_n), repeat=d):
        for perm in itertools.permutations(range(d)):
            corner = list(box)
            chain = [np.ravel_multi_index(corner, shape)]
            for axis in perm:
                corner[axis] += 1
                chain.append(np.ravel_multi_index(corner, shape))
            simplices.append(chain)
    return SimplexMesh(verts, np.array(simplices, dtype=int))


def _edges(simplices: np.ndarray) -> np.ndarray:
    pairs = np.vstack([simplices[:, [i, j]] for i, j in itertools.combinations(range(simplices.shape[1]), 2)])
    return np.unique(np.sort(pairs, axis=1), axis=0)


def _triangulate(vertices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    try:
        tri = Delaunay(vertices)
    except QhullError:
        # joggle a copy for the combinatorics; geometry keeps the exact vertices
        jitter = 1e-10 * rng.standard_normal(vertices.shape)
        try:
            tri = Delaunay(vertices + jitter)
        except QhullError as exc:
            raise DegenerateGeometryError(f"Delaunay triangulation failed: {exc}") from exc
    simplices = tri.simplices
    v = vertices[simplices]
    det = np.abs(np.linalg.det(v[:, :-1, :] - v[:, -1:, :]))
    return simplices[det > 1e-14]


def refine_by_levelset(mesh: SimplexMesh, phi: LevelSetField, min_sep: float | None = None,
                       max_sweeps: int = 50) -> SimplexMesh:
    """Insert zero crossings of phi on mesh edges until none is farther than ``min_sep``."""
    grid = phi.grid
    min_sep = 0.5 * float(np.min(grid.spacing)) if min_sep is None else float(min_sep)
    rng = np.random.default_rng(0)
    vertices, simplices = mesh.vertices.copy(), mesh.simplices.copy()
    for _ in range(max_sweeps):
        vals = interpolate_grid_values(grid, phi.phi, np.clip(vertices, -1.0, 1.0))
        edges = _edges(simplices)
        a, b = vals[edges[:, 0]], vals[edges[:, 1]]
        cut = (a < 0.0) != (b < 0.0)
        if not cut.any():
            break
        t = a[cut] / (a[cut] - b[cut])
        pa, pb = vertices[edges[cut, 0]], vertices[edges[cut, 1]]
        cand = pa + t[:, None] * (pb - pa)
        tree = cKDTree(vertices)
        far = tree.query(cand)[0] > min_sep
        accepted = []
        for p in cand[far]:
            if all(np.linalg.norm(p - q) > min_sep for q in accepted):
                accepted.append(p)
        if not accepted:
            break
        vertices = np.vstack([vertices, accepted])
        simplices = _triangulate(vertices, rng)
    return SimplexMesh(vertices, simplices)


def barycentric_all(mesh: SimplexMesh, s: int, points: np.ndarray) -> np.ndarray:
    """Full barycentric coordinates (n, d + 1) of ``points`` in simplex ``s``."""
    v = mesh.vertex_matrix(s)
    t = (v[:-1] - v[-1]).T
    lam = np.linalg.solve(t, (points - v[-1]).T).T
    return np.column_stack([lam, 1.0 - lam.sum(axis=1)])


def locate(mesh: SimplexMesh, points) -> np.ndarray:
    """Index of the lowest-numbered simplex containing each point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    owner = np.full(len(points), -1)
    lo = mesh.vertices[mesh.simplices].min(axis=1)
    hi = mesh.vertices[mesh.simplices].max(axis=1)
    for s in range(mesh.n_simplices):
        free = np.flatnonzero(owner < 0)
        if free.size == 0:
            break
        cand = free[np.all((points[free] >= lo[s] - BARY_TOL) & (points[free] <= hi[s] + BARY_TOL), axis=1)]
        if cand.size == 0:
            continue
        lam = barycentric_all(mesh, s, points[cand])
        owner[cand[np.all(lam >= -BARY_TOL, axis=1)]] = s
    if np.any(owner < 0):
        raise DegenerateGeometryError(f"{int(np.sum(owner < 0))} points are not covered by the mesh")
    return owner


def assign_points(mesh: SimplexMesh, points, phi_values=None) -> SimplexMesh:
    """Give each point to the lowest-index simplex containing it.

    ``phi_values`` (at the points) sets each simplex's majority label.
    """
    owner = locate(mesh, points)
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(mesh.n_simplices + 1))
    lists = tuple(order[bounds[s]:bounds[s + 1]] for s in range(mesh.n_simplices))
    labels = None
    if phi_values is not None:
        neg = np.asarray(phi_values) < 0.0
        labels = np.array([neg[p].mean() > 0.5 if len(p) else False for p in lists])
    return replace(mesh, point_lists=lists, labels=labels)


def conformity(mesh: SimplexMesh, phi_values) -> float:
    """Fraction of non-empty simplices whose points all share one sign of phi."""
    neg = np.asarray(phi_values) < 0.0
    used = [p for p in mesh.point_lists if len(p)]
    return float(np.mean([neg[p].all() or (~neg[p]).all() for p in used]))


def default_coarse_n(m_fine: int) -> int:
    """Boxes per side of the initial mesh: one per 12 cells of the finest grid."""
    return max(1, round((m_fine - 1) / 12))
