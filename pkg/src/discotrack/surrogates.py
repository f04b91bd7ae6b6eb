"""Piecewise expansions fitted to cached evaluations: SOP on simplex meshes and F-gPC frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .basis import FrameSet, GpcBasis, SimplexBasis, build_frames, build_simplex_basis
from .errors import InvalidArgumentError
from .levelset import LevelSetField
from .regression import (
    RegressionReport,
    estimate_jump_floor,
    repair_misclassified,
    solve_lad,
    solve_ols_tsvd,
)
from .stochastic_space import StochasticGrid, interpolate_grid_values
from .tessellation import SimplexMesh, assign_points, locate


def fit(psi, u, solver: str, eps: float = 1e-8, lad_backend: str = "auto") -> RegressionReport:
    """OLS or LAD; LAD drops to truncated-SVD OLS when there is no null space."""
    if solver == "ols":
        return solve_ols_tsvd(psi, u, eps)
    if solver == "lad":
        if psi.shape[0] <= psi.shape[1]:
            return solve_ols_tsvd(psi, u, eps)
        return solve_lad(psi, u, eps, backend=lad_backend)
    raise InvalidArgumentError(f"unknown regression {solver!r}")


def levelset_classifier(field_: LevelSetField):
    """xi -> True where the interpolated phi is >= 0 (the '+' side)."""
    def classify(points):
        return interpolate_grid_values(field_.grid, field_.phi, points) >= 0.0
    return classify


@dataclass
class SopExpansion:
    mesh: SimplexMesh
    N: int
    bases: list
    coefficients: list  # per simplex, None where no basis was fitted
    fallback: np.ndarray  # constant used on point-free simplices
    reports: list = field(default_factory=list)

    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        owner = locate(self.mesh, points)
        out = np.empty(len(points))
        for s in np.unique(owner):
            sel = owner == s
            if self.coefficients[s] is None:
                out[sel] = self.fallback[s]
            else:
                out[sel] = self.bases[s].design(points[sel]) @ self.coefficients[s]
        return out

    def statistics(self):
        """(mean, variance) from element probabilities and local coefficients."""
        m1 = m2 = 0.0
        for s, basis in enumerate(self.bases):
            prob = basis.probability
            c = self.coefficients[s]
            if c is None:
                m1 += prob * self.fallback[s]
                m2 += prob * self.fallback[s] ** 2
            else:
                m1 += prob * c[0]
                m2 += prob * float(c @ c)
        return m1, m2 - m1 * m1


def fit_sop(mesh: SimplexMesh, grid: StochasticGrid, values, N: int, solver: str = "lad",
            eps: float = 1e-8, phi_values=None, lad_backend: str = "auto") -> SopExpansion:
    """Local simplex-polynomial fits to the cached values on every mesh element."""
    pts = grid.points()
    values = np.asarray(values, dtype=float)
    if not mesh.point_lists:
        mesh = assign_points(mesh, pts, phi_values)
    bases, coeffs, reports = [], [], []
    fallback = np.zeros(mesh.n_simplices)
    tree = cKDTree(pts)
    for s in range(mesh.n_simplices):
        basis = build_simplex_basis(mesh.vertex_matrix(s), N)
        bases.append(basis)
        idx = mesh.point_lists[s]
        if len(idx) == 0:
            centroid = mesh.vertex_matrix(s).mean(axis=0)
            fallback[s] = values[tree.query(centroid)[1]]
            coeffs.append(None)
            reports.append(None)
            continue
        rep = fit(basis.design(pts[idx]), values[idx], solver, eps, lad_backend)
        coeffs.append(rep.coefficients)
        reports.append(rep)
    return SopExpansion(mesh, N, bases, coeffs, fallback, reports)


@dataclass
class FrameExpansion:
    frames: FrameSet
    coefficients: np.ndarray
    report: RegressionReport

    def evaluate(self, points, labels=None) -> np.ndarray:
        return self.frames.design(points, labels) @ self.coefficients

    def grid_values(self) -> np.ndarray:
        """Surrogate at the frame grid points, using the (possibly repaired) grid labels."""
        return self.evaluate(self.frames.grid.points(), self.frames.labels)

    def statistics(self):
        from .basis import frame_statistics
        return frame_statistics(self.coefficients, self.frames)


def fit_frames(classifier, gpc: GpcBasis, grid: StochasticGrid, values, solver: str = "lad",
               eps: float = 1e-8, repair: bool = False, jump_floor: float | None = None,
               lad_backend: str = "auto") -> FrameExpansion:
    """Fit frame coefficients to ``values`` on ``grid``; optionally one repair round.

    The repair flips the side of every grid point whose absolute residual
    exceeds ``jump_floor`` (estimated from the data when not given) and solves
    again with the rebuilt frame.
    """
    values = np.asarray(values, dtype=float)
    frames = build_frames(classifier, gpc, grid)
    pts = grid.points()
    rep = fit(frames.design(pts, frames.labels), values, solver, eps, lad_backend)
    if repair:
        if jump_floor is None:
            jump_floor = estimate_jump_floor(values, frames.labels, grid.shape)
        flip = repair_misclassified(rep, jump_floor)
        if flip.size:
            labels = frames.labels.copy()
            labels[flip] = ~labels[flip]
            frames = build_frames(classifier, gpc, grid, labels=labels)
            rep = fit(frames.design(pts, labels), values, solver, eps, lad_backend)
            rep.reassigned = tuple(int(i) for i in flip)
    return FrameExpansion(frames, rep.coefficients, rep)
