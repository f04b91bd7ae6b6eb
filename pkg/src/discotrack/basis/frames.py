"""Frames: global Legendre polynomials restricted to the two sides of a classifier.

The frame functions are psi_k^+ = psi_k 1_{E^+} followed by psi_k^- = psi_k 1_{E^-}.
The Gram matrix G and expectations m_psi come from trapezoidal quadrature on
the grid of existing model evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyRegionError, InvalidArgumentError
from ..stochastic_space import StochasticGrid
from .legendre import GpcBasis

PLUS, MINUS = True, False


@dataclass(frozen=True)
class FrameSet:
    gpc: GpcBasis
    classifier: object  # callable: (n, d) points -> bool array, True on E^+
    grid: StochasticGrid
    labels: np.ndarray  # classifier on grid points
    gram: np.ndarray
    expectations: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.gpc.size

    def design(self, xi, labels=None) -> np.ndarray:
        """[Psi 1_+, Psi 1_-]; ``labels`` overrides the classifier at these points."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        plus = self.classifier(xi) if labels is None else np.asarray(labels, dtype=bool)
        return frame_design(self.gpc.design(xi), plus)

    def bounds(self, rtol: float = 1e-10):
        """Frame bounds (A, B) from the spectrum of G.

        A is the smallest eigenvalue above ``rtol * B``, i.e. the bound on the
        span actually represented; the full smallest eigenvalue is returned too.
        """
        ev = np.linalg.eigvalsh(self.gram)
        b = float(ev[-1])
        kept = ev[ev > rtol * b]
        return float(kept[0]), b, float(ev[0])


def frame_design(psi: np.ndarray, plus) -> np.ndarray:
    plus = np.asarray(plus, dtype=bool)[:, None]
    return np.hstack([psi * plus, psi * ~plus])


def build_frames(classifier, gpc: GpcBasis, grid, labels=None, allow_empty: bool = False) -> FrameSet:
    """Assemble the frame on a grid or on a cache's grid.

    ``labels`` overrides the classifier on the grid points (used after
    residual-based re-assignment).  An empty side raises EmptyRegionError
    unless ``allow_empty``; its frame functions are then identically zero.
    """
    grid = getattr(grid, "grid", grid)
    if gpc.d != grid.dim:
        raise InvalidArgumentError("basis and grid dimensions differ")
    pts = grid.points()
    labels = np.asarray(classifier(pts) if labels is None else labels, dtype=bool)
    if labels.shape != (len(pts),):
        raise InvalidArgumentError("classifier must return one label per point")
    if not allow_empty and (labels.all() or not labels.any()):
        raise EmptyRegionError("one side of the classifier contains no grid points")
    w = grid.trapezoid_weights()
    phi = frame_design(gpc.design(pts), labels)
    gram = phi.T @ (w[:, None] * phi)
    gram = 0.5 * (gram + gram.T)
    return FrameSet(gpc, classifier, grid, labels, gram, phi.T @ w)


def frame_statistics(coeffs, frames: FrameSet):
    """(mean, variance) = (c.m, c^T G c - (c.m)^2)."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (frames.size,):
        raise InvalidArgumentError(f"expected {frames.size} coefficients, got {c.shape}")
    mean = float(c @ frames.expectations)
    return mean, float(c @ frames.gram @ c - mean * mean)
