"""Orthonormal polynomials on simplices (uniform density).

On the unit simplex S^d the unnormalised polynomials are

    prod_j (1 - |lam_{j-1}|)^{alpha_j} P_{alpha_j}^{(a_j, 0)}(2 lam_j / (1 - |lam_{j-1}|) - 1),
    a_j = 2 (alpha_{j+1} + ... + alpha_d) + d - j,

and a general simplex is reached through barycentric coordinates
lam = T^{-1} (xi - xi^{d+1}).  Each factor is evaluated in homogeneous form,
z^n P_n(y / z), so the polynomial is well defined on the whole of R^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateGeometryError, InvalidArgumentError
from .multiindex import MultiIndexSet


def homogeneous_jacobi(n: int, a: float, y, z) -> np.ndarray:
    """z^n P_n^{(a, 0)}(y / z), evaluated without dividing by z."""
    y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
    q_prev = np.ones(np.broadcast(y, z).shape)
    if n == 0:
        return q_prev
    q = (a + 1.0) * z + 0.5 * (a + 2.0) * (y - z)
    for k in range(1, n):
        c = 2.0 * k + a
        q_next = ((c + 1.0) * (c * (c + 2.0) * y + a * a * z) * q
                  - 2.0 * k * (k + a) * (c + 2.0) * z * z * q_prev) / (2.0 * (k + 1.0) * (k + a + 1.0) * c)
        q_prev, q = q, q_next
    return q


def jacobi_parameters(alpha) -> np.ndarray:
    """a_j for j = 1..d."""
    alpha = np.asarray(alpha, dtype=int)
    d = len(alpha)
    tail = np.concatenate([np.cumsum(alpha[::-1])[::-1][1:], [0]])  # sum_{i>j} alpha_i
    return 2 * tail + d - np.arange(1, d + 1)


def unit_simplex_raw(lam, alpha) -> np.ndarray:
    """Unnormalised polynomial for multi-index ``alpha`` at barycentric points (n, d)."""
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    alpha = np.asarray(alpha, dtype=int)
    a = jacobi_parameters(alpha)
    out = np.ones(len(lam))
    used = np.zeros(len(lam))
    for j in range(lam.shape[1]):
        z = 1.0 - used
        out *= homogeneous_jacobi(int(alpha[j]), float(a[j]), 2.0 * lam[:, j] - z, z)
        used = used + lam[:, j]
    return out


def closed_form_norm_sq(alpha) -> float:
    """E[raw^2] under the uniform density d! on S^d.

    Collapsing lam_j = t_j prod_{i<j}(1 - t_i) factorises the integral into
    one-dimensional Jacobi norms, giving d! prod_j 1 / (2 |alpha^j| + d - j + 1)
    with |alpha^j| = alpha_j + ... + alpha_d.
    """
    alpha = np.asarray(alpha, dtype=int)
    d = len(alpha)
    tails = np.cumsum(alpha[::-1])[::-1]
    return math.factorial(d) / float(np.prod(2 * tails + d - np.arange(1, d + 1) + 1))


def collapsed_quadrature(d: int, n: int):
    """Gauss rule on S^d by the collapsed (Duffy) map.

    Weights include the uniform density d!, so they sum to 1.  Exact for
    polynomials of total degree <= 2n - d.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    t, w = (x + 1.0) / 2.0, w / 2.0
    grids = np.meshgrid(*([t] * d), indexing="ij")
    tt = np.column_stack([g.ravel() for g in grids])
    ww = np.ones(len(tt))
    for wg in np.meshgrid(*([w] * d), indexing="ij"):
        ww *= wg.ravel()
    lam = np.empty_like(tt)
    rest = np.ones(len(tt))
    for j in range(d):
        lam[:, j] = tt[:, j] * rest
        ww *= rest  # Jacobian of the collapse in coordinate j
        rest = rest * (1.0 - tt[:, j])
    return lam, ww * math.factorial(d)


@dataclass(frozen=True)
class SimplexBasis:
    """Total-order orthonormal basis on the simplex with the given vertices.

    ``vertices`` has shape (d + 1, d); the last row is the reference vertex
    xi^{d+1}.  Normalisation constants are computed by quadrature.
    """

    vertices: np.ndarray
    N: int
    index_set: MultiIndexSet = field(init=False, repr=False)
    T: np.ndarray = field(init=False, repr=False)
    T_inv: np.ndarray = field(init=False, repr=False)
    norms: np.ndarray = field(init=False, repr=False)
    gram_offdiag: float = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise InvalidArgumentError("need d + 1 vertices in d dimensions")
        d = v.shape[1]
        T = (v[:d] - v[d]).T
        scale = max(float(np.ptp(v, axis=0).max()), 1e-300)
        if abs(np.linalg.det(T)) <= 1e-12 * scale**d:
            raise DegenerateGeometryError("simplex vertices are affinely dependent")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "T_inv", np.linalg.inv(T))
        idx = MultiIndexSet(d, self.N)
        object.__setattr__(self, "index_set", idx)
        norms, off = _reference_norms(d, self.N)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "gram_offdiag", off)

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @property
    def size(self) -> int:
        return len(self.index_set)

    @property
    def probability(self) -> float:
        """P(xi in simplex) under the uniform density 2^-d on E."""
        return abs(float(np.linalg.det(self.T))) / (2.0**self.d * math.factorial(self.d))

    def barycentric(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return (xi - self.vertices[-1]) @ self.T_inv.T

    def from_barycentric(self, lam) -> np.ndarray:
        return np.atleast_2d(lam) @ self.T.T + self.vertices[-1]

    def design(self, xi) -> np.ndarray:
        lam = self.barycentric(xi)
        cols = [unit_simplex_raw(lam, a) for a in self.index_set.indices]
        return np.column_stack(cols) / self.norms

    def quadrature(self, n: int | None = None):
        """Points in the simplex and conditional weights (sum 1)."""
        n = n or self.N + self.d + 1
        lam, w = collapsed_quadrature(self.d, n)
        return self.from_barycentric(lam), w


_NORM_CACHE: dict = {}


def _reference_norms(d: int, N: int):
    key = (d, N)
    if key not in _NORM_CACHE:
        idx = MultiIndexSet(d, N).indices
        lam, w = collapsed_quadrature(d, N + d + 1)
        raw = np.column_stack([unit_simplex_raw(lam, a) for a in idx])
        gram = raw.T @ (w[:, None] * raw)
        norms = np.sqrt(np.diag(gram))
        normed = gram / np.outer(norms, norms)
        off = float(np.max(np.abs(normed - np.eye(len(idx))))) if len(idx) > 1 else 0.0
        _NORM_CACHE[key] = (norms, off)
    return _NORM_CACHE[key]


def build_simplex_basis(vertices, N: int) -> SimplexBasis:
    return SimplexBasis(np.asarray(vertices, dtype=float), int(N))
