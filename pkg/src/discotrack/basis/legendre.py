"""Orthonormal Legendre bases: global gPC on [-1, 1]^d and ME-gPC elements.

Univariate functions are psi_n = sqrt(2n + 1) P_n, orthonormal for the uniform
density 1/2 on [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, OutOfDomainError
from .multiindex import MultiIndexSet


def legendre_table(x, N: int) -> np.ndarray:
    """psi_0..psi_N at points x; shape x.shape + (N + 1,)."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (N + 1,))
    out[..., 0] = 1.0
    if N >= 1:
        out[..., 1] = x
    for n in range(1, N):
        out[..., n + 1] = ((2 * n + 1) * x * out[..., n] - n * out[..., n - 1]) / (n + 1)
    return out * np.sqrt(2 * np.arange(N + 1) + 1.0)


def tensor_design(xi, indices: np.ndarray) -> np.ndarray:
    """[Psi]_{i,j} = prod_k psi_{indices[j, k]}(xi[i, k])."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    N = int(indices.max()) if indices.size else 0
    tab = legendre_table(xi, N)  # (n, d, N+1)
    out = np.ones((len(xi), len(indices)))
    for k in range(xi.shape[1]):
        out *= tab[:, k, indices[:, k]]
    return out


def gauss_legendre_tensor(n: int, lower, upper):
    """Tensor Gauss-Legendre nodes on a box and weights summing to one."""
    lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    x, w = np.polynomial.legendre.leggauss(n)
    d = len(lower)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    weights = np.ones(len(nodes))
    for wg in np.meshgrid(*([w / 2.0] * d), indexing="ij"):
        weights *= wg.ravel()
    return lower + (nodes + 1.0) * (upper - lower) / 2.0, weights


@dataclass(frozen=True)
class GpcBasis:
    """Total-order tensor Legendre basis on [-1, 1]^d."""

    d: int
    N: int
    index_set: MultiIndexSet = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index_set", MultiIndexSet(self.d, self.N))

    @property
    def indices(self) -> np.ndarray:
        return self.index_set.indices

    @property
    def size(self) -> int:
        return len(self.index_set)

    def design(self, xi) -> np.ndarray:
        return tensor_design(xi, self.indices)

    def expectations(self) -> np.ndarray:
        e = np.zeros(self.size)
        e[0] = 1.0
        return e


def eval_gpc(basis: GpcBasis, k, xi) -> np.ndarray | float:
    """Single basis function psi_k at xi (one point or rows of points)."""
    pos = basis.index_set.position(k)
    xi_arr = np.asarray(xi, dtype=float)
    pts = np.atleast_2d(xi_arr)
    if pts.shape[1] != basis.d:
        raise InvalidArgumentError("point dimension does not match the basis")
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise OutOfDomainError("xi outside [-1, 1]^d")
    val = tensor_design(pts, basis.indices[pos:pos + 1])[:, 0]
    return float(val[0]) if xi_arr.ndim <= 1 else val


@dataclass(frozen=True)
class MeElement:
    """Hyper-rectangle [lower, upper] with a local orthonormal Legendre basis.

    Local coordinates x = 2 (xi - lower) / (upper - lower) - 1 make the
    conditional density uniform on [-1, 1]^d, so the local basis is the global
    one composed with this affine map.
    """

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise InvalidArgumentError("element bounds must satisfy lower < upper")
        object.__setattr__(self, "lower", tuple(lo.tolist()))
        object.__setattr__(self, "upper", tuple(hi.tolist()))

    @property
    def d(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)

    @property
    def probability(self) -> float:
        """P(xi in element) under the uniform density 2^-d on E."""
        return float(np.prod(self.widths / 2.0))

    def to_local(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return 2.0 * (xi - np.asarray(self.lower)) / self.widths - 1.0

    def to_global(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(self.lower) + (x + 1.0) * self.widths / 2.0

    def contains(self, xi, tol: float = 0.0) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.all((xi >= np.asarray(self.lower) - tol) & (xi <= np.asarray(self.upper) + tol), axis=1)

    def design(self, xi, basis: GpcBasis) -> np.ndarray:
        return tensor_design(self.to_local(xi), basis.indices)

    def quadrature(self, n: int):
        """Tensor Gauss-Legendre points in the element; weights are conditional (sum 1)."""
        return gauss_legendre_tensor(n, self.lower, self.upper)

    def bisect(self, dims) -> list:
        """Children from halving along every dimension in ``dims``."""
        children = [(list(self.lower), list(self.upper))]
        for k in sorted(dims):
            mid = 0.5 * (self.lower[k] + self.upper[k])
            nxt = []
            for lo, hi in children:
                nxt.append((lo, hi[:k] + [mid] + hi[k + 1:]))
                nxt.append((lo[:k] + [mid] + lo[k + 1:], hi))
            children = nxt
        return [MeElement(tuple(lo), tuple(hi)) for lo, hi in children]
