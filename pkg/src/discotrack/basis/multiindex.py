from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError


def count_basis(N: int, d: int) -> int:
    """Number of total-order multi-indices, (N + d)! / (N! d!)."""
    if N < 0 or d < 1:
        raise InvalidArgumentError("need N >= 0 and d >= 1")
    return math.comb(N + d, d)


def total_order_indices(d: int, N: int) -> np.ndarray:
    """All k in N_0^d with |k| <= N, graded by |k|, lexicographically descending within a grade.

    For d = 2, N = 1 this is (0, 0), (1, 0), (0, 1).
    """
    count_basis(N, d)
    rows = []
    for n in range(N + 1):
        grade = [k for k in itertools.product(range(n, -1, -1), repeat=d) if sum(k) == n]
        rows.extend(grade)
    return np.array(rows, dtype=int).reshape(-1, d)


@dataclass(frozen=True)
class MultiIndexSet:
    d: int
    N: int
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        idx = total_order_indices(self.d, self.N)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def position(self, k) -> int:
        k = np.asarray(k, dtype=int).ravel()
        hit = np.flatnonzero(np.all(self.indices == k, axis=1))
        if k.shape != (self.d,) or hit.size == 0:
            raise InvalidArgumentError(f"multi-index {tuple(k)} not in the total-order set (d={self.d}, N={self.N})")
        return int(hit[0])
