from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..stochastic_space import StochasticDomain


class ForwardModel:
    """xi in E -> scalar QI u(xi, x*, T).

    Subclasses implement ``evaluate_many`` (vectorised) or ``evaluate`` (one
    point); the other is derived.  Evaluation must be deterministic.
    """

    name = "model"
    dim = 1
    exact = False

    @property
    def domain(self) -> StochasticDomain:
        return StochasticDomain(self.dim)

    def evaluate(self, xi) -> float:
        return float(self.evaluate_many(np.atleast_2d(np.asarray(xi, dtype=float)))[0])

    def evaluate_many(self, points, workers: int = 1) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if type(self).evaluate is ForwardModel.evaluate:
            raise NotImplementedError(f"{type(self).__name__} implements neither evaluate form")
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                return np.fromiter(pool.map(self.evaluate, points), float, len(points))
        return np.array([self.evaluate(p) for p in points])

    def __call__(self, points, workers: int = 1) -> np.ndarray:
        return self.evaluate_many(points, workers=workers)
