from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.spatial.distance import directed_hausdorff

from discotrack.forward_models import BurgersRiemannConfig, burgers_discontinuity_indicator
from discotrack.levelset import LevelSetField, zero_crossing_points
from discotrack.stochastic_space import StochasticDomain, build_grid

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def exact_burgers_curve(cfg: BurgersRiemannConfig | None = None, m: int = 2001) -> np.ndarray:
    """Points on {g = 0} from linear roots of the exact indicator on a fine grid."""
    cfg = cfg or BurgersRiemannConfig()
    grid = build_grid(StochasticDomain(2), m)
    g = burgers_discontinuity_indicator(cfg, grid.points())
    return zero_crossing_points(LevelSetField(grid, g))


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


@pytest.fixture(scope="session")
def burgers_curve():
    return exact_burgers_curve()
