"""Level-set tracking of discontinuities in stochastic space with piecewise polynomial surrogates."""

from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DiscoTrackError,
    EmptyRegionError,
    InvalidArgumentError,
    MissingDataError,
    NonConvergenceError,
    NumericalFailureError,
    OutOfDomainError,
    UndefinedMetricError,
    UnsupportedConfigurationError,
)
from .levelset import LevelSetField, evolve_to_lock, init_levelset, zero_crossing_points
from .megpc import ElementTree, run_adaptive_megpc
from .stochastic_space import ModelEvaluationCache, StochasticDomain, StochasticGrid, build_grid, refine_grid
from .tracker import TrackerConfig, TrackerResult, run_tracker

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateGeometryError", "DiscoTrackError", "ElementTree", "EmptyRegionError",
    "InvalidArgumentError", "LevelSetField", "MissingDataError", "ModelEvaluationCache",
    "NonConvergenceError", "NumericalFailureError", "OutOfDomainError", "StochasticDomain",
    "StochasticGrid", "TrackerConfig", "TrackerResult", "UndefinedMetricError",
    "UnsupportedConfigurationError", "build_grid", "evolve_to_lock", "init_levelset", "refine_grid",
    "run_adaptive_megpc", "run_tracker", "zero_crossing_points",
]
