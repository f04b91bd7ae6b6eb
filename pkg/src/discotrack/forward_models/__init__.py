"""Forward models mapping xi in [-1, 1]^d to a scalar quantity of interest."""

from __future__ import annotations

from ..errors import InvalidArgumentError
from .base import ForwardModel
from .blackbox import BlackBoxModel
from .burgers import (
    BurgersModel,
    BurgersRiemannConfig,
    burgers_discontinuity_indicator,
    burgers_exact,
    burgers_exact_moments,
)
from .co2 import CO2Model, CO2ModelConfig, co2_evaluate, co2_flux
from .fv import FVSolution, fv_solve_scalar

MODEL_REGISTRY = {
    "burgers": BurgersModel,
    "co2": CO2Model,
    "blackbox": BlackBoxModel,
}


def make_model(name: str, **kwargs) -> ForwardModel:
    """Instantiate a registered model by name."""
    try:
        cls = MODEL_REGISTRY[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown model {name!r}; known: {sorted(MODEL_REGISTRY)}") from None
    return cls(**kwargs)


__all__ = [
    "BlackBoxModel", "BurgersModel", "BurgersRiemannConfig", "CO2Model", "CO2ModelConfig",
    "FVSolution", "ForwardModel", "MODEL_REGISTRY", "burgers_discontinuity_indicator",
    "burgers_exact", "burgers_exact_moments", "co2_evaluate", "co2_flux", "fv_solve_scalar",
    "make_model",
]
