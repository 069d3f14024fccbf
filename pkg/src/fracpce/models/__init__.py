"""Benchmark forward models mapping input realizations to scalar responses."""

from .analytic import GaussianSumModel, gaussian_sum
from .plate import PlateConfig, PlateModel, plate_solve
from .quartercar import (
    QuarterCarConfig,
    QuarterCarModel,
    quarter_car_solve,
    scale_bump_to_stroke,
)

MODEL_NAMES = ("gaussian-sum", "plate-fe", "quarter-car")


def make_model(name: str, **overrides):
    """Instantiate a benchmark model by name with default inputs."""
    if name == "gaussian-sum":
        return GaussianSumModel(**overrides)
    if name == "plate-fe":
        return PlateModel(**overrides)
    if name == "quarter-car":
        return QuarterCarModel(**overrides)
    raise ValueError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")


__all__ = [
    "GaussianSumModel",
    "PlateConfig",
    "PlateModel",
    "QuarterCarConfig",
    "QuarterCarModel",
    "MODEL_NAMES",
    "gaussian_sum",
    "make_model",
    "plate_solve",
    "quarter_car_solve",
    "scale_bump_to_stroke",
]
