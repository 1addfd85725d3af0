import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, field_validator

from app.assembly.service.element import tensor_points
from pkg.spectral.basis import BasisSet
from pkg.spectral.quadrature import RuleKind

Array = npt.NDArray[np.float64]

STRESS_NAMES = ("s11", "s21", "s12", "s22")


@dataclass(frozen=True, eq=False)
class SampleGrid:
    """Reference points shared by every element, first coordinate fastest"""
    xi1: Array
    xi2: Array
    label: str

    @classmethod
    def equispaced(cls, per_direction: int = 100) -> "SampleGrid":
        xi1, xi2 = tensor_points(np.linspace(-1.0, 1.0, per_direction))
        return cls(xi1, xi2, f"equispaced-{per_direction}")

    @classmethod
    def gll(cls, order: int) -> "SampleGrid":
        xi1, xi2 = tensor_points(BasisSet.of(RuleKind.GLL, order).nodes)
        return cls(xi1, xi2, f"gll-{order}")

    @property
    def size(self) -> int:
        return self.xi1.size


@dataclass(frozen=True, eq=False)
class SampledFields:
    """Reconstructed fields at the sample points, leading axes (element, point)"""
    grid: SampleGrid
    x: Array
    jacobian: Array
    stress: Array
    displacement: Array
    rotation: Array
    body_force: Array
    residual: Array
    strain: Array

    @property
    def n_elements(self) -> int:
        return self.x.shape[0]

    def flat(self, name: str) -> Array:
        values = getattr(self, name)
        return values.reshape((-1,) + values.shape[2:])


class ErrorReport(BaseModel):
    """Max-norm errors of the sampled fields against a closed-form solution"""
    errors: dict[str, float] = Field(..., description="Field name to L-infinity error at the samples")
    h: float | None = Field(None, description="Element size")
    order: int = Field(..., ge=1, description="Polynomial degree N or FEM order")

    @field_validator("errors")
    @classmethod
    def check_errors(cls, value: dict[str, float]) -> dict[str, float]:
        for name, err in value.items():
            if not math.isfinite(err) or err < 0.0:
                raise ValueError(f"error for {name} must be finite and nonnegative, got {err}")
        return value


class RateFit(BaseModel):
    slope: float
    intercept: float
    points_used: int = Field(..., ge=2)
