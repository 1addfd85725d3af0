from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field

Array = npt.NDArray[np.float64]


class SolverMethod(str, Enum):
    DIRECT = "direct"
    KRYLOV = "krylov"


class SolverStats(BaseModel):
    """Size, sparsity and cost of one solve"""
    method: str = Field(..., description="Path that produced the solution: splu, dense-min-norm or minres")
    n_traction: int = Field(..., description="Global traction DOFs, fixed ones included")
    n_displacement: int
    n_rotation: int
    n_fixed: int = Field(0, description="Strongly imposed traction DOFs")
    n_free: int
    nnz: int = Field(..., description="Stored entries of the reduced matrix")
    factor_time: float = Field(..., description="Seconds spent factorizing or iterating")
    condition_estimate: float | None = Field(None, description="1-norm condition estimate when affordable")
    iterations: int | None = None


@dataclass(frozen=True)
class LinearSolution:
    """Raw output of a linear solver on the reduced system"""
    x: Array
    rank_deficiency: int | None
    factor_time: float
    method: str
    condition_estimate: float | None = None
    null_space: Array | None = None
    iterations: int | None = None


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Solution blocks of the saddle system and what was checked about them.

    ``rank_deficiency`` is None when the Krylov path cannot count it.
    """
    traction: Array
    displacement: Array
    rotation: Array
    residual_norm: float
    rank_deficiency: int | None
    equilibrium_residual: float
    stats: SolverStats

    @property
    def solution(self) -> Array:
        return np.concatenate([self.traction, self.displacement, self.rotation])
