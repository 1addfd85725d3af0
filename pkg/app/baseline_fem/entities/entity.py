from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from pydantic import BaseModel, Field

from app.assembly.entities.entity import BoundarySpec, Material, VectorField
from app.geometry.entities.entity import ElementMap
from app.mesh.entities.entity import MeshTopology

Array = npt.NDArray[np.float64]


class FemOrder(IntEnum):
    Q4 = 1
    Q9 = 2


@dataclass(frozen=True, eq=False)
class FemModel:
    """Conforming Lagrange discretisation on the same elements as the equilibrium method.

    ``connectivity[e, a + (p + 1) b]`` is the global node at reference GLL(p) point (a, b);
    DOF 2 * node + m carries displacement component m.
    """
    mesh: MeshTopology
    maps: Sequence[ElementMap]
    material: Material
    boundary: BoundarySpec
    order: FemOrder
    connectivity: npt.NDArray[np.int64]
    coordinates: Array
    body_force: VectorField | None = None

    @property
    def n_nodes(self) -> int:
        return self.coordinates.shape[0]

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    def element_dofs(self, element: int) -> npt.NDArray[np.int64]:
        nodes = self.connectivity[element]
        return np.stack([2 * nodes, 2 * nodes + 1], axis=1).ravel()


@dataclass(frozen=True, eq=False)
class FemSolution:
    model: FemModel
    displacement: Array
    stiffness: sp.csr_matrix
    energy: float
    solve_time: float
    n_free: int


class FemResidualReport(BaseModel):
    """Pointwise equilibrium defect of a displacement solution"""
    max_interior_residual: float = Field(..., ge=0.0, description="max |div sigma + f| over interior samples")
    max_traction_jump: float = Field(..., ge=0.0, description="max jump of interface-normal stress between elements")
    samples: int = Field(..., ge=1)
