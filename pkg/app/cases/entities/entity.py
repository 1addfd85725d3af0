from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
import numpy.typing as npt

from app.assembly.entities.entity import BoundarySpec, Material, ParticularStressField, VectorField
from app.geometry.entities.entity import ElementMap
from app.mesh.entities.entity import MeshTopology

Array = npt.NDArray[np.float64]
ScalarField = Callable[[Array], Array]


class CaseId(str, Enum):
    RESULTS1 = "results1"
    ENERGY = "energy"
    PLATE_HOLE = "plate-hole"
    LSHAPE = "lshape"
    PATCH = "patch"


@dataclass(frozen=True)
class ExactSolution:
    """Analytic fields in physical coordinates.

    ``stress`` returns the four-vector [s11, s21, s12, s22] with traction
    t_m = s[2m + k] n_k, so symmetric fields repeat the shear entry.
    """
    displacement: VectorField
    stress: VectorField
    body_force: VectorField | None = None
    rotation: ScalarField | None = None
    energy: float | None = None


@dataclass(frozen=True)
class ManufacturedCase:
    """A closed-form solution on [-1, 1]^2 with displacement conditions on the whole boundary"""
    name: CaseId
    exact: ExactSolution
    material: Material
    particular: ParticularStressField | None = None
    lower: tuple[float, float] = (-1.0, -1.0)
    upper: tuple[float, float] = (1.0, 1.0)


@dataclass(frozen=True, eq=False)
class Problem:
    """Everything the assembly needs for one mesh, independent of N and the rotation grid"""
    name: CaseId
    mesh: MeshTopology
    maps: Sequence[ElementMap]
    material: Material
    boundary: BoundarySpec
    body_force: VectorField | None = None
    particular: ParticularStressField | None = None
    exact: ExactSolution | None = None
    h: float | None = None

    @property
    def n_elements(self) -> int:
        return self.mesh.n_elements
