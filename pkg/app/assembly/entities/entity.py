from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from app.mesh.entities.entity import DofLayout, MeshTopology, Side
from pkg.errors.exceptions import BoundaryError

Array = npt.NDArray[np.float64]
VectorField = Callable[[Array], Array]
TractionField = Callable[[Array, Array], Array]


class Material(BaseModel):
    """Isotropic plane-stress material"""
    model_config = ConfigDict(frozen=True)

    E: float = Field(default=1.0, gt=0.0, description="Young's modulus")
    nu: float = Field(default=0.3, gt=-1.0, lt=0.5, description="Poisson's ratio")

    @property
    def compliance(self) -> Array:
        """C in the order [s11, s21, s12, s22]"""
        nu = self.nu
        return np.array(
            [
                [1.0, 0.0, 0.0, -nu],
                [0.0, 1.0 + nu, 0.0, 0.0],
                [0.0, 0.0, 1.0 + nu, 0.0],
                [-nu, 0.0, 0.0, 1.0],
            ]
        ) / self.E

    @property
    def plane_stress_stiffness(self) -> Array:
        """D for Voigt strain [e11, e22, 2 e12]"""
        nu = self.nu
        return self.E / (1.0 - nu**2) * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])

    def stress_from_gradient(self, grad_u: Array) -> Array:
        """Cauchy four-vector from displacement gradients G[..., i, j] = du_i/dx_j"""
        e11 = grad_u[..., 0, 0]
        e22 = grad_u[..., 1, 1]
        e12 = 0.5 * (grad_u[..., 0, 1] + grad_u[..., 1, 0])
        scale = self.E / (1.0 - self.nu**2)
        s11 = scale * (e11 + self.nu * e22)
        s22 = scale * (e22 + self.nu * e11)
        s12 = self.E / (1.0 + self.nu) * e12
        return np.stack([s11, s12, s12, s22], axis=-1)


class BoundaryKind(str, Enum):
    DISPLACEMENT = "displacement"
    TRACTION = "traction"


@dataclass(frozen=True)
class ComponentCondition:
    """Prescribed displacement u(x) or traction t(x, n) for one force component.

    ``value`` returns a (M, 2) vector field; only column ``component`` is used.
    None means homogeneous.
    """
    kind: BoundaryKind
    value: VectorField | TractionField | None = None


def fixed(value: VectorField | None = None) -> ComponentCondition:
    return ComponentCondition(BoundaryKind.DISPLACEMENT, value)


def loaded(value: TractionField | None = None) -> ComponentCondition:
    return ComponentCondition(BoundaryKind.TRACTION, value)


@dataclass(frozen=True)
class BoundaryCondition:
    element: int
    side: Side
    component: int
    condition: ComponentCondition

    @property
    def kind(self) -> BoundaryKind:
        return self.condition.kind


FaceRule = Callable[[int, Side, tuple[int, int]], tuple[ComponentCondition, ComponentCondition]]


@dataclass(frozen=True, eq=False)
class BoundarySpec:
    """Partition of every boundary face-component into displacement or traction type"""
    conditions: dict[tuple[int, Side, int], BoundaryCondition]

    @classmethod
    def build(cls, mesh: MeshTopology, conditions: Iterable[BoundaryCondition]) -> "BoundarySpec":
        table: dict[tuple[int, Side, int], BoundaryCondition] = {}
        for bc in conditions:
            key = (bc.element, Side(bc.side), bc.component)
            if bc.component not in (0, 1):
                raise BoundaryError(f"component must be 0 or 1, got {bc.component}")
            if mesh.neighbors[bc.element, bc.side] >= 0:
                raise BoundaryError(f"element {bc.element} side {Side(bc.side).name} is not on the boundary")
            if key in table:
                previous = table[key].kind
                raise BoundaryError(
                    f"element {bc.element} side {Side(bc.side).name} component {bc.component} "
                    f"assigned twice ({previous.value} and {bc.kind.value})"
                )
            table[key] = bc
        missing = [
            (e, side.name, m) for e, side in mesh.boundary_faces() for m in (0, 1) if (e, side, m) not in table
        ]
        if missing:
            raise BoundaryError(f"boundary face-components without a condition: {missing[:5]}")
        return cls(conditions=table)

    @classmethod
    def from_rule(cls, mesh: MeshTopology, rule: FaceRule) -> "BoundarySpec":
        """Ask ``rule(element, side, (i, j))`` for the two component conditions of every boundary face."""
        conditions = []
        for e, side in mesh.boundary_faces():
            cell = (int(mesh.cells[e, 0]), int(mesh.cells[e, 1]))
            for m, cond in enumerate(rule(e, side, cell)):
                conditions.append(BoundaryCondition(e, side, m, cond))
        return cls.build(mesh, conditions)

    def of_kind(self, kind: BoundaryKind) -> list[BoundaryCondition]:
        return [bc for bc in self.conditions.values() if bc.kind is kind]


@dataclass(frozen=True)
class ParticularStressField:
    """Analytic stress satisfying div(sigma_p) = -f a priori; sigma_21 = sigma_12"""
    s11: VectorField
    s22: VectorField
    s12: VectorField

    def evaluate(self, x: Array) -> Array:
        x = np.atleast_2d(x)
        s12 = self.s12(x)
        return np.stack([self.s11(x), s12, s12, self.s22(x)], axis=-1)


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    """[[H, (V D)^T, -R^T], [V D, 0, 0], [-R, 0, 0]] with strong tractions eliminated.

    ``matrix``/``rhs`` are the full system; ``reduced_matrix``/``reduced_rhs``
    act on ``free_dofs`` only.
    """
    layout: DofLayout
    matrix: sp.csr_matrix
    rhs: Array
    compliance: sp.csr_matrix
    incidence: sp.csr_matrix
    pairing: sp.csr_matrix
    rotation: sp.csr_matrix
    body_force: Array
    fixed_dofs: npt.NDArray[np.int64]
    fixed_values: Array
    free_dofs: npt.NDArray[np.int64] = field(repr=False)
    reduced_matrix: sp.csr_matrix = field(repr=False)
    reduced_rhs: Array = field(repr=False)
    particular_rhs: Array | None = None
    has_particular: bool = False

    @property
    def n_traction(self) -> int:
        return self.layout.n_traction

    @property
    def block_offsets(self) -> tuple[int, int, int]:
        nt = self.layout.n_traction
        return 0, nt, nt + self.layout.n_displacement

    def expand(self, reduced_solution: Array) -> Array:
        full = np.zeros(self.matrix.shape[0])
        full[self.free_dofs] = reduced_solution
        full[self.fixed_dofs] = self.fixed_values
        return full

    def split(self, full: Array) -> tuple[Array, Array, Array]:
        _, u0, w0 = self.block_offsets
        return full[:u0], full[u0:w0], full[w0:]
