from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp


class Side(IntEnum):
    """Element sides; LEFT/RIGHT carry the xi1-normal family, BOTTOM/TOP the xi2-normal one"""
    LEFT = 0
    RIGHT = 1
    BOTTOM = 2
    TOP = 3

    @property
    def opposite(self) -> "Side":
        return _OPPOSITE[self]

    @property
    def normal_axis(self) -> int:
        return 0 if self in (Side.LEFT, Side.RIGHT) else 1

    @property
    def sign(self) -> int:
        """+1 when the outward normal points along the positive reference axis"""
        return 1 if self in (Side.RIGHT, Side.TOP) else -1


_OPPOSITE = {Side.LEFT: Side.RIGHT, Side.RIGHT: Side.LEFT, Side.BOTTOM: Side.TOP, Side.TOP: Side.BOTTOM}


class RotationGrid(str, Enum):
    """Nodes carrying the rotation multiplier"""
    GL = "GL"
    GLL = "GLL"


@dataclass(frozen=True)
class Interface:
    """Edge between two lattice cells; ``minus`` owns it as RIGHT/TOP, ``plus`` as LEFT/BOTTOM (-1 if absent)"""
    index: int
    minus: int
    plus: int
    normal_axis: int

    @property
    def is_boundary(self) -> bool:
        return self.minus < 0 or self.plus < 0


@dataclass(frozen=True, eq=False)
class MeshTopology:
    """Connectivity of active cells of an nx-by-ny lattice.

    ``cells[e]`` is the (i, j) lattice position of element e, ``neighbors[e, side]``
    the adjacent element or -1, ``faces[e, side]`` the interface index.
    """
    nx: int
    ny: int
    cells: npt.NDArray[np.int64]
    element_at: npt.NDArray[np.int64]
    neighbors: npt.NDArray[np.int64]
    faces: npt.NDArray[np.int64]
    interfaces: tuple[Interface, ...]

    @property
    def n_elements(self) -> int:
        return self.cells.shape[0]

    @property
    def interior_interfaces(self) -> list[Interface]:
        return [f for f in self.interfaces if not f.is_boundary]

    @property
    def boundary_interfaces(self) -> list[Interface]:
        return [f for f in self.interfaces if f.is_boundary]

    def boundary_faces(self) -> list[tuple[int, Side]]:
        """(element, side) pairs on the domain boundary, in element order"""
        return [(e, side) for e in range(self.n_elements) for side in Side if self.neighbors[e, side] < 0]


def traction_family_size(order: int) -> int:
    return order * (order + 1)


def traction_local_index(order: int, axis: int, component: int, i: int, j: int) -> int:
    """Local slot of T_{axis, component}[i, j]; the normal index runs over 0..N, the tangential over 0..N-1"""
    c = 2 * component + axis
    base = c * traction_family_size(order)
    if axis == 0:
        return base + i + (order + 1) * j
    return base + i + order * j


def face_slots(order: int, side: Side) -> npt.NDArray[np.int64]:
    """Local traction slots on one side, ordered by (component, tangential index)"""
    slots = []
    for m in range(2):
        for t in range(order):
            if side is Side.LEFT:
                slots.append(traction_local_index(order, 0, m, 0, t))
            elif side is Side.RIGHT:
                slots.append(traction_local_index(order, 0, m, order, t))
            elif side is Side.BOTTOM:
                slots.append(traction_local_index(order, 1, m, t, 0))
            else:
                slots.append(traction_local_index(order, 1, m, t, order))
    return np.asarray(slots, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DofLayout:
    """Global numbering of traction, displacement and rotation unknowns.

    Traction DOFs on an interior interface carry one global index used by both
    neighbours. Displacement and rotation unknowns are element-local and
    numbered contiguously per element; equilibrium rows share the displacement
    numbering, row = e * 2N^2 + m * N^2 + a + N * b.
    """
    order: int
    rotation_grid: RotationGrid
    n_elements: int
    traction_map: npt.NDArray[np.int64]
    n_traction: int
    shared_count: int

    @property
    def n_traction_local(self) -> int:
        return 4 * traction_family_size(self.order)

    @property
    def n_displacement_local(self) -> int:
        return 2 * self.order**2

    @property
    def n_displacement(self) -> int:
        return self.n_elements * self.n_displacement_local

    @property
    def n_rotation_local(self) -> int:
        n = self.order if self.rotation_grid is RotationGrid.GL else self.order + 1
        return n * n

    @property
    def n_rotation(self) -> int:
        return self.n_elements * self.n_rotation_local

    @property
    def n_body_force(self) -> int:
        return self.n_displacement

    @property
    def n_total(self) -> int:
        return self.n_traction + self.n_displacement + self.n_rotation

    def displacement_dofs(self, element: int) -> npt.NDArray[np.int64]:
        start = element * self.n_displacement_local
        return np.arange(start, start + self.n_displacement_local)

    def rotation_dofs(self, element: int) -> npt.NDArray[np.int64]:
        start = element * self.n_rotation_local
        return np.arange(start, start + self.n_rotation_local)

    def face_dofs(self, element: int, side: Side, component: int) -> npt.NDArray[np.int64]:
        slots = face_slots(self.order, side)[component * self.order:(component + 1) * self.order]
        return self.traction_map[element, slots]


IncidenceMatrix = sp.csr_matrix
