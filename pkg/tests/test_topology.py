import numpy as np
import pytest

from app.mesh.entities.entity import RotationGrid, Side, face_slots
from app.mesh.service.topology import build_dof_layout, build_incidence, build_mesh, local_incidence
from pkg.errors.exceptions import DomainValueError


def test_lattice_numbering_and_neighbors() -> None:
    mesh = build_mesh(3, 2)
    assert mesh.n_elements == 6
    assert tuple(mesh.cells[4]) == (1, 1)
    assert mesh.neighbors[4, Side.LEFT] == 3
    assert mesh.neighbors[4, Side.BOTTOM] == 1
    assert mesh.neighbors[4, Side.TOP] == -1
    assert len(mesh.interior_interfaces) == 7
    assert len(mesh.boundary_interfaces) == 10


def test_interfaces_are_owned_by_right_and_top() -> None:
    mesh = build_mesh(2, 2)
    for face in mesh.interior_interfaces:
        side = Side.RIGHT if face.normal_axis == 0 else Side.TOP
        assert mesh.neighbors[face.minus, side] == face.plus


@pytest.mark.parametrize("order", [1, 2, 4])
@pytest.mark.parametrize("shape", [(1, 1), (2, 3), (4, 4)])
def test_traction_count(order: int, shape: tuple[int, int]) -> None:
    mesh = build_mesh(*shape)
    layout = build_dof_layout(mesh, order)
    interior = len(mesh.interior_interfaces)
    assert layout.n_traction == mesh.n_elements * 4 * order * (order + 1) - interior * 2 * order
    assert layout.shared_count == interior * 2 * order
    assert layout.n_displacement == mesh.n_elements * 2 * order**2


def test_neighbours_share_face_dofs() -> None:
    mesh = build_mesh(2, 1)
    layout = build_dof_layout(mesh, 3)
    for m in (0, 1):
        np.testing.assert_array_equal(layout.face_dofs(0, Side.RIGHT, m), layout.face_dofs(1, Side.LEFT, m))
    assert not set(layout.face_dofs(0, Side.LEFT, 0)) & set(layout.face_dofs(1, Side.RIGHT, 0))


def test_rotation_counts() -> None:
    mesh = build_mesh(2, 2)
    assert build_dof_layout(mesh, 3, RotationGrid.GL).n_rotation == 4 * 9
    assert build_dof_layout(mesh, 3, "GLL").n_rotation == 4 * 16


def test_face_slots_are_distinct() -> None:
    slots = np.concatenate([face_slots(3, side) for side in Side])
    assert len(set(slots.tolist())) == slots.size == 4 * 2 * 3


def test_local_incidence_structure() -> None:
    d = local_incidence(3).toarray()
    assert d.shape == (18, 48)
    assert set(np.unique(d).tolist()) <= {-1, 0, 1}
    np.testing.assert_array_equal(np.count_nonzero(d, axis=1), 4)
    np.testing.assert_array_equal(d.sum(axis=1), 0)


def test_interior_traction_columns_cancel_in_global_incidence() -> None:
    mesh = build_mesh(3, 3)
    d = build_incidence(mesh, 2)
    assert d.dtype == np.int8
    column_sums = np.asarray(d.sum(axis=0)).ravel()
    layout = build_dof_layout(mesh, 2)
    boundary = {
        int(dof)
        for e, side in mesh.boundary_faces()
        for m in (0, 1)
        for dof in layout.face_dofs(e, side, m)
    }
    interior = [k for k in range(layout.n_traction) if k not in boundary]
    np.testing.assert_array_equal(column_sums[interior], 0)


def test_l_shaped_mask() -> None:
    active = np.ones((4, 4), dtype=bool)
    active[1:, 1:] = False
    mesh = build_mesh(4, 4, active=active)
    assert mesh.n_elements == 7
    assert mesh.neighbors[mesh.element_at[0, 1], Side.TOP] == -1


def test_explicit_cell_order() -> None:
    mesh = build_mesh(2, 1, cells=[(1, 0), (0, 0)])
    assert tuple(mesh.cells[0]) == (1, 0)
    assert mesh.neighbors[0, Side.LEFT] == 1


@pytest.mark.parametrize("args", [(0, 1), (2, -1)])
def test_invalid_mesh(args: tuple[int, int]) -> None:
    with pytest.raises(DomainValueError):
        build_mesh(*args)


def test_invalid_cell_order() -> None:
    with pytest.raises(DomainValueError):
        build_mesh(2, 1, cells=[(0, 0), (0, 0)])


def test_shared_column_pairs_opposite_signs() -> None:
    mesh = build_mesh(2, 1)
    layout = build_dof_layout(mesh, 1)
    d = build_incidence(mesh, 1, layout).toarray()
    for m in (0, 1):
        (column,) = layout.face_dofs(0, Side.RIGHT, m)
        rows = np.flatnonzero(d[:, column])
        assert rows.size == 2
        assert {int(r) // 2 for r in rows} == {0, 1}
        assert sorted(d[rows, column].tolist()) == [-1, 1]
