"""Lattice connectivity, traction numbering and the discrete divergence.

Only the 2D restriction is built. In 3D each sub-cell row would gain a third
face pair along xi3 and the families would grow to nine.
"""

from collections.abc import Sequence
from functools import lru_cache

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.mesh.entities.entity import (
    DofLayout,
    IncidenceMatrix,
    Interface,
    MeshTopology,
    RotationGrid,
    Side,
    face_slots,
    traction_local_index,
)
from pkg.errors.exceptions import DomainValueError

_STEP = {Side.LEFT: (-1, 0), Side.RIGHT: (1, 0), Side.BOTTOM: (0, -1), Side.TOP: (0, 1)}


def build_mesh(
    nx: int,
    ny: int,
    active: npt.ArrayLike | None = None,
    cells: Sequence[tuple[int, int]] | None = None,
) -> MeshTopology:
    """Connectivity of an nx-by-ny lattice.

    ``active`` is an optional (ny, nx) boolean mask of cells that exist (L-shape);
    ``cells`` optionally fixes the element order, otherwise elements are numbered
    x1-fastest then x2.
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise DomainValueError(f"element counts must be positive integers, got {nx}x{ny}")

    mask = np.ones((ny, nx), dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if mask.shape != (ny, nx):
        raise DomainValueError(f"active mask has shape {mask.shape}, expected {(ny, nx)}")

    if cells is None:
        ordered = [(i, j) for j in range(ny) for i in range(nx) if mask[j, i]]
    else:
        ordered = [(int(i), int(j)) for i, j in cells]
        if sorted(ordered) != sorted((i, j) for j in range(ny) for i in range(nx) if mask[j, i]):
            raise DomainValueError("explicit cell order must list every active cell exactly once")
    if not ordered:
        raise DomainValueError("mesh has no active cells")

    element_at = np.full((ny, nx), -1, dtype=np.int64)
    for e, (i, j) in enumerate(ordered):
        element_at[j, i] = e

    n_e = len(ordered)
    neighbors = np.full((n_e, 4), -1, dtype=np.int64)
    for e, (i, j) in enumerate(ordered):
        for side, (di, dj) in _STEP.items():
            ii, jj = i + di, j + dj
            if 0 <= ii < nx and 0 <= jj < ny:
                neighbors[e, side] = element_at[jj, ii]

    faces = np.full((n_e, 4), -1, dtype=np.int64)
    interfaces: list[Interface] = []
    for e in range(n_e):
        for side in Side:
            if faces[e, side] >= 0:
                continue
            nb = int(neighbors[e, side])
            if side in (Side.RIGHT, Side.TOP):
                minus, plus = e, nb
            else:
                minus, plus = nb, e
            face = Interface(index=len(interfaces), minus=minus, plus=plus, normal_axis=side.normal_axis)
            interfaces.append(face)
            faces[e, side] = face.index
            if nb >= 0:
                faces[nb, side.opposite] = face.index

    return MeshTopology(
        nx=int(nx),
        ny=int(ny),
        cells=np.asarray(ordered, dtype=np.int64),
        element_at=element_at,
        neighbors=neighbors,
        faces=faces,
        interfaces=tuple(interfaces),
    )


def build_dof_layout(mesh: MeshTopology, order: int, rotation_grid: RotationGrid | str = RotationGrid.GL) -> DofLayout:
    """Number traction DOFs with interface sharing, then the element-local families."""
    if order < 1:
        raise DomainValueError(f"polynomial order must be >= 1, got {order}")

    n_local = 4 * order * (order + 1)
    traction_map = np.full((mesh.n_elements, n_local), -1, dtype=np.int64)
    next_id = 0
    shared = 0
    for e in range(mesh.n_elements):
        for side in Side:
            nb = int(mesh.neighbors[e, side])
            if 0 <= nb < e:
                traction_map[e, face_slots(order, side)] = traction_map[nb, face_slots(order, side.opposite)]
                shared += 2 * order
        fresh = traction_map[e] < 0
        count = int(fresh.sum())
        traction_map[e, fresh] = np.arange(next_id, next_id + count)
        next_id += count

    return DofLayout(
        order=order,
        rotation_grid=RotationGrid(rotation_grid),
        n_elements=mesh.n_elements,
        traction_map=traction_map,
        n_traction=next_id,
        shared_count=shared,
    )


@lru_cache(maxsize=None)
def local_incidence(order: int) -> sp.csr_matrix:
    """Element divergence: rows (m, a, b) -> a + N b + m N^2, columns local traction slots"""
    n = order
    rows, cols, vals = [], [], []
    for m in range(2):
        for b in range(n):
            for a in range(n):
                r = m * n * n + a + n * b
                entries = (
                    (traction_local_index(n, 0, m, a + 1, b), 1),
                    (traction_local_index(n, 0, m, a, b), -1),
                    (traction_local_index(n, 1, m, a, b + 1), 1),
                    (traction_local_index(n, 1, m, a, b), -1),
                )
                for col, val in entries:
                    rows.append(r)
                    cols.append(col)
                    vals.append(val)
    shape = (2 * n * n, 4 * n * (n + 1))
    return sp.csr_matrix((np.asarray(vals, dtype=np.int8), (rows, cols)), shape=shape)


def build_incidence(mesh: MeshTopology, order: int, layout: DofLayout | None = None) -> IncidenceMatrix:
    """Global integer divergence over shared traction columns; no coordinates involved."""
    if layout is None:
        layout = build_dof_layout(mesh, order)
    if layout.order != order:
        raise DomainValueError(f"layout order {layout.order} does not match {order}")

    local = local_incidence(order).tocoo()
    n_rows_local = local.shape[0]
    rows = (np.arange(mesh.n_elements)[:, None] * n_rows_local + local.row[None, :]).ravel()
    cols = layout.traction_map[:, local.col].ravel()
    vals = np.tile(local.data, mesh.n_elements)
    shape = (mesh.n_elements * n_rows_local, layout.n_traction)
    return sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=np.int8)
