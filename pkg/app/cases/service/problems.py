"""Mesh, maps and boundary conditions for each test problem."""

import numpy as np
import numpy.typing as npt

from app.assembly.entities.entity import (
    BoundarySpec,
    ComponentCondition,
    Material,
    fixed,
    loaded,
)
from app.cases.entities.entity import CaseId, ManufacturedCase, Problem
from app.cases.service.kirsch import kirsch_solution
from app.cases.service.manufactured import check_consistency, deformed_grid
from app.geometry.entities.entity import ElementMap
from app.geometry.service.maps import (
    CircularArc,
    ComposedMap,
    LineSegment,
    bilinear_map,
    lattice_maps,
    sub_box,
    transfinite_map,
    validate_conforming,
)
from app.mesh.entities.entity import Side
from app.mesh.service.topology import build_mesh
from pkg.errors.exceptions import DomainValueError

Array = npt.NDArray[np.float64]

LEG_WIDTH = 0.1


def square_problem(case: ManufacturedCase, nx: int, ny: int | None = None, c: float = 0.0, straight: bool = False) -> Problem:
    """nx-by-ny elements on [-1, 1]^2 under the sine deformation, displacement given everywhere.

    ``straight`` replaces each curved element by the bilinear quadrilateral through
    its deformed vertices.
    """
    ny = nx if ny is None else ny
    check_consistency(case)
    mesh = build_mesh(nx, ny)
    global_map = deformed_grid(c) if c else None
    maps = lattice_maps(mesh, global_map, case.lower, case.upper)
    if straight and global_map is not None:
        maps = [_straightened(m) for m in maps]

    displacement = case.exact.displacement
    condition = fixed(displacement)
    boundary = BoundarySpec.from_rule(mesh, lambda e, side, cell: (condition, condition))
    width = (case.upper[0] - case.lower[0]) / nx
    return Problem(
        name=case.name,
        mesh=mesh,
        maps=maps,
        material=case.material,
        boundary=boundary,
        body_force=case.exact.body_force,
        particular=case.particular,
        exact=case.exact,
        h=width,
    )


def _straightened(element_map: ElementMap) -> ElementMap:
    ref = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    corners = element_map.position(ref[:, 0], ref[:, 1])
    return bilinear_map(corners)


def _sector_maps(hole_radius: float) -> tuple[ElementMap, ElementMap]:
    """Two transfinite patches of the quarter plate [0, 1]^2 minus the hole, split along the diagonal."""
    r45 = hole_radius * np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)])
    lower = transfinite_map(
        [
            LineSegment((hole_radius, 0.0), (1.0, 0.0)),
            LineSegment((1.0, 0.0), (1.0, 1.0)),
            LineSegment(r45, (1.0, 1.0)),
            CircularArc((0.0, 0.0), hole_radius, 0.0, np.pi / 4),
        ]
    )
    upper = transfinite_map(
        [
            LineSegment(r45, (1.0, 1.0)),
            LineSegment((1.0, 1.0), (0.0, 1.0)),
            LineSegment((0.0, hole_radius), (0.0, 1.0)),
            CircularArc((0.0, 0.0), hole_radius, np.pi / 4, np.pi / 2),
        ]
    )
    return lower, upper


def plate_with_hole(material: Material | None = None, load: float = 1.0, hole_radius: float = 0.5) -> Problem:
    """Quarter of a 2x2 plate with a central hole, eight curved elements.

    Lattice rows 0-1 cover 0-45 degrees and rows 2-3 cover 45-90 degrees; i = 0 lies
    on the hole, i = 1 on the outer edge.
    """
    if not 0.0 < hole_radius < 1.0:
        raise DomainValueError(f"hole radius {hole_radius} must lie in (0, 1)")
    material = material or Material()
    exact = kirsch_solution(load, hole_radius, material)
    mesh = build_mesh(2, 4)
    lower, upper = _sector_maps(hole_radius)
    maps: list[ElementMap] = []
    for i, j in mesh.cells:
        sector = lower if j < 2 else upper
        maps.append(ComposedMap(sector, sub_box(int(i), int(j) % 2, 2, 2)))
    validate_conforming(mesh, maps)

    def kirsch_traction(x: Array, n: Array) -> Array:
        s = exact.stress(x).reshape(-1, 2, 2)
        return np.einsum("kmi,ki->km", s, n)

    free = loaded()
    clamp = fixed()

    def rule(e: int, side: Side, cell: tuple[int, int]) -> tuple[ComponentCondition, ComponentCondition]:
        i, j = cell
        if side is Side.BOTTOM and j == 0:
            return free, clamp  # y = 0: t1 = 0, u2 = 0
        if side is Side.TOP and j == mesh.ny - 1:
            return clamp, free  # x = 0: u1 = 0, t2 = 0
        if side is Side.LEFT and i == 0:
            return free, free
        if side is Side.RIGHT and i == mesh.nx - 1:
            return loaded(kirsch_traction), loaded(kirsch_traction)
        raise DomainValueError(f"unexpected boundary face {side.name} of cell {cell}")

    boundary = BoundarySpec.from_rule(mesh, rule)
    return Problem(
        name=CaseId.PLATE_HOLE,
        mesh=mesh,
        maps=maps,
        material=material,
        boundary=boundary,
        exact=exact,
        body_force=exact.body_force,
    )


def l_shape(element_size: float, material: Material | None = None, load: float = 1.0) -> Problem:
    """Legs [0, 0.1] x [0, 1] and [0, 1] x [0, 0.1] tiled by squares of ``element_size``.

    The top edge y = 1 is clamped, the right edge x = 1 carries t = (0, -load),
    every other edge is free.
    """
    if element_size <= 0.0:
        raise DomainValueError(f"element size must be positive, got {element_size}")
    per_leg = LEG_WIDTH / element_size
    n_leg = int(round(per_leg))
    if n_leg < 1 or abs(per_leg - n_leg) > 1e-9 * max(per_leg, 1.0):
        raise DomainValueError(f"element size {element_size} does not divide the leg width {LEG_WIDTH}")
    n = int(round(1.0 / element_size))
    active = np.zeros((n, n), dtype=bool)
    active[:n_leg, :] = True
    active[:, :n_leg] = True
    mesh = build_mesh(n, n, active=active)
    maps = lattice_maps(mesh, None, (0.0, 0.0), (1.0, 1.0))
    material = material or Material()

    def downward(x: Array, normal: Array) -> Array:
        t = np.zeros_like(x)
        t[:, 1] = -load
        return t

    free = loaded()
    clamp = fixed()
    pull = loaded(downward)

    def rule(e: int, side: Side, cell: tuple[int, int]) -> tuple[ComponentCondition, ComponentCondition]:
        i, j = cell
        if side is Side.TOP and j == n - 1:
            return clamp, clamp
        if side is Side.RIGHT and i == n - 1:
            return pull, pull
        return free, free

    return Problem(
        name=CaseId.LSHAPE,
        mesh=mesh,
        maps=maps,
        material=material,
        boundary=BoundarySpec.from_rule(mesh, rule),
        h=element_size,
    )
