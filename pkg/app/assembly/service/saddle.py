from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.assembly.entities.entity import (
    BoundaryKind,
    BoundarySpec,
    Material,
    ParticularStressField,
    SaddleSystem,
    VectorField,
)
from app.assembly.service.operators import (
    assemble_B,
    assemble_H,
    assemble_Hp,
    assemble_R,
    assemble_V,
    project_body_force,
    strong_traction_values,
)
from app.geometry.entities.entity import ElementMap
from app.geometry.service.maps import validate_conforming
from app.mesh.entities.entity import MeshTopology, RotationGrid
from app.mesh.service.topology import build_dof_layout, build_incidence
from pkg.errors.exceptions import BoundaryError, GeometryError

Array = npt.NDArray[np.float64]


def build_saddle_system(
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    material: Material,
    order: int,
    rotation_grid: RotationGrid | str,
    boundary: BoundarySpec,
    f: VectorField | None = None,
    particular: ParticularStressField | None = None,
    over_integration: int = 2,
    traction_points: int = 12,
) -> SaddleSystem:
    """Assemble the symmetric indefinite system and eliminate the strong tractions.

    With a particular field the equilibrium right-hand side is zero and the
    constitutive one carries -H_p sigma_p.
    """
    if len(maps) != mesh.n_elements:
        raise GeometryError(f"{len(maps)} element maps for {mesh.n_elements} elements")
    validate_conforming(mesh, maps)

    layout = build_dof_layout(mesh, order, rotation_grid)
    incidence = build_incidence(mesh, order, layout)
    compliance = assemble_H(mesh, maps, material, order, layout)
    pairing = assemble_V(mesh, order)
    rotation = assemble_R(mesh, maps, order, layout.rotation_grid, layout)
    b_matrix, ubar = assemble_B(mesh, maps, order, boundary, layout)

    equilibrium = (pairing @ incidence.astype(np.float64)).tocsr()
    matrix = sp.bmat(
        [
            [compliance, equilibrium.T, -rotation.T],
            [equilibrium, None, None],
            [-rotation, None, None],
        ],
        format="csr",
    )

    rhs_traction = np.asarray(b_matrix @ ubar).ravel()
    particular_rhs = None
    if particular is not None:
        hp, sigma_p = assemble_Hp(mesh, maps, material, order, particular, layout)
        particular_rhs = hp @ sigma_p
        rhs_traction = rhs_traction - particular_rhs
        body_force = np.zeros(layout.n_displacement)
    else:
        body_force = project_body_force(f, mesh, maps, order, over_integration)

    rhs = np.concatenate([rhs_traction, -(pairing @ body_force), np.zeros(layout.n_rotation)])

    fixed_dofs, fixed_values = strong_traction_values(
        boundary, mesh, maps, order, layout, particular=particular, points=traction_points
    )
    system = SaddleSystem(
        layout=layout,
        matrix=matrix,
        rhs=rhs,
        compliance=compliance,
        incidence=incidence,
        pairing=pairing,
        rotation=rotation,
        body_force=body_force,
        fixed_dofs=fixed_dofs,
        fixed_values=fixed_values,
        free_dofs=np.arange(matrix.shape[0]),
        reduced_matrix=matrix,
        reduced_rhs=rhs,
        particular_rhs=particular_rhs,
        has_particular=particular is not None,
    )
    return apply_strong_tractions(system, fixed_dofs, fixed_values, boundary)


def apply_strong_tractions(
    system: SaddleSystem,
    fixed_dofs: npt.ArrayLike,
    fixed_values: npt.ArrayLike,
    boundary: BoundarySpec | None = None,
) -> SaddleSystem:
    """Move fixed traction columns to the right-hand side by symmetric substitution.

    When ``boundary`` is given, fixed DOFs on displacement faces are rejected.
    """
    dofs = np.asarray(fixed_dofs, dtype=np.int64)
    values = np.asarray(fixed_values, dtype=np.float64)
    if dofs.shape != values.shape:
        raise BoundaryError(f"{dofs.size} fixed DOFs but {values.size} values")
    if np.unique(dofs).size != dofs.size:
        raise BoundaryError("a traction DOF is fixed more than once")
    if np.any(dofs >= system.layout.n_traction) or np.any(dofs < 0):
        raise BoundaryError("only traction DOFs can be fixed")
    if boundary is not None:
        displacement_dofs = {
            int(d)
            for bc in boundary.of_kind(BoundaryKind.DISPLACEMENT)
            for d in system.layout.face_dofs(bc.element, bc.side, bc.component)
        }
        clash = sorted(displacement_dofs.intersection(int(d) for d in dofs))
        if clash:
            raise BoundaryError(f"traction DOFs {clash[:5]} lie on displacement faces")

    n = system.matrix.shape[0]
    free_mask = np.ones(n, dtype=bool)
    free_mask[dofs] = False
    free = np.flatnonzero(free_mask)

    matrix = system.matrix.tocsc()
    reduced_matrix = matrix[free][:, free].tocsr()
    reduced_rhs = system.rhs[free] - matrix[free][:, dofs] @ values if dofs.size else system.rhs[free]

    return SaddleSystem(
        layout=system.layout,
        matrix=system.matrix,
        rhs=system.rhs,
        compliance=system.compliance,
        incidence=system.incidence,
        pairing=system.pairing,
        rotation=system.rotation,
        body_force=system.body_force,
        fixed_dofs=dofs,
        fixed_values=values,
        free_dofs=free,
        reduced_matrix=reduced_matrix,
        reduced_rhs=np.asarray(reduced_rhs).ravel(),
        particular_rhs=system.particular_rhs,
        has_particular=system.has_particular,
    )
