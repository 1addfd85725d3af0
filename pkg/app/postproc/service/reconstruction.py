"""Reconstruction of the discrete fields at sample points."""

from collections.abc import Callable, Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.assembly.entities.entity import Material, ParticularStressField
from app.assembly.service.element import displacement_basis, rotation_basis, stress_basis, volume_basis
from app.assembly.service.operators import subcell_rule
from app.geometry.entities.entity import ElementMap
from app.geometry.service.maps import face_points, map_eval
from app.geometry.service.piola import inverse_piola_stress, piola_stress
from app.mesh.entities.entity import DofLayout, MeshTopology, RotationGrid, Side
from app.mesh.service.topology import build_dof_layout, build_incidence
from app.postproc.entities.entity import SampledFields, SampleGrid
from app.solver.entities.entity import SolveReport

Array = npt.NDArray[np.float64]
StressAt = Callable[[int, Array, Array], Array]


class FieldSampler:
    """Evaluates sigma^h (Piola mapped), u^h, omega^h, f^h and the equilibrium residual per element"""

    def __init__(
        self,
        mesh: MeshTopology,
        maps: Sequence[ElementMap],
        order: int,
        rotation_grid: RotationGrid | str = RotationGrid.GL,
        material: Material | None = None,
        layout: DofLayout | None = None,
    ) -> None:
        self.mesh = mesh
        self.maps = maps
        self.order = order
        self.rotation_grid = RotationGrid(rotation_grid)
        self.material = material or Material()
        self.layout = layout if layout is not None else build_dof_layout(mesh, order, self.rotation_grid)

    def _local(self, values: Array, element: int, per_element: int) -> Array:
        return values[element * per_element:(element + 1) * per_element]

    def stress_at(self, traction: Array, particular: ParticularStressField | None = None) -> StressAt:
        """Physical stress of element e at reference points (xi1, xi2)."""

        def evaluate(element: int, xi1: Array, xi2: Array) -> Array:
            x, grad, jac = map_eval(self.maps[element], np.stack([xi1, xi2], axis=1), element=element)
            psi = stress_basis(self.order, xi1, xi2)
            s_hat = psi @ traction[self.layout.traction_map[element]]
            sigma = piola_stress(grad, jac, s_hat)
            if particular is not None:
                sigma = sigma + particular.evaluate(x)
            return sigma

        return evaluate

    def sample(
        self,
        report: SolveReport,
        body_force: Array,
        grid: SampleGrid,
        particular: ParticularStressField | None = None,
    ) -> SampledFields:
        n, ne = self.order, self.mesh.n_elements
        xi1, xi2 = grid.xi1, grid.xi2
        psi = stress_basis(n, xi1, xi2)
        vol = volume_basis(n, xi1, xi2)
        disp = displacement_basis(n, xi1, xi2)
        rot = rotation_basis(n, self.rotation_grid, xi1, xi2)
        divergence = build_incidence(self.mesh, n, self.layout) @ report.traction + body_force

        m = grid.size
        out = {
            "x": np.empty((ne, m, 2)),
            "jacobian": np.empty((ne, m)),
            "stress": np.empty((ne, m, 4)),
            "displacement": np.empty((ne, m, 2)),
            "rotation": np.empty((ne, m)),
            "body_force": np.empty((ne, m, 2)),
            "residual": np.empty((ne, m, 2)),
        }
        n_cells = n * n
        n_rot = self.layout.n_rotation_local
        for e, element_map in enumerate(self.maps):
            x, grad, jac = map_eval(element_map, np.stack([xi1, xi2], axis=1), element=e)
            sigma = piola_stress(grad, jac, psi @ report.traction[self.layout.traction_map[e]])
            if particular is not None:
                sigma = sigma + particular.evaluate(x)
            out["x"][e] = x
            out["jacobian"][e] = jac
            out["stress"][e] = sigma
            out["displacement"][e] = disp @ self._local(report.displacement, e, 2 * n_cells).reshape(2, n_cells).T
            out["rotation"][e] = rot @ self._local(report.rotation, e, n_rot)
            out["body_force"][e] = vol @ self._local(body_force, e, 2 * n_cells).reshape(2, n_cells).T / jac[:, None]
            out["residual"][e] = vol @ self._local(divergence, e, 2 * n_cells).reshape(2, n_cells).T / jac[:, None]
        strain = out["stress"] @ self.material.compliance
        return SampledFields(grid=grid, strain=strain, **out)


def equilibrium_residual_field(
    traction: Array,
    body_force: Array,
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    grid: SampleGrid,
    incidence: sp.spmatrix | None = None,
) -> Array:
    """Per-component max |(Psi_3 D T + Psi_3 F) / J| over all samples."""
    incidence = build_incidence(mesh, order) if incidence is None else incidence
    cells = (incidence @ traction + body_force).reshape(mesh.n_elements, 2, order * order)
    vol = volume_basis(order, grid.xi1, grid.xi2)
    pts = np.stack([grid.xi1, grid.xi2], axis=1)
    worst = np.zeros(2)
    for e, element_map in enumerate(maps):
        _, _, jac = map_eval(element_map, pts, element=e)
        values = (vol @ cells[e].T) / jac[:, None]
        worst = np.maximum(worst, np.max(np.abs(values), axis=0))
    return worst


def stress_asymmetry(fields: SampledFields) -> float:
    """max |sigma_12 - sigma_21| over the samples"""
    stress = fields.flat("stress")
    return float(np.max(np.abs(stress[:, 2] - stress[:, 1])))


def body_force_integrals(
    body_force: Array, mesh: MeshTopology, maps: Sequence[ElementMap], order: int, points: int = 8
) -> Array:
    """Sub-cell integrals of the reconstructed f^h, ordered like the body-force DOFs."""
    nodes, weights = subcell_rule(order, points)
    xi1, xi2 = np.meshgrid(nodes.ravel(), nodes.ravel(), indexing="xy")
    xi1, xi2 = xi1.ravel(), xi2.ravel()
    vol = volume_basis(order, xi1, xi2)
    n_cells = order * order
    out = np.zeros_like(body_force)
    for e, element_map in enumerate(maps):
        _, _, jac = map_eval(element_map, np.stack([xi1, xi2], axis=1), element=e)
        local = body_force[e * 2 * n_cells:(e + 1) * 2 * n_cells].reshape(2, n_cells)
        f_h = (vol @ local.T) / jac[:, None]
        for m in range(2):
            grid = (f_h[:, m] * jac).reshape(order, points, order, points)
            cells = np.einsum("brap,br,ap->ba", grid, weights, weights)
            start = e * 2 * n_cells + m * n_cells
            out[start:start + n_cells] = cells.ravel()
    return out


def interface_traction_jump(
    stress_at: StressAt, mesh: MeshTopology, maps: Sequence[ElementMap], points: int = 50
) -> float:
    """Largest mismatch of the interface-normal reference stress seen from the two sides of every interior interface."""
    t = np.linspace(-1.0, 1.0, points)
    worst = 0.0
    for face in mesh.interior_interfaces:
        axis = face.normal_axis
        sides = (Side.RIGHT, Side.LEFT) if axis == 0 else (Side.TOP, Side.BOTTOM)
        normal_parts = []
        for element, side in zip((face.minus, face.plus), sides):
            xi1, xi2 = face_points(side, t)
            _, grad, jac = map_eval(maps[element], np.stack([xi1, xi2], axis=1), element=element)
            s_hat = inverse_piola_stress(grad, jac, stress_at(element, xi1, xi2))
            normal_parts.append(s_hat[:, [axis, 2 + axis]])
        worst = max(worst, float(np.max(np.abs(normal_parts[0] - normal_parts[1]))))
    return worst
