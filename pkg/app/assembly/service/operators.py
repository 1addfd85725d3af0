"""Discrete operators of the equilibrium formulation.

H and R use the (N + 1)^2 GLL rule, V and B the N-point GL rule, the body
force and boundary tractions a Gauss rule per sub-cell / sub-face.
"""

from collections.abc import Callable, Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.assembly.entities.entity import (
    BoundaryKind,
    BoundarySpec,
    Material,
    ParticularStressField,
    VectorField,
)
from app.assembly.service.element import ANTISYMMETRY, ReferenceElement, reference_element, rotation_basis
from app.geometry.entities.entity import ElementMap
from app.geometry.service.maps import face_points, map_eval
from app.geometry.service.piola import block_gradient, inverse_piola_stress
from app.mesh.entities.entity import DofLayout, MeshTopology, RotationGrid, Side, traction_local_index
from app.mesh.service.topology import build_dof_layout
from pkg.spectral.basis import BasisSet
from pkg.spectral.quadrature import RuleKind, gauss_points

Array = npt.NDArray[np.float64]
StressField = Callable[[Array], Array]


class _Triplets:
    """COO accumulator for element blocks"""

    def __init__(self) -> None:
        self.rows: list[Array] = []
        self.cols: list[Array] = []
        self.vals: list[Array] = []

    def add(self, rows: npt.ArrayLike, cols: npt.ArrayLike, block: Array) -> None:
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        r, c = np.meshgrid(rows, cols, indexing="ij")
        keep = block != 0.0
        self.rows.append(r[keep])
        self.cols.append(c[keep])
        self.vals.append(block[keep])

    def tocsr(self, shape: tuple[int, int]) -> sp.csr_matrix:
        if not self.vals:
            return sp.csr_matrix(shape)
        return sp.csr_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))), shape=shape
        )


def _layout(mesh: MeshTopology, order: int, layout: DofLayout | None) -> DofLayout:
    return build_dof_layout(mesh, order) if layout is None else layout


def _mapped_stress_basis(element_map: ElementMap, ref: ReferenceElement, element: int) -> tuple[Array, Array, Array]:
    """F^e Psi at the rule points, together with x and J."""
    x, grad, jac = map_eval(element_map, np.stack([ref.xi1, ref.xi2], axis=1), element=element)
    mapped = np.einsum("qij,qjk->qik", block_gradient(grad), ref.psi)
    return mapped, x, jac


def assemble_H(
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    material: Material,
    order: int,
    layout: DofLayout | None = None,
    points: int | None = None,
) -> sp.csr_matrix:
    """Compliance matrix sum_q (w_q / J_q) (F^e Psi)^T C (F^e Psi) over traction DOFs.

    ``points`` switches from GLL to a Gauss rule with that many points per direction.
    """
    layout = _layout(mesh, order, layout)
    ref = reference_element(order, points)
    compliance = material.compliance
    acc = _Triplets()
    for e, element_map in enumerate(maps):
        mapped, _, jac = _mapped_stress_basis(element_map, ref, e)
        weighted = mapped * (ref.weights / jac)[:, None, None]
        block = np.einsum("qik,ij,qjl->kl", weighted, compliance, mapped, optimize=True)
        dofs = layout.traction_map[e]
        acc.add(dofs, dofs, 0.5 * (block + block.T))
    return acc.tocsr((layout.n_traction, layout.n_traction))


def assemble_V(mesh: MeshTopology, order: int) -> sp.csr_matrix:
    """GL pairing of displacement test functions with the volume basis; geometry free."""
    ref = reference_element(order)
    local = sp.kron(sp.csr_matrix(ref.gl_pairing), sp.csr_matrix(ref.gl_pairing))
    return sp.kron(sp.identity(2 * mesh.n_elements, format="csr"), local, format="csr")


def assemble_R(
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    rotation_grid: RotationGrid | str,
    layout: DofLayout | None = None,
) -> sp.csr_matrix:
    """Pairing of rotation test functions with sigma_12 - sigma_21 (the 1/J cancels)."""
    grid = RotationGrid(rotation_grid)
    layout = _layout(mesh, order, layout)
    if layout.rotation_grid is not grid:
        layout = build_dof_layout(mesh, order, grid)
    ref = reference_element(order)
    test = rotation_basis(order, grid, ref.xi1, ref.xi2)
    acc = _Triplets()
    for e, element_map in enumerate(maps):
        mapped, _, _ = _mapped_stress_basis(element_map, ref, e)
        skew = np.einsum("i,qik->qk", ANTISYMMETRY, mapped)
        block = np.einsum("q,qr,qk->rk", ref.weights, test, skew)
        acc.add(layout.rotation_dofs(e), layout.traction_map[e], block)
    return acc.tocsr((layout.n_rotation, layout.n_traction))


def face_geometry(element_map: ElementMap, side: Side, tau: Array, element: int) -> tuple[Array, Array, Array]:
    """x, outward unit normal and length element |dx/dtau| along a side."""
    xi1, xi2 = face_points(side, tau)
    x, grad, _ = map_eval(element_map, np.stack([xi1, xi2], axis=1), element=element)
    tangent = grad[:, :, 1 - side.normal_axis]
    length = np.linalg.norm(tangent, axis=1)
    if side.normal_axis == 0:
        normal = np.stack([tangent[:, 1], -tangent[:, 0]], axis=1)
    else:
        normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1)
    normal = side.sign * normal / length[:, None]
    return x, normal, length


def assemble_B(
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    boundary: BoundarySpec,
    layout: DofLayout | None = None,
) -> tuple[sp.csr_matrix, Array]:
    """Boundary work pairing on displacement faces.

    Returns B (traction DOFs x boundary samples) and the sampled prescribed
    displacement, so B @ u_bar is the constitutive right-hand side.
    """
    layout = _layout(mesh, order, layout)
    gl = BasisSet.of(RuleKind.GL, order)
    gll = BasisSet.of(RuleKind.GLL, order)
    edge_at_gl = gll.edge(gl.nodes)
    weighted = gl.rule.weights[:, None] * edge_at_gl

    acc = _Triplets()
    samples: list[Array] = []
    column = 0
    for bc in boundary.of_kind(BoundaryKind.DISPLACEMENT):
        x, _, _ = face_geometry(maps[bc.element], bc.side, gl.nodes, bc.element)
        if bc.condition.value is None:
            values = np.zeros(order)
        else:
            values = np.asarray(bc.condition.value(x), dtype=np.float64)[:, bc.component]
        dofs = layout.face_dofs(bc.element, bc.side, bc.component)
        cols = np.arange(column, column + order)
        acc.add(dofs, cols, bc.side.sign * weighted.T)
        samples.append(values)
        column += order
    ubar = np.concatenate(samples) if samples else np.zeros(0)
    return acc.tocsr((layout.n_traction, column)), ubar


def subcell_rule(order: int, points: int) -> tuple[Array, Array]:
    """Gauss nodes/weights on every GLL sub-interval, shape (N, points)."""
    gll = BasisSet.of(RuleKind.GLL, order).nodes
    rule = gauss_points(points)
    half = 0.5 * np.diff(gll)
    mid = 0.5 * (gll[1:] + gll[:-1])
    return mid[:, None] + half[:, None] * rule.nodes[None, :], half[:, None] * rule.weights[None, :]


def project_body_force(
    f: VectorField | None,
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    over_integration: int = 2,
) -> Array:
    """Sub-cell integrals of f_m J over the reference sub-cells, ordered like the displacement DOFs."""
    n_local = 2 * order * order
    out = np.zeros(mesh.n_elements * n_local)
    if f is None:
        return out
    q = max(order + 1, over_integration * (order + 1))
    nodes, weights = subcell_rule(order, q)
    xi1, xi2 = np.meshgrid(nodes.ravel(), nodes.ravel(), indexing="xy")
    pts = np.stack([xi1.ravel(), xi2.ravel()], axis=1)
    for e, element_map in enumerate(maps):
        x, _, jac = map_eval(element_map, pts, element=e)
        values = np.asarray(f(x), dtype=np.float64) * jac[:, None]
        for m in range(2):
            grid = values[:, m].reshape(order, q, order, q)
            cells = np.einsum("brap,br,ap->ba", grid, weights, weights)
            start = e * n_local + m * order * order
            out[start:start + order * order] = cells.ravel()
    return out


def reduce_stress(
    stress: StressField,
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    layout: DofLayout | None = None,
    points: int = 12,
) -> Array:
    """Traction DOFs of an analytic Cauchy field: integrals of J F^-1 sigma over every sub-face."""
    layout = _layout(mesh, order, layout)
    gll = BasisSet.of(RuleKind.GLL, order).nodes
    seg_nodes, seg_weights = subcell_rule(order, points)
    n = order
    out = np.zeros(layout.n_traction)
    for e, element_map in enumerate(maps):
        local = np.zeros(layout.n_traction_local)
        for axis in (0, 1):
            # faces xi_axis = gll[i], tangential segments t
            normal = np.repeat(gll, seg_nodes.size)
            tangential = np.tile(seg_nodes.ravel(), n + 1)
            pts = np.stack([normal, tangential] if axis == 0 else [tangential, normal], axis=1)
            x, grad, jac = map_eval(element_map, pts, element=e)
            s_hat = inverse_piola_stress(grad, jac, np.asarray(stress(x), dtype=np.float64))
            for m in range(2):
                comp = s_hat[:, 2 * m + axis].reshape(n + 1, n, points)
                integrals = np.einsum("itp,tp->it", comp, seg_weights)
                for i in range(n + 1):
                    for t in range(n):
                        idx = traction_local_index(n, axis, m, i, t) if axis == 0 else traction_local_index(n, axis, m, t, i)
                        local[idx] = integrals[i, t]
        out[layout.traction_map[e]] = local
    return out


def strong_traction_values(
    boundary: BoundarySpec,
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    order: int,
    layout: DofLayout | None = None,
    particular: ParticularStressField | None = None,
    points: int = 12,
) -> tuple[npt.NDArray[np.int64], Array]:
    """Fixed traction DOFs: sign * integral of the outward traction over each sub-face."""
    layout = _layout(mesh, order, layout)
    seg_nodes, seg_weights = subcell_rule(order, points)
    dofs: list[npt.NDArray[np.int64]] = []
    values: list[Array] = []
    for bc in boundary.of_kind(BoundaryKind.TRACTION):
        x, normal, length = face_geometry(maps[bc.element], bc.side, seg_nodes.ravel(), bc.element)
        if bc.condition.value is None:
            traction = np.zeros(x.shape[0])
        else:
            traction = np.asarray(bc.condition.value(x, normal), dtype=np.float64)[:, bc.component]
        if particular is not None:
            sp_pairs = particular.evaluate(x).reshape(-1, 2, 2)
            traction = traction - np.einsum("mi,mi->m", sp_pairs[:, bc.component, :], normal)
        integrand = (traction * length).reshape(order, points)
        dofs.append(layout.face_dofs(bc.element, bc.side, bc.component))
        values.append(bc.side.sign * np.einsum("tp,tp->t", integrand, seg_weights))
    if not dofs:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(dofs), np.concatenate(values)


def assemble_Hp(
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    material: Material,
    order: int,
    particular: ParticularStressField,
    layout: DofLayout | None = None,
) -> tuple[sp.csr_matrix, Array]:
    """H_p = sum_q Psi^T F^eT C w_q and the particular stress sampled at the GLL points."""
    layout = _layout(mesh, order, layout)
    ref = reference_element(order)
    nq = ref.n_points
    compliance = material.compliance
    acc = _Triplets()
    sampled = np.zeros(mesh.n_elements * nq * 4)
    for e, element_map in enumerate(maps):
        mapped, x, _ = _mapped_stress_basis(element_map, ref, e)
        block = np.einsum("q,qik,ij->kqj", ref.weights, mapped, compliance).reshape(-1, nq * 4)
        cols = e * nq * 4 + np.arange(nq * 4)
        acc.add(layout.traction_map[e], cols, block)
        sampled[cols] = particular.evaluate(x).ravel()
    return acc.tocsr((layout.n_traction, mesh.n_elements * nq * 4)), sampled
