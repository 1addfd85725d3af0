"""Displacement-based Galerkin Q4/Q9 elements for plane stress."""

import time

import numpy as np
import numpy.typing as npt
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from app.assembly.entities.entity import BoundaryKind
from app.assembly.service.element import tensor_points, tensor_weights
from app.assembly.service.operators import face_geometry
from app.baseline_fem.entities.entity import FemModel, FemOrder, FemResidualReport, FemSolution
from app.cases.entities.entity import Problem
from app.geometry.service.maps import AffineMap, ComposedMap, map_eval
from app.mesh.entities.entity import Side
from app.postproc.entities.entity import SampledFields, SampleGrid
from app.postproc.service.reconstruction import StressAt, interface_traction_jump
from pkg.errors.exceptions import DomainValueError, SolverError
from pkg.log.logger import Logger
from pkg.spectral.basis import BasisSet
from pkg.spectral.quadrature import RuleKind, gauss_points

Array = npt.NDArray[np.float64]


class _Shape:
    """Tensor Lagrange basis on the GLL(p) nodes and its reference derivatives"""

    def __init__(self, order: int) -> None:
        self.order = order
        self.basis = BasisSet.of(RuleKind.GLL, order)

    def values(self, xi1: Array, xi2: Array) -> Array:
        h1, h2 = self.basis.lagrange(xi1), self.basis.lagrange(xi2)
        return (h1[:, None, :] * h2[:, :, None]).reshape(h1.shape[0], -1)

    def gradients(self, xi1: Array, xi2: Array) -> Array:
        """dN/dxi_k, shape (M, 2, n_nodes)."""
        h1, h2 = self.basis.lagrange(xi1), self.basis.lagrange(xi2)
        d1, d2 = self.basis.lagrange_derivative(xi1), self.basis.lagrange_derivative(xi2)
        m = h1.shape[0]
        g1 = (d1[:, None, :] * h2[:, :, None]).reshape(m, -1)
        g2 = (h1[:, None, :] * d2[:, :, None]).reshape(m, -1)
        return np.stack([g1, g2], axis=1)

    def hessians(self, xi1: Array, xi2: Array) -> Array:
        """d2N/dxi_k dxi_l, shape (M, 2, 2, n_nodes)."""
        b = self.basis
        h1, h2 = b.lagrange(xi1), b.lagrange(xi2)
        d1, d2 = b.lagrange_derivative(xi1), b.lagrange_derivative(xi2)
        s1, s2 = b.lagrange_second_derivative(xi1), b.lagrange_second_derivative(xi2)
        m = h1.shape[0]

        def outer(a: Array, c: Array) -> Array:
            return (a[:, None, :] * c[:, :, None]).reshape(m, -1)

        out = np.empty((m, 2, 2, h1.shape[1] * h2.shape[1]))
        out[:, 0, 0] = outer(s1, h2)
        out[:, 0, 1] = out[:, 1, 0] = outer(d1, d2)
        out[:, 1, 1] = outer(h1, s2)
        return out

    def side_nodes(self, side: Side) -> npt.NDArray[np.int64]:
        p = self.order
        line = np.arange(p + 1)
        if side is Side.LEFT:
            return (p + 1) * line
        if side is Side.RIGHT:
            return p + (p + 1) * line
        if side is Side.BOTTOM:
            return line
        return line + (p + 1) * p


def _strain_matrix(grad_x: Array) -> Array:
    """B with rows [e11, e22, 2 e12] over DOFs (node, component), shape (M, 3, 2 n)."""
    m, _, n = grad_x.shape
    b = np.zeros((m, 3, 2 * n))
    b[:, 0, 0::2] = grad_x[:, 0]
    b[:, 1, 1::2] = grad_x[:, 1]
    b[:, 2, 0::2] = grad_x[:, 1]
    b[:, 2, 1::2] = grad_x[:, 0]
    return b


def _physical_gradients(shape: _Shape, grad: Array, xi1: Array, xi2: Array) -> Array:
    """dN/dx_i = sum_k dN/dxi_k (F^-1)_ki, shape (M, 2, n)."""
    inv = np.linalg.inv(grad)
    return np.einsum("mkn,mki->min", shape.gradients(xi1, xi2), inv)


def _is_affine(element_map) -> bool:
    if isinstance(element_map, AffineMap):
        return True
    return isinstance(element_map, ComposedMap) and isinstance(element_map.outer, AffineMap)


def build_fem_model(problem: Problem, order: int | FemOrder) -> FemModel:
    """Number lattice nodes so neighbours share their edge nodes."""
    p = FemOrder(int(order))
    mesh = problem.mesh
    shape = _Shape(int(p))
    ids = -np.ones((int(p) * mesh.ny + 1, int(p) * mesh.nx + 1), dtype=np.int64)
    per_element = (int(p) + 1) ** 2
    connectivity = np.empty((mesh.n_elements, per_element), dtype=np.int64)
    coordinates: list[Array] = []
    xi1, xi2 = tensor_points(shape.basis.nodes)
    count = 0
    for e, (i, j) in enumerate(mesh.cells):
        x = problem.maps[e].position(xi1, xi2)
        for local in range(per_element):
            a, b = local % (int(p) + 1), local // (int(p) + 1)
            gy, gx = int(p) * j + b, int(p) * i + a
            if ids[gy, gx] < 0:
                ids[gy, gx] = count
                coordinates.append(x[local])
                count += 1
            connectivity[e, local] = ids[gy, gx]
    return FemModel(
        mesh=mesh,
        maps=problem.maps,
        material=problem.material,
        boundary=problem.boundary,
        order=p,
        connectivity=connectivity,
        coordinates=np.asarray(coordinates),
        body_force=problem.body_force,
    )


def assemble_stiffness(model: FemModel) -> tuple[sp.csr_matrix, Array]:
    """Global K and the load vector from body force and boundary tractions."""
    p = int(model.order)
    shape = _Shape(p)
    rule = gauss_points(p + 1)
    xi1, xi2 = tensor_points(rule.nodes)
    weights = tensor_weights(rule)
    values = shape.values(xi1, xi2)
    d = model.material.plane_stress_stiffness

    rows, cols, vals = [], [], []
    load = np.zeros(model.n_dofs)
    for e, element_map in enumerate(model.maps):
        x, grad, jac = map_eval(element_map, np.stack([xi1, xi2], axis=1), element=e)
        b = _strain_matrix(_physical_gradients(shape, grad, xi1, xi2))
        ke = np.einsum("q,qik,ij,qjl->kl", weights * jac, b, d, b)
        dofs = model.element_dofs(e)
        r, c = np.meshgrid(dofs, dofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(ke.ravel())
        if model.body_force is not None:
            f = np.asarray(model.body_force(x), dtype=np.float64)
            fe = np.einsum("q,qn,qm->nm", weights * jac, values, f).ravel()
            np.add.at(load, dofs, fe)

    line = gauss_points(max(p + 2, 4))
    ref = BasisSet.of(RuleKind.GLL, p)
    for bc in model.boundary.of_kind(BoundaryKind.TRACTION):
        if bc.condition.value is None:
            continue
        x, normal, length = face_geometry(model.maps[bc.element], bc.side, line.nodes, bc.element)
        traction = np.asarray(bc.condition.value(x, normal), dtype=np.float64)[:, bc.component]
        side_nodes = shape.side_nodes(bc.side)
        along = ref.lagrange(line.nodes)
        fe = np.einsum("q,qa->a", line.weights * length * traction, along)
        nodes = model.connectivity[bc.element, side_nodes]
        np.add.at(load, 2 * nodes + bc.component, fe)

    stiffness = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(model.n_dofs, model.n_dofs)
    )
    return stiffness, load


def dirichlet_values(model: FemModel) -> tuple[npt.NDArray[np.int64], Array]:
    shape = _Shape(int(model.order))
    fixed: dict[int, float] = {}
    for bc in model.boundary.of_kind(BoundaryKind.DISPLACEMENT):
        nodes = model.connectivity[bc.element, shape.side_nodes(bc.side)]
        if bc.condition.value is None:
            values = np.zeros(nodes.size)
        else:
            values = np.asarray(bc.condition.value(model.coordinates[nodes]), dtype=np.float64)[:, bc.component]
        for node, value in zip(nodes, values):
            fixed[int(2 * node + bc.component)] = float(value)
    dofs = np.fromiter(fixed.keys(), dtype=np.int64, count=len(fixed))
    order = np.argsort(dofs)
    return dofs[order], np.fromiter(fixed.values(), dtype=np.float64, count=len(fixed))[order]


def rigid_body_modes(stiffness: sp.spmatrix, tol: float = 1e-9) -> int:
    """Kernel dimension of the unconstrained stiffness (dense, small models only)."""
    eig = la.eigvalsh(stiffness.toarray())
    return int(np.count_nonzero(np.abs(eig) <= tol * np.max(np.abs(eig))))


def solve_fem(problem: Problem, order: int | FemOrder) -> FemSolution:
    model = build_fem_model(problem, order)
    stiffness, load = assemble_stiffness(model)
    dofs, values = dirichlet_values(model)
    if dofs.size == 0:
        raise SolverError("displacement model needs at least one prescribed displacement", block="displacement")
    free = np.setdiff1d(np.arange(model.n_dofs), dofs)
    u = np.zeros(model.n_dofs)
    u[dofs] = values
    start = time.perf_counter()
    k = stiffness.tocsc()
    rhs = load[free] - k[free][:, dofs] @ values
    u[free] = spla.spsolve(k[free][:, free], rhs)
    elapsed = time.perf_counter() - start
    if not np.all(np.isfinite(u)):
        raise SolverError("displacement solve produced non-finite values", block="displacement")
    energy = 0.5 * float(u @ (stiffness @ u))
    return FemSolution(
        model=model, displacement=u, stiffness=stiffness, energy=energy, solve_time=elapsed, n_free=int(free.size)
    )


def fem_stress_at(solution: FemSolution) -> StressAt:
    """Raw (unaveraged) stress of element e at reference points."""
    model = solution.model
    shape = _Shape(int(model.order))
    d = model.material.plane_stress_stiffness

    def evaluate(element: int, xi1: Array, xi2: Array) -> Array:
        _, grad, _ = map_eval(model.maps[element], np.stack([xi1, xi2], axis=1), element=element)
        b = _strain_matrix(_physical_gradients(shape, grad, xi1, xi2))
        voigt = b @ solution.displacement[model.element_dofs(element)] @ d.T
        return np.stack([voigt[:, 0], voigt[:, 2], voigt[:, 2], voigt[:, 1]], axis=1)

    return evaluate


def _residual_at(solution: FemSolution, element: int, xi1: Array, xi2: Array, x: Array, grad: Array) -> Array:
    """div sigma + f from second derivatives of the interpolant; F is constant on affine elements."""
    model = solution.model
    shape = _Shape(int(model.order))
    inv = np.linalg.inv(grad)
    hess = np.einsum("mkln,mki,mlj->mijn", shape.hessians(xi1, xi2), inv, inv)
    ue = solution.displacement[model.element_dofs(element)].reshape(-1, 2)
    # d2u[m, c, i, j] = d2 u_c / dx_i dx_j
    d2u = np.einsum("mijn,nc->mcij", hess, ue)
    d = model.material.plane_stress_stiffness
    d11, d12, d22, d33 = d[0, 0], d[0, 1], d[1, 1], d[2, 2]
    r1 = d11 * d2u[:, 0, 0, 0] + d12 * d2u[:, 1, 0, 1] + d33 * (d2u[:, 0, 1, 1] + d2u[:, 1, 0, 1])
    r2 = d33 * (d2u[:, 0, 0, 1] + d2u[:, 1, 0, 0]) + d12 * d2u[:, 0, 0, 1] + d22 * d2u[:, 1, 1, 1]
    residual = np.stack([r1, r2], axis=1)
    if model.body_force is not None:
        residual = residual + np.asarray(model.body_force(x), dtype=np.float64)
    return residual


def fem_equilibrium_residual(solution: FemSolution, grid: SampleGrid, jump_points: int = 50) -> FemResidualReport:
    """Interior |div sigma + f| at the samples plus inter-element traction jumps."""
    model = solution.model
    if not all(_is_affine(m) for m in model.maps):
        raise DomainValueError("the pointwise FEM residual is only available on affine elements")
    pts = np.stack([grid.xi1, grid.xi2], axis=1)
    worst = 0.0
    for e, element_map in enumerate(model.maps):
        x, grad, _ = map_eval(element_map, pts, element=e)
        worst = max(worst, float(np.max(np.abs(_residual_at(solution, e, grid.xi1, grid.xi2, x, grad)))))
    jump = interface_traction_jump(fem_stress_at(solution), model.mesh, model.maps, jump_points)
    return FemResidualReport(max_interior_residual=worst, max_traction_jump=jump, samples=grid.size * model.mesh.n_elements)


def sample_fem(solution: FemSolution, grid: SampleGrid) -> SampledFields:
    """FEM fields in the layout of the equilibrium reconstruction; residual is NaN on curved elements."""
    model = solution.model
    shape = _Shape(int(model.order))
    stress_at = fem_stress_at(solution)
    pts = np.stack([grid.xi1, grid.xi2], axis=1)
    values = shape.values(grid.xi1, grid.xi2)
    ne, m = model.mesh.n_elements, grid.size
    out = {
        "x": np.empty((ne, m, 2)),
        "jacobian": np.empty((ne, m)),
        "stress": np.empty((ne, m, 4)),
        "displacement": np.empty((ne, m, 2)),
        "rotation": np.empty((ne, m)),
        "body_force": np.zeros((ne, m, 2)),
        "residual": np.full((ne, m, 2), np.nan),
    }
    for e, element_map in enumerate(model.maps):
        x, grad, jac = map_eval(element_map, pts, element=e)
        ue = solution.displacement[model.element_dofs(e)].reshape(-1, 2)
        dn = _physical_gradients(shape, grad, grid.xi1, grid.xi2)
        grad_u = np.einsum("min,nc->mci", dn, ue)
        out["x"][e] = x
        out["jacobian"][e] = jac
        out["stress"][e] = stress_at(e, grid.xi1, grid.xi2)
        out["displacement"][e] = values @ ue
        out["rotation"][e] = 0.5 * (grad_u[:, 0, 1] - grad_u[:, 1, 0])
        if model.body_force is not None:
            out["body_force"][e] = model.body_force(x)
        if _is_affine(element_map):
            out["residual"][e] = _residual_at(solution, e, grid.xi1, grid.xi2, x, grad)
    strain = out["stress"] @ model.material.compliance
    return SampledFields(grid=grid, strain=strain, **out)


class FemService:
    def __init__(self, logger: Logger) -> None:
        self.logger = logger

    def solve(self, problem: Problem, order: int) -> FemSolution:
        try:
            solution = solve_fem(problem, order)
        except Exception as e:
            self.logger.error(f"Error solving displacement model: {e!s}")
            raise
        self.logger.info(
            "Solved displacement model",
            extra={
                "case": problem.name.value,
                "order": FemOrder(order).name,
                "dofs": solution.n_free,
                "energy": solution.energy,
                "seconds": solution.solve_time,
            },
        )
        return solution

    def residual(self, solution: FemSolution, grid: SampleGrid) -> FemResidualReport:
        return fem_equilibrium_residual(solution, grid)

    def sample(self, solution: FemSolution, grid: SampleGrid) -> SampledFields:
        return sample_fem(solution, grid)
