import numpy as np
import pytest

from app.assembly.entities.entity import BoundarySpec, Material, loaded
from app.baseline_fem.entities.entity import FemOrder
from app.baseline_fem.service.fem_service import (
    FemService,
    assemble_stiffness,
    build_fem_model,
    dirichlet_values,
    fem_equilibrium_residual,
    rigid_body_modes,
    sample_fem,
    solve_fem,
)
from app.cases.entities.entity import CaseId, Problem
from app.cases.service.manufactured import case_patch, case_results_I
from app.cases.service.problems import square_problem
from app.geometry.service.maps import lattice_maps
from app.mesh.service.topology import build_mesh
from app.postproc.entities.entity import SampleGrid
from app.postproc.service.errors import error_norms
from pkg.errors.exceptions import DomainValueError, SolverError


@pytest.mark.parametrize("order", [FemOrder.Q4, FemOrder.Q9])
def test_unconstrained_stiffness_has_three_rigid_modes(material: Material, order: FemOrder) -> None:
    problem = square_problem(case_patch(material), 2, 3)
    model = build_fem_model(problem, order)
    stiffness, _ = assemble_stiffness(model)
    assert rigid_body_modes(stiffness) == 3
    np.testing.assert_allclose(stiffness.toarray(), stiffness.toarray().T, atol=1e-13)


def test_shared_nodes(material: Material) -> None:
    problem = square_problem(case_patch(material), 2, 2)
    assert build_fem_model(problem, 1).n_nodes == 9
    model = build_fem_model(problem, 2)
    assert model.n_nodes == 25
    assert model.n_dofs == 50
    dofs, _ = dirichlet_values(model)
    assert dofs.size == 2 * 16


@pytest.mark.parametrize(("order", "c"), [(1, 0.0), (2, 0.0), (1, 0.15)])
def test_patch_test(material: Material, order: int, c: float) -> None:
    problem = square_problem(case_patch(material), 3, c=c, straight=True)
    solution = solve_fem(problem, order)
    exact = problem.exact.displacement(solution.model.coordinates)
    np.testing.assert_allclose(solution.displacement.reshape(-1, 2), exact, atol=1e-12)
    fields = sample_fem(solution, SampleGrid.equispaced(4))
    errors = error_norms(fields, problem.exact, order, problem.h).errors
    assert max(errors.values()) < 1e-11
    # 1/2 int sigma : eps over the area 4
    assert solution.energy == pytest.approx(2.0, rel=1e-12)


def test_patch_residual_vanishes(fem_service: FemService, material: Material) -> None:
    problem = square_problem(case_patch(material), 2)
    solution = fem_service.solve(problem, 2)
    report = fem_service.residual(solution, SampleGrid.equispaced(5))
    assert report.max_interior_residual < 1e-10
    assert report.max_traction_jump < 1e-10
    assert report.samples == 4 * 25


def test_smooth_solution_leaves_residual_and_jumps(fem_service: FemService, material: Material) -> None:
    problem = square_problem(case_results_I(material), 4)
    solution = fem_service.solve(problem, 1)
    report = fem_service.residual(solution, SampleGrid.equispaced(5))
    assert report.max_interior_residual > 1e-3
    assert report.max_traction_jump > 1e-3


def test_curved_elements_have_no_pointwise_residual(material: Material) -> None:
    problem = square_problem(case_patch(material), 2, c=0.1)
    solution = solve_fem(problem, 1)
    with pytest.raises(DomainValueError):
        fem_equilibrium_residual(solution, SampleGrid.equispaced(3))
    assert np.all(np.isnan(sample_fem(solution, SampleGrid.equispaced(3)).residual))


def test_bilinear_elements_converge_at_second_order(material: Material) -> None:
    errors = []
    for n in (8, 16):
        problem = square_problem(case_results_I(material), n)
        fields = sample_fem(solve_fem(problem, 1), SampleGrid.equispaced(5))
        errors.append(error_norms(fields, problem.exact, 1, problem.h).errors["u1"])
    assert errors[0] / errors[1] > 3.0


def test_displacement_model_needs_supports(material: Material) -> None:
    mesh = build_mesh(1, 1)
    free = loaded()
    problem = Problem(
        name=CaseId.PATCH,
        mesh=mesh,
        maps=lattice_maps(mesh),
        material=material,
        boundary=BoundarySpec.from_rule(mesh, lambda e, side, cell: (free, free)),
    )
    with pytest.raises(SolverError):
        solve_fem(problem, 1)
