import numpy as np
import pytest
from pydantic import ValidationError

from app.assembly.entities.entity import Material
from app.assembly.service.operators import assemble_H, subcell_rule
from app.assembly.service.saddle import build_saddle_system
from app.cases.service.manufactured import ENERGY_EXACT, case_energy, case_patch, case_results_I
from app.cases.service.problems import square_problem
from app.geometry.service.piola import inverse_piola_stress
from app.mesh.entities.entity import traction_local_index
from app.postproc.entities.entity import ErrorReport, SampleGrid
from app.postproc.service.energy import complementary_energy, quadratic_energy
from app.postproc.service.errors import convergence_rate, error_norms, fit_convergence
from app.postproc.service.reconstruction import (
    FieldSampler,
    body_force_integrals,
    equilibrium_residual_field,
    interface_traction_jump,
    stress_asymmetry,
)
from app.runner.service.equilibrium_service import EquilibriumService
from app.solver.service.solver_service import SolverService
from pkg.errors.exceptions import ConvergenceRateError
from pkg.spectral.basis import BasisSet
from pkg.spectral.quadrature import RuleKind


@pytest.fixture
def solved_results_I(solver_service: SolverService, material: Material):
    problem = square_problem(case_results_I(material), 2, c=0.1)
    order = 4
    system = build_saddle_system(
        problem.mesh, problem.maps, problem.material, order, "GL", problem.boundary, f=problem.body_force
    )
    return problem, order, system, solver_service.solve(system)


def test_rate_fit_recovers_slope() -> None:
    h = np.array([0.5, 0.25, 0.125, 0.0625])
    fit = fit_convergence(h, 3.0 * h**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert fit.points_used == 4


def test_rate_fit_drops_round_off_points() -> None:
    h = [0.5, 0.25, 0.125, 0.0625]
    errors = [1e-2, 1e-4, 1e-6, 1e-14]
    fit = fit_convergence(h, errors)
    assert fit.points_used == 3
    assert convergence_rate(h, errors) == pytest.approx(np.log(100.0) / np.log(2.0))


def test_rate_fit_needs_enough_points() -> None:
    with pytest.raises(ConvergenceRateError):
        fit_convergence([0.5, 0.25, 0.125], [1e-3, 1e-13, 1e-14])
    with pytest.raises(ConvergenceRateError):
        fit_convergence([0.5, 0.25], [1e-3, 1e-4, 1e-5])


def test_error_report_rejects_invalid_values() -> None:
    with pytest.raises(ValidationError):
        ErrorReport(errors={"u1": float("nan")}, order=2)
    with pytest.raises(ValidationError):
        ErrorReport(errors={"u1": -1.0}, order=2)
    with pytest.raises(ValidationError):
        ErrorReport(errors={"u1": 1.0}, order=0)


def test_sample_grids() -> None:
    assert SampleGrid.equispaced(5).size == 25
    grid = SampleGrid.gll(3)
    assert grid.size == 16
    assert grid.label == "gll-3"


def test_energy_matches_quadratic_form(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    energy = complementary_energy(report.traction, problem.mesh, problem.maps, problem.material, order, system.layout)
    fine = assemble_H(problem.mesh, problem.maps, problem.material, order, system.layout, points=32)
    assert energy > 0.0
    assert energy == pytest.approx(quadratic_energy(report.traction, fine), rel=1e-11)


def test_energy_is_not_the_lobatto_quadratic_form(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    energy = complementary_energy(report.traction, problem.mesh, problem.maps, problem.material, order, system.layout)
    assert abs(energy - quadratic_energy(report.traction, system.compliance)) > 1e-6 * energy


@pytest.mark.parametrize(("n_elements", "expected"), [(1, 82.363976), (2, 58.843215)])
def test_energy_case_matches_reference_table(
    equilibrium_service: EquilibriumService, material: Material, n_elements: int, expected: float
) -> None:
    problem = square_problem(case_energy(material), n_elements)
    result, _ = equilibrium_service.run_point(problem, 5, "GL", samples=3)
    assert result.energy == pytest.approx(expected, rel=1e-6)
    assert result.energy >= ENERGY_EXACT - 1e-6


def test_body_force_is_reproduced(solved_results_I) -> None:
    problem, order, system, _ = solved_results_I
    integrals = body_force_integrals(system.body_force, problem.mesh, problem.maps, order)
    np.testing.assert_allclose(integrals, system.body_force, atol=1e-12 * np.max(np.abs(system.body_force)))


def test_tractions_are_continuous_across_interfaces(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    sampler = FieldSampler(problem.mesh, problem.maps, order, "GL", problem.material, system.layout)
    jump = interface_traction_jump(sampler.stress_at(report.traction), problem.mesh, problem.maps)
    assert jump < 1e-11 * max(1.0, float(np.max(np.abs(report.traction))))


def test_residual_field_is_round_off(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    residual = equilibrium_residual_field(
        report.traction, system.body_force, problem.mesh, problem.maps, order, SampleGrid.equispaced(9), system.incidence
    )
    assert residual.shape == (2,)
    assert np.max(residual) < 1e-9


def test_sampled_fields_and_errors(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    sampler = FieldSampler(problem.mesh, problem.maps, order, "GL", problem.material, system.layout)
    fields = sampler.sample(report, system.body_force, SampleGrid.equispaced(6))
    assert fields.stress.shape == (4, 36, 4)
    assert fields.flat("displacement").shape == (144, 2)
    np.testing.assert_allclose(fields.strain, fields.stress @ problem.material.compliance)
    np.testing.assert_allclose(fields.residual, 0.0, atol=1e-9)

    errors = error_norms(fields, problem.exact, order, problem.h)
    assert set(errors.errors) == {"u1", "u2", "s11", "s21", "s12", "s22", "omega"}
    assert errors.h == pytest.approx(1.0)
    amplitude = np.max(np.abs(problem.exact.stress(fields.flat("x"))))
    # one wavelength per element at N = 4 is only coarsely resolved
    assert max(errors.errors[name] for name in ("s11", "s21", "s12", "s22")) < 0.5 * amplitude
    assert max(errors.errors["u1"], errors.errors["u2"]) < 0.5


def test_uniform_stress_has_no_asymmetry(solver_service: SolverService, material: Material) -> None:
    problem = square_problem(case_patch(material), 2)
    system = build_saddle_system(problem.mesh, problem.maps, material, 2, "GL", problem.boundary)
    report = solver_service.solve(system)
    sampler = FieldSampler(problem.mesh, problem.maps, 2, "GL", material, system.layout)
    fields = sampler.sample(report, system.body_force, SampleGrid.equispaced(5))
    assert stress_asymmetry(fields) < 1e-12
    errors = error_norms(fields, problem.exact, 2, problem.h).errors
    assert max(errors.values()) < 1e-10


def test_reconstructed_stress_integrates_back_to_traction_dofs(solved_results_I) -> None:
    problem, order, system, report = solved_results_I
    sampler = FieldSampler(problem.mesh, problem.maps, order, "GL", problem.material, system.layout)
    stress_at = sampler.stress_at(report.traction)
    gll = BasisSet.of(RuleKind.GLL, order).nodes
    nodes, weights = subcell_rule(order, 10)
    element = 3
    element_map = problem.maps[element]
    for i in (0, 2, order):
        xi1 = np.full(nodes.size, gll[i])
        xi2 = nodes.ravel()
        _, grad, jac = element_map.evaluate(xi1, xi2)
        s_hat = inverse_piola_stress(grad, jac, stress_at(element, xi1, xi2))
        for m in (0, 1):
            integrals = np.einsum("tp,tp->t", s_hat[:, 2 * m].reshape(order, -1), weights)
            dofs = [traction_local_index(order, 0, m, i, t) for t in range(order)]
            expected = report.traction[system.layout.traction_map[element, dofs]]
            np.testing.assert_allclose(integrals, expected, atol=1e-11 * max(1.0, np.max(np.abs(expected))))
