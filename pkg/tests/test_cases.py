import numpy as np
import pytest

from app.assembly.entities.entity import BoundaryKind, Material
from app.cases.entities.entity import CaseId, ExactSolution, ManufacturedCase
from app.cases.service.kirsch import hoop_stress, kirsch_solution
from app.cases.service.manufactured import (
    ENERGY_EXACT,
    case_energy,
    case_patch,
    case_results_I,
    check_consistency,
    deformed_grid,
)
from app.cases.service.problems import l_shape, plate_with_hole, square_problem
from app.cases.service.registry import CaseRegistry
from app.geometry.service.maps import check_jacobians, validate_conforming
from app.postproc.entities.entity import SampleGrid
from pkg.errors.exceptions import ConfigError, DomainValueError


@pytest.mark.parametrize("factory", [case_results_I, case_energy, case_patch])
def test_closed_forms_are_consistent(factory, material: Material) -> None:
    assert check_consistency(factory(material)) < 1e-5


def test_inconsistent_case_rejected(material: Material) -> None:
    good = case_results_I(material).exact
    broken = ExactSolution(good.displacement, good.stress, body_force=lambda x: np.zeros((len(x), 2)))
    with pytest.raises(DomainValueError, match="equilibrium"):
        check_consistency(ManufacturedCase(name=CaseId.RESULTS1, exact=broken, material=material))


def test_results_I_fields(material: Material) -> None:
    exact = case_results_I(material).exact
    np.testing.assert_allclose(exact.displacement(np.array([[0.25, 0.0]])), [[1.0, 0.0]], atol=1e-15)
    x = np.random.default_rng(5).uniform(-1.0, 1.0, size=(20, 2))
    s = exact.stress(x)
    np.testing.assert_allclose(s[:, 0], s[:, 3])
    np.testing.assert_allclose(s[:, 1], s[:, 2])
    np.testing.assert_allclose(exact.rotation(x), 0.0)


def test_results_I_body_force_balances_divergence(material: Material) -> None:
    case = case_results_I(material)
    x = np.random.default_rng(11).uniform(-1.0, 1.0, size=(20, 2))
    scale = 8.0 * np.pi**2 / (1.0 - material.nu**2)
    np.testing.assert_allclose(case.exact.body_force(x), scale * case.exact.displacement(x), rtol=1e-13, atol=1e-12)
    flipped = ExactSolution(case.exact.displacement, case.exact.stress, body_force=lambda y: -case.exact.body_force(y))
    with pytest.raises(DomainValueError, match="equilibrium"):
        check_consistency(ManufacturedCase(name=CaseId.RESULTS1, exact=flipped, material=material))


def test_energy_case_vanishes_on_boundary(material: Material) -> None:
    case = case_energy(material)
    t = np.linspace(-1.0, 1.0, 21)
    ones = np.ones_like(t)
    for edge in (np.stack([t, -ones], 1), np.stack([t, ones], 1), np.stack([-ones, t], 1), np.stack([ones, t], 1)):
        np.testing.assert_allclose(case.exact.displacement(edge), 0.0, atol=1e-14)
    x = np.random.default_rng(2).uniform(-1.0, 1.0, size=(10, 2))
    particular = case.particular.evaluate(x)
    np.testing.assert_allclose(particular[:, 1], 0.0)
    np.testing.assert_allclose(particular[:, 2], 0.0)
    assert case.exact.energy == ENERGY_EXACT


def test_energy_reference_only_for_default_material() -> None:
    assert case_energy(Material(E=2.0, nu=0.3)).exact.energy is None


def test_patch_case(material: Material) -> None:
    exact = case_patch(material, load=2.0).exact
    np.testing.assert_allclose(exact.stress(np.array([[0.3, -0.4]])), [[2.0, 0.0, 0.0, 0.0]])
    np.testing.assert_allclose(exact.displacement(np.array([[1.0, 1.0]])), [[2.0, -0.6]])


@pytest.mark.parametrize("c", [-0.01, 1.0 / np.pi, 0.5])
def test_deformation_range(c: float) -> None:
    with pytest.raises(DomainValueError):
        deformed_grid(c)


def test_kirsch_solution(material: Material) -> None:
    exact = kirsch_solution(1.0, 0.5, material)
    assert hoop_stress(exact, 0.5, np.pi / 2) == pytest.approx(3.0)
    assert hoop_stress(exact, 0.5, 0.0) == pytest.approx(-1.0)
    np.testing.assert_allclose(exact.stress(np.array([[300.0, 0.0]])), [[1.0, 0.0, 0.0, 0.0]], atol=1e-5)

    theta = np.linspace(0.0, np.pi / 2, 13)
    normal = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    traction = np.einsum("kmi,ki->km", exact.stress(0.5 * normal).reshape(-1, 2, 2), normal)
    np.testing.assert_allclose(traction, 0.0, atol=1e-13)


def test_kirsch_displacement_matches_stress(material: Material) -> None:
    exact = kirsch_solution(1.0, 0.5, material)
    x = np.array([[0.7, 0.3], [0.2, 0.9], [1.0, 1.0]])
    step = 1e-5
    grad = np.empty((3, 2, 2))
    for j in range(2):
        shift = np.zeros(2)
        shift[j] = step
        grad[:, :, j] = (exact.displacement(x + shift) - exact.displacement(x - shift)) / (2 * step)
    np.testing.assert_allclose(material.stress_from_gradient(grad), exact.stress(x), atol=1e-7)


def test_plate_with_hole_geometry(material: Material) -> None:
    problem = plate_with_hole(material)
    assert problem.n_elements == 8
    validate_conforming(problem.mesh, problem.maps)
    grid = SampleGrid.gll(6)
    check_jacobians(problem.maps, np.stack([grid.xi1, grid.xi2], axis=1))
    corners = np.array([m.position(np.array([-1.0, 1.0]), np.array([-1.0, -1.0])) for m in problem.maps])
    radius = np.hypot(corners[:, 0, 0], corners[:, 0, 1])
    assert np.all(radius >= 0.5 - 1e-12)
    assert len(problem.boundary.of_kind(BoundaryKind.DISPLACEMENT)) == 4
    with pytest.raises(DomainValueError):
        plate_with_hole(material, hole_radius=1.2)


def test_l_shape_mesh(material: Material) -> None:
    assert l_shape(0.0125, material).n_elements == 1216
    problem = l_shape(0.05, material)
    assert problem.n_elements == 76
    assert problem.h == 0.05
    clamped = problem.boundary.of_kind(BoundaryKind.DISPLACEMENT)
    assert len(clamped) == 2 * 2
    for bad in (0.03, 0.0, -0.1):
        with pytest.raises(DomainValueError):
            l_shape(bad, material)


def test_square_problem_uses_straight_elements_on_request(material: Material) -> None:
    curved = square_problem(case_patch(material), 2, c=0.2)
    straight = square_problem(case_patch(material), 2, c=0.2, straight=True)
    mid = np.array([0.0]), np.array([0.0])
    assert not np.allclose(curved.maps[0].position(*mid), straight.maps[0].position(*mid))
    corner = np.array([1.0]), np.array([1.0])
    np.testing.assert_allclose(curved.maps[0].position(*corner), straight.maps[0].position(*corner))
    assert curved.h == 1.0


def test_registry(logger, material: Material) -> None:
    registry = CaseRegistry(logger, material)
    assert registry.ids() == ["results1", "energy", "plate-hole", "lshape", "patch"]
    assert registry.build("results1", mesh=(2, 3)).n_elements == 6
    assert registry.build("plate-hole").n_elements == 8
    assert registry.build("lshape", element_size=0.05).n_elements == 76
    with pytest.raises(ConfigError):
        registry.build("results1")
    with pytest.raises(ConfigError):
        registry.build("lshape")
    with pytest.raises(ConfigError):
        registry.build("cantilever", mesh=(1, 1))
    with pytest.raises(ConfigError):
        registry.manufactured("plate-hole")
