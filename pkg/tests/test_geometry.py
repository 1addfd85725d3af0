import numpy as np
import pytest

from app.geometry.service.maps import (
    AffineMap,
    CircularArc,
    ComposedMap,
    LineSegment,
    SineDeformedMap,
    TransfiniteMap,
    bilinear_map,
    lattice_maps,
    map_eval,
    sub_box,
    validate_conforming,
)
from app.geometry.service.piola import block_gradient, inverse_piola_stress, piola_stress
from app.mesh.service.topology import build_mesh
from pkg.errors.exceptions import GeometryError


def _finite_difference_gradient(element_map, xi: np.ndarray, step: float = 1e-6) -> np.ndarray:
    grad = np.empty((xi.shape[0], 2, 2))
    for k in range(2):
        shift = np.zeros(2)
        shift[k] = step
        plus = element_map.position((xi + shift)[:, 0], (xi + shift)[:, 1])
        minus = element_map.position((xi - shift)[:, 0], (xi - shift)[:, 1])
        grad[:, :, k] = (plus - minus) / (2 * step)
    return grad


@pytest.fixture
def interior_points() -> np.ndarray:
    rng = np.random.default_rng(3)
    return rng.uniform(-0.9, 0.9, size=(25, 2))


def test_affine_map() -> None:
    box = AffineMap((0.0, 1.0), (2.0, 2.0))
    x, grad, jac = map_eval(box, [[-1.0, -1.0], [1.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(x, [[0.0, 1.0], [2.0, 2.0], [1.0, 1.5]])
    np.testing.assert_allclose(grad[0], [[1.0, 0.0], [0.0, 0.5]])
    np.testing.assert_allclose(jac, 0.5)


def test_degenerate_box_rejected() -> None:
    with pytest.raises(GeometryError):
        AffineMap((0.0, 0.0), (1.0, 0.0))


def test_sine_map_keeps_boundary_in_place() -> None:
    t = np.linspace(-1.0, 1.0, 11)
    deformed = SineDeformedMap(0.2)
    for a, b in ((t, -np.ones_like(t)), (t, np.ones_like(t)), (-np.ones_like(t), t), (np.ones_like(t), t)):
        np.testing.assert_allclose(deformed.position(a, b), np.stack([a, b], axis=1), atol=1e-14)


@pytest.mark.parametrize(
    "element_map",
    [
        SineDeformedMap(0.25),
        ComposedMap(SineDeformedMap(0.15), sub_box(1, 0, 2, 2)),
        TransfiniteMap(
            south=LineSegment((0.5, 0.0), (1.0, 0.0)),
            east=CircularArc((0.0, 0.0), 1.0, 0.0, np.pi / 2),
            north=LineSegment((0.0, 0.5), (0.0, 1.0)),
            west=CircularArc((0.0, 0.0), 0.5, 0.0, np.pi / 2),
        ),
    ],
    ids=["sine", "composed", "transfinite"],
)
def test_gradient_matches_finite_differences(element_map, interior_points: np.ndarray) -> None:
    _, grad, jac = element_map.evaluate(interior_points[:, 0], interior_points[:, 1])
    np.testing.assert_allclose(grad, _finite_difference_gradient(element_map, interior_points), atol=1e-7)
    np.testing.assert_allclose(jac, np.linalg.det(grad), atol=1e-12)


def test_transfinite_map_reproduces_boundary_curves() -> None:
    arc = CircularArc((0.0, 0.0), 0.5, np.pi / 2, 0.0)
    patch = TransfiniteMap(
        south=LineSegment((0.0, 1.0), (1.0, 1.0)),
        east=LineSegment((1.0, 1.0), (0.5, 0.0)),
        north=CircularArc((0.0, 0.0), 0.5, np.pi / 2, 0.0),
        west=LineSegment((0.0, 1.0), (0.0, 0.5)),
    )
    t = np.linspace(0.0, 1.0, 9)
    np.testing.assert_allclose(patch.position(2 * t - 1, np.ones_like(t)), arc(t), atol=1e-14)


def test_transfinite_corner_mismatch() -> None:
    with pytest.raises(GeometryError, match="corner"):
        TransfiniteMap(
            south=LineSegment((0.0, 0.0), (1.0, 0.0)),
            east=LineSegment((1.0, 0.0), (1.0, 1.0)),
            north=LineSegment((0.0, 1.0), (1.0, 1.1)),
            west=LineSegment((0.0, 0.0), (0.0, 1.0)),
        )


def test_bilinear_map_corners() -> None:
    quad = bilinear_map([(0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (0.0, 1.0)])
    x = quad.position(np.array([-1.0, 1.0, 1.0, -1.0]), np.array([-1.0, -1.0, 1.0, 1.0]))
    np.testing.assert_allclose(x, [[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [0.0, 1.0]])


def test_folded_map_rejected() -> None:
    with pytest.raises(GeometryError, match="non-positive Jacobian"):
        map_eval(SineDeformedMap(0.5), [[1.0, 0.5]], element=3)


def test_reference_points_outside_square() -> None:
    with pytest.raises(GeometryError):
        map_eval(AffineMap((0.0, 0.0), (1.0, 1.0)), [[1.5, 0.0]])


def test_lattice_maps_conforming() -> None:
    mesh = build_mesh(3, 2)
    validate_conforming(mesh, lattice_maps(mesh))
    validate_conforming(mesh, lattice_maps(mesh, SineDeformedMap(0.2)))


def test_non_conforming_maps_detected() -> None:
    mesh = build_mesh(2, 1)
    maps = [AffineMap((0.0, 0.0), (1.0, 1.0)), AffineMap((1.0, 0.0), (2.0, 1.1))]
    with pytest.raises(GeometryError, match="not conforming"):
        validate_conforming(mesh, maps)
    with pytest.raises(GeometryError):
        validate_conforming(mesh, maps[:1])


def test_stress_transform_inverse(interior_points: np.ndarray) -> None:
    _, grad, jac = SineDeformedMap(0.2).evaluate(interior_points[:, 0], interior_points[:, 1])
    rng = np.random.default_rng(11)
    sigma = rng.normal(size=(interior_points.shape[0], 4))
    np.testing.assert_allclose(piola_stress(grad, jac, inverse_piola_stress(grad, jac, sigma)), sigma, atol=1e-12)


def test_stress_transform_matches_block_gradient() -> None:
    grad = np.array([[1.2, 0.3], [-0.1, 0.8]])
    jac = np.linalg.det(grad)
    s_hat = np.array([1.0, -2.0, 0.5, 3.0])
    np.testing.assert_allclose(piola_stress(grad, jac, s_hat), block_gradient(grad) @ s_hat / jac)


def test_stress_transform_requires_positive_jacobian() -> None:
    with pytest.raises(GeometryError):
        piola_stress(np.eye(2), 0.0, np.ones(4))
