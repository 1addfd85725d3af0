"""Closed-form test solutions on [-1, 1]^2 and their consistency check."""

import numpy as np
import numpy.typing as npt

from app.assembly.entities.entity import Material, ParticularStressField
from app.cases.entities.entity import CaseId, ExactSolution, ManufacturedCase
from app.geometry.service.maps import SineDeformedMap
from pkg.errors.exceptions import DomainValueError

Array = npt.NDArray[np.float64]

TWO_PI = 2.0 * np.pi
ENERGY_EXACT = 58.566883


def _xy(x: Array) -> tuple[Array, Array]:
    x = np.atleast_2d(x)
    return x[:, 0], x[:, 1]


def _symmetric(s11: Array, s22: Array, s12: Array) -> Array:
    return np.stack([s11, s12, s12, s22], axis=-1)


def case_results_I(material: Material | None = None) -> ManufacturedCase:
    """u = (sin 2pi x cos 2pi y, cos 2pi x sin 2pi y) with displacement conditions everywhere.

    f = 8 E pi^2 u / (1 - nu^2), the sign that satisfies div(sigma) + f = 0; written
    for div(sigma) = f the same load appears with a minus sign.
    """
    material = material or Material()
    E, nu = material.E, material.nu

    def displacement(x: Array) -> Array:
        x1, x2 = _xy(x)
        return np.stack(
            [np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2), np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2)], axis=-1
        )

    def stress(x: Array) -> Array:
        x1, x2 = _xy(x)
        normal = 2.0 * E * np.pi * np.cos(TWO_PI * x1) * np.cos(TWO_PI * x2) / (1.0 - nu)
        shear = -2.0 * E * np.pi * np.sin(TWO_PI * x1) * np.sin(TWO_PI * x2) / (1.0 + nu)
        return _symmetric(normal, normal, shear)

    def body_force(x: Array) -> Array:
        # f = -div(sigma)
        x1, x2 = _xy(x)
        scale = 8.0 * E * np.pi**2 / (1.0 - nu**2)
        return scale * np.stack(
            [np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2), np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2)], axis=-1
        )

    def rotation(x: Array) -> Array:
        return np.zeros(np.atleast_2d(x).shape[0])

    exact = ExactSolution(displacement, stress, body_force, rotation)
    return ManufacturedCase(name=CaseId.RESULTS1, exact=exact, material=material)


def case_energy(material: Material | None = None) -> ManufacturedCase:
    """u_1 = u_2 = sin 2pi x sin 2pi y, zero on the boundary, with a particular stress field."""
    material = material or Material()
    E, nu = material.E, material.nu

    def displacement(x: Array) -> Array:
        x1, x2 = _xy(x)
        u = np.sin(TWO_PI * x1) * np.sin(TWO_PI * x2)
        return np.stack([u, u], axis=-1)

    def stress(x: Array) -> Array:
        x1, x2 = _xy(x)
        cs = np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2)
        sc = np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2)
        s11 = 2.0 * E * np.pi * (cs + nu * sc) / (1.0 - nu**2)
        s22 = 2.0 * E * np.pi * (sc + nu * cs) / (1.0 - nu**2)
        s12 = E * np.pi * (cs + sc) / (1.0 + nu)
        return _symmetric(s11, s22, s12)

    def body_force(x: Array) -> Array:
        x1, x2 = _xy(x)
        cc = np.cos(TWO_PI * x1) * np.cos(TWO_PI * x2)
        ss = np.sin(TWO_PI * x1) * np.sin(TWO_PI * x2)
        f = -2.0 * E * np.pi**2 * ((nu + 1.0) * cc + (nu - 3.0) * ss) / (1.0 - nu**2)
        return np.stack([f, f], axis=-1)

    def rotation(x: Array) -> Array:
        x1, x2 = _xy(x)
        return np.pi * (np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2) - np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2))

    def particular_11(x: Array) -> Array:
        x1, x2 = _xy(x)
        return (
            E * np.pi
            * ((nu + 1.0) * np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2) - (nu - 3.0) * np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2))
            / (1.0 - nu**2)
        )

    def particular_22(x: Array) -> Array:
        x1, x2 = _xy(x)
        return (
            E * np.pi
            * ((nu + 1.0) * np.cos(TWO_PI * x1) * np.sin(TWO_PI * x2) - (nu - 3.0) * np.sin(TWO_PI * x1) * np.cos(TWO_PI * x2))
            / (1.0 - nu**2)
        )

    def particular_12(x: Array) -> Array:
        return np.zeros(np.atleast_2d(x).shape[0])

    # the reference value holds for E = 1, nu = 0.3 only
    energy = ENERGY_EXACT if (E, nu) == (1.0, 0.3) else None
    exact = ExactSolution(displacement, stress, body_force, rotation, energy=energy)
    particular = ParticularStressField(particular_11, particular_22, particular_12)
    return ManufacturedCase(name=CaseId.ENERGY, exact=exact, material=material, particular=particular)


def case_patch(material: Material | None = None, load: float = 1.0) -> ManufacturedCase:
    """Uniform uniaxial tension s11 = load with the matching linear displacement."""
    material = material or Material()
    E, nu = material.E, material.nu

    def displacement(x: Array) -> Array:
        x1, x2 = _xy(x)
        return np.stack([load * x1 / E, -nu * load * x2 / E], axis=-1)

    def stress(x: Array) -> Array:
        x1, _ = _xy(x)
        zero = np.zeros_like(x1)
        return _symmetric(np.full_like(x1, load), zero, zero)

    def body_force(x: Array) -> Array:
        return np.zeros((np.atleast_2d(x).shape[0], 2))

    def rotation(x: Array) -> Array:
        return np.zeros(np.atleast_2d(x).shape[0])

    exact = ExactSolution(displacement, stress, body_force, rotation)
    return ManufacturedCase(name=CaseId.PATCH, exact=exact, material=material)


def deformed_grid(c: float) -> SineDeformedMap:
    """Global map x = xi + c sin(pi xi1) sin(pi xi2) (1, 1)."""
    if not 0.0 <= c < 1.0 / np.pi:
        raise DomainValueError(f"deformation parameter c={c} must lie in [0, 1/pi)")
    return SineDeformedMap(c)


def _divergence(field, x: Array, step: float) -> Array:
    """Fourth-order central differences of a four-vector stress field, div_m = sum_i d s[2m+i] / dx_i."""
    div = np.zeros((x.shape[0], 2))
    for i in range(2):
        shift = np.zeros(2)
        shift[i] = step
        d = (
            -field(x + 2 * shift) + 8.0 * field(x + shift) - 8.0 * field(x - shift) + field(x - 2 * shift)
        ) / (12.0 * step)
        for m in range(2):
            div[:, m] += d[:, 2 * m + i]
    return div


def _gradient(field, x: Array, step: float) -> Array:
    grad = np.zeros((x.shape[0], 2, 2))
    for j in range(2):
        shift = np.zeros(2)
        shift[j] = step
        d = (-field(x + 2 * shift) + 8.0 * field(x + shift) - 8.0 * field(x - shift) + field(x - 2 * shift)) / (
            12.0 * step
        )
        grad[:, :, j] = d
    return grad


def check_consistency(case: ManufacturedCase, points: int = 200, tol: float = 1e-6, seed: int = 7) -> float:
    """Verify div(sigma) + f = 0, sigma = stress(grad u) and div(sigma_p) + f = 0 at random points.

    Returns the largest defect; raises DomainValueError above ``tol`` times the field scale.
    """
    rng = np.random.default_rng(seed)
    lo = np.asarray(case.lower) + 0.01
    hi = np.asarray(case.upper) - 0.01
    x = lo + (hi - lo) * rng.random((points, 2))
    step = 1e-3
    exact = case.exact
    sigma = exact.stress(x)
    f = exact.body_force(x) if exact.body_force is not None else np.zeros((points, 2))
    scale = max(1.0, float(np.max(np.abs(sigma))), float(np.max(np.abs(f))))

    defects = {
        "equilibrium": _divergence(exact.stress, x, step) + f,
        "constitutive": case.material.stress_from_gradient(_gradient(exact.displacement, x, step)) - sigma,
    }
    if case.particular is not None:
        defects["particular"] = _divergence(case.particular.evaluate, x, step) + f
    worst = 0.0
    for name, defect in defects.items():
        value = float(np.max(np.abs(defect)))
        if value > tol * scale:
            raise DomainValueError(f"case {case.name.value} fails the {name} check (defect {value:.3e})")
        worst = max(worst, value)
    return worst
