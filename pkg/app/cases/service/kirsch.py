"""Infinite plate with a circular hole under uniaxial tension along x1 (plane stress)."""

import numpy as np
import numpy.typing as npt

from app.assembly.entities.entity import Material
from app.cases.entities.entity import ExactSolution
from pkg.errors.exceptions import DomainValueError

Array = npt.NDArray[np.float64]


def _polar(x: Array) -> tuple[Array, Array]:
    x = np.atleast_2d(x)
    return np.hypot(x[:, 0], x[:, 1]), np.arctan2(x[:, 1], x[:, 0])


def kirsch_solution(far_field_load: float = 1.0, hole_radius: float = 0.5, material: Material | None = None) -> ExactSolution:
    """Cartesian stress and displacement of the Kirsch field centred at the origin.

    Valid for r >= hole_radius; the rotation is that of the displacement field.
    """
    if hole_radius <= 0.0:
        raise DomainValueError(f"hole radius must be positive, got {hole_radius}")
    material = material or Material()
    load, a = float(far_field_load), float(hole_radius)
    mu = material.E / (2.0 * (1.0 + material.nu))
    kappa = (3.0 - material.nu) / (1.0 + material.nu)

    def stress(x: Array) -> Array:
        r, th = _polar(x)
        q2 = (a / r) ** 2
        q4 = q2**2
        c2, c4 = np.cos(2 * th), np.cos(4 * th)
        s2, s4 = np.sin(2 * th), np.sin(4 * th)
        sxx = load * (1.0 - q2 * (1.5 * c2 + c4) + 1.5 * q4 * c4)
        syy = load * (-q2 * (0.5 * c2 - c4) - 1.5 * q4 * c4)
        sxy = load * (-q2 * (0.5 * s2 + s4) + 1.5 * q4 * s4)
        return np.stack([sxx, sxy, sxy, syy], axis=-1)

    def displacement(x: Array) -> Array:
        r, th = _polar(x)
        scale = load * a / (8.0 * mu)
        ux = scale * (
            (r / a) * (kappa + 1.0) * np.cos(th)
            + 2.0 * (a / r) * ((1.0 + kappa) * np.cos(th) + np.cos(3 * th))
            - 2.0 * (a / r) ** 3 * np.cos(3 * th)
        )
        uy = scale * (
            (r / a) * (kappa - 3.0) * np.sin(th)
            + 2.0 * (a / r) * ((1.0 - kappa) * np.sin(th) + np.sin(3 * th))
            - 2.0 * (a / r) ** 3 * np.sin(3 * th)
        )
        return np.stack([ux, uy], axis=-1)

    def rotation(x: Array) -> Array:
        # 1/2 (du1/dx2 - du2/dx1) by central differences of the closed form
        x = np.atleast_2d(x)
        step = 1e-6 * max(a, 1.0)
        ex = np.array([step, 0.0])
        ey = np.array([0.0, step])
        du1_dy = (displacement(x + ey)[:, 0] - displacement(x - ey)[:, 0]) / (2 * step)
        du2_dx = (displacement(x + ex)[:, 1] - displacement(x - ex)[:, 1]) / (2 * step)
        return 0.5 * (du1_dy - du2_dx)

    def body_force(x: Array) -> Array:
        return np.zeros((np.atleast_2d(x).shape[0], 2))

    return ExactSolution(displacement=displacement, stress=stress, body_force=body_force, rotation=rotation)


def hoop_stress(solution: ExactSolution, r: float, theta: float) -> float:
    """sigma_theta_theta at polar position (r, theta)."""
    x = np.array([[r * np.cos(theta), r * np.sin(theta)]])
    s = solution.stress(x)[0]
    c, sn = np.cos(theta), np.sin(theta)
    return float(s[0] * sn**2 - 2.0 * s[1] * sn * c + s[3] * c**2)
