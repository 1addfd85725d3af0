from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.assembly.entities.entity import Material, ParticularStressField
from app.assembly.service.element import reference_element, tensor_points, tensor_weights
from app.geometry.entities.entity import ElementMap
from app.geometry.service.maps import map_eval
from app.geometry.service.piola import block_gradient
from app.mesh.entities.entity import DofLayout, MeshTopology
from app.mesh.service.topology import build_dof_layout
from pkg.spectral.quadrature import gauss_points

Array = npt.NDArray[np.float64]


def quadratic_energy(traction: Array, compliance: sp.spmatrix) -> float:
    """1/2 T^T H T"""
    return 0.5 * float(traction @ (compliance @ traction))


def particular_energy(
    particular: ParticularStressField,
    maps: Sequence[ElementMap],
    material: Material,
    points: int = 32,
) -> float:
    """1/2 int sigma_p^T C sigma_p with a points-by-points Gauss rule per element."""
    rule = gauss_points(points)
    xi1, xi2 = tensor_points(rule.nodes)
    weights = tensor_weights(rule)
    total = 0.0
    for e, element_map in enumerate(maps):
        x, _, jac = map_eval(element_map, np.stack([xi1, xi2], axis=1), element=e)
        sp_values = particular.evaluate(x)
        density = np.einsum("qi,ij,qj->q", sp_values, material.compliance, sp_values)
        total += 0.5 * float(np.sum(weights * jac * density))
    return total


def complementary_energy(
    traction: Array,
    mesh: MeshTopology,
    maps: Sequence[ElementMap],
    material: Material,
    order: int,
    layout: DofLayout | None = None,
    particular: ParticularStressField | None = None,
    energy_points: int = 32,
) -> float:
    """U_C = 1/2 int sigma^T C sigma with Piola-mapped stresses.

    Every term uses an ``energy_points``-square Gauss rule per element, so the
    value is the integral of the reconstructed field and not the GLL quadratic
    form. With a particular field sigma = sigma_h + sigma_p.
    """
    layout = build_dof_layout(mesh, order) if layout is None else layout
    ref = reference_element(order, energy_points)
    pts = np.stack([ref.xi1, ref.xi2], axis=1)
    compliance = material.compliance
    homogeneous = 0.0
    cross = 0.0
    for e, element_map in enumerate(maps):
        x, grad, jac = map_eval(element_map, pts, element=e)
        # J sigma_h
        scaled = np.einsum("qij,qjk,k->qi", block_gradient(grad), ref.psi, traction[layout.traction_map[e]])
        homogeneous += 0.5 * float(np.sum(ref.weights / jac * np.einsum("qi,ij,qj->q", scaled, compliance, scaled)))
        if particular is not None:
            cross += float(np.sum(ref.weights * np.einsum("qi,ij,qj->q", scaled, compliance, particular.evaluate(x))))
    if particular is None:
        return homogeneous
    return homogeneous + cross + particular_energy(particular, maps, material, energy_points)
