"""Reference-element tabulation of the stress, volume, displacement and rotation bases."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from app.mesh.entities.entity import RotationGrid
from pkg.spectral.basis import BasisSet
from pkg.spectral.quadrature import QuadratureRule, RuleKind, gauss_points

Array = npt.NDArray[np.float64]

# R sigma = sigma_12 - sigma_21
ANTISYMMETRY = np.array([0.0, -1.0, 1.0, 0.0])


def tensor_points(nodes1: Array, nodes2: Array | None = None) -> tuple[Array, Array]:
    """Flattened tensor grid, first coordinate fastest."""
    nodes2 = nodes1 if nodes2 is None else nodes2
    xi1, xi2 = np.meshgrid(nodes1, nodes2, indexing="xy")
    return xi1.ravel(), xi2.ravel()


def tensor_weights(rule: QuadratureRule) -> Array:
    return np.outer(rule.weights, rule.weights).ravel()


def stress_basis(order: int, xi1: Array, xi2: Array) -> Array:
    """Reference stress basis, shape (M, 4, 4 N (N+1)).

    Family 2m + k holds force component m across faces normal to xi_k:
    axis 0 uses h_i(xi1) e_j(xi2), axis 1 uses e_i(xi1) h_j(xi2).
    """
    gll = BasisSet.of(RuleKind.GLL, order)
    h1, h2 = gll.lagrange(xi1), gll.lagrange(xi2)
    e1, e2 = gll.edge(xi1), gll.edge(xi2)
    m_pts = h1.shape[0]
    n1 = order * (order + 1)
    normal_1 = (h1[:, None, :] * e2[:, :, None]).reshape(m_pts, n1)
    normal_2 = (e1[:, None, :] * h2[:, :, None]).reshape(m_pts, n1)

    psi = np.zeros((m_pts, 4, 4 * n1))
    for m in range(2):
        c = 2 * m
        psi[:, c, c * n1:(c + 1) * n1] = normal_1
        psi[:, c + 1, (c + 1) * n1:(c + 2) * n1] = normal_2
    return psi


def volume_basis(order: int, xi1: Array, xi2: Array) -> Array:
    """e_a(xi1) e_b(xi2), index a + N b, shape (M, N^2)."""
    gll = BasisSet.of(RuleKind.GLL, order)
    e1, e2 = gll.edge(xi1), gll.edge(xi2)
    return (e1[:, None, :] * e2[:, :, None]).reshape(e1.shape[0], order * order)


def displacement_basis(order: int, xi1: Array, xi2: Array) -> Array:
    """GL Lagrange products, index a + N b, shape (M, N^2)."""
    gl = BasisSet.of(RuleKind.GL, order)
    g1, g2 = gl.lagrange(xi1), gl.lagrange(xi2)
    return (g1[:, None, :] * g2[:, :, None]).reshape(g1.shape[0], order * order)


def rotation_basis(order: int, grid: RotationGrid, xi1: Array, xi2: Array) -> Array:
    if grid is RotationGrid.GL:
        return displacement_basis(order, xi1, xi2)
    gll = BasisSet.of(RuleKind.GLL, order)
    h1, h2 = gll.lagrange(xi1), gll.lagrange(xi2)
    n = order + 1
    return (h1[:, None, :] * h2[:, :, None]).reshape(h1.shape[0], n * n)


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """Tabulated data shared by every element of order N"""
    order: int
    xi1: Array
    xi2: Array
    weights: Array
    psi: Array
    gl_pairing: Array

    @property
    def n_points(self) -> int:
        return self.xi1.shape[0]


@lru_cache(maxsize=None)
def reference_element(order: int, points: int | None = None) -> ReferenceElement:
    """GLL (N + 1)^2 tabulation, or a ``points``^2 Gauss rule for over-integration."""
    rule = BasisSet.of(RuleKind.GLL, order).rule if points is None else gauss_points(points)
    xi1, xi2 = tensor_points(rule.nodes)
    gl = BasisSet.of(RuleKind.GL, order)
    gll = BasisSet.of(RuleKind.GLL, order)
    # Ew[a, i] = w~_a e_i(xi~_a)
    edge_at_gl = gll.edge(gl.nodes) * gl.rule.weights[:, None]
    return ReferenceElement(
        order=order,
        xi1=xi1,
        xi2=xi2,
        weights=tensor_weights(rule),
        psi=stress_basis(order, xi1, xi2),
        gl_pairing=edge_at_gl,
    )
