"""Nodal Lagrange and edge polynomial bases on a quadrature grid.

Edge polynomials follow ``e_i = -sum_{k<i} h_k'`` so that the integral of
``e_i`` over the k-th inter-node segment is the Kronecker delta.
"""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from pkg.errors.exceptions import DomainValueError
from pkg.spectral.quadrature import QuadratureRule, RuleKind, compute_rule

_NODE_SNAP = 1e-14


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Lagrange basis h_i through the nodes of ``rule`` and its edge basis e_i."""

    rule: QuadratureRule
    bary_weights: npt.NDArray[np.float64] = field(init=False, repr=False)
    diff_matrix: npt.NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        x = self.rule.nodes
        gaps = x[:, None] - x[None, :]
        np.fill_diagonal(gaps, 1.0)
        lam = 1.0 / np.prod(gaps, axis=1)

        # D[k, i] = h_i'(x_k)
        d = (lam[None, :] / lam[:, None]) / gaps
        np.fill_diagonal(d, 0.0)
        np.fill_diagonal(d, -d.sum(axis=1))

        lam.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "bary_weights", lam)
        object.__setattr__(self, "diff_matrix", d)

    @classmethod
    def of(cls, kind: RuleKind | str, order: int) -> "BasisSet":
        return _basis_cache(RuleKind(kind), order)

    @property
    def nodes(self) -> npt.NDArray[np.float64]:
        return self.rule.nodes

    @property
    def n_nodes(self) -> int:
        return self.rule.size

    @property
    def n_edges(self) -> int:
        return self.rule.size - 1

    def lagrange(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Values h_i(xi), shape (len(xi), n_nodes)."""
        xi = _as_points(xi)
        x, lam = self.nodes, self.bary_weights
        diff = xi[:, None] - x[None, :]
        hit = np.abs(diff) < _NODE_SNAP
        on_node = hit.any(axis=1)

        safe = np.where(hit, 1.0, diff)
        terms = lam[None, :] / safe
        values = terms / terms.sum(axis=1, keepdims=True)
        values[on_node] = hit[on_node].astype(np.float64)
        return values

    def lagrange_derivative(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Derivatives h_i'(xi), shape (len(xi), n_nodes)."""
        xi = _as_points(xi)
        x, lam = self.nodes, self.bary_weights
        diff = xi[:, None] - x[None, :]
        hit = np.abs(diff) < _NODE_SNAP
        on_node = hit.any(axis=1)

        safe = np.where(hit, 1.0, diff)
        terms = lam[None, :] / safe
        denom = terms.sum(axis=1, keepdims=True)
        values = terms / denom
        # Schneider-Werner: p'(x) = sum_j terms_j (p(x) - p_j) / (x - x_j) / sum_j terms_j
        n = self.n_nodes
        eye = np.eye(n)
        numer = np.einsum("mj,mji->mi", terms / safe, values[:, None, :] - eye[None, :, :])
        derivs = numer / denom

        if on_node.any():
            node_idx = np.argmax(hit[on_node], axis=1)
            derivs[on_node] = self.diff_matrix[node_idx]
        return derivs

    def lagrange_second_derivative(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Second derivatives h_i''(xi); h_i' is interpolated exactly by its nodal values."""
        return self.lagrange_derivative(xi) @ self.diff_matrix

    def edge(self, xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Edge polynomials e_1..e_N at xi, shape (len(xi), n_edges)."""
        derivs = self.lagrange_derivative(xi)
        return -np.cumsum(derivs[:, :-1], axis=1)


def _as_points(xi: npt.ArrayLike) -> npt.NDArray[np.float64]:
    pts = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    if pts.ndim != 1:
        raise DomainValueError(f"expected a flat array of reference points, got shape {pts.shape}")
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise DomainValueError("reference points must lie in [-1, 1]")
    return pts


_BASES: dict[tuple[RuleKind, int], BasisSet] = {}


def _basis_cache(kind: RuleKind, order: int) -> BasisSet:
    key = (kind, order)
    if key not in _BASES:
        _BASES[key] = BasisSet(compute_rule(kind, order))
    return _BASES[key]


def lagrange_eval(basis: BasisSet, i: int, xi: float) -> tuple[float, float]:
    """Value and first derivative of h_i at xi."""
    if not 0 <= i < basis.n_nodes:
        raise DomainValueError(f"Lagrange index {i} outside 0..{basis.n_nodes - 1}")
    value = basis.lagrange(xi)[0, i]
    derivative = basis.lagrange_derivative(xi)[0, i]
    return float(value), float(derivative)


def edge_eval(basis: BasisSet, i: int, xi: float) -> float:
    """Value of the edge polynomial e_i (1-based, as in the segment numbering) at xi."""
    if not 1 <= i <= basis.n_edges:
        raise DomainValueError(f"edge index {i} outside 1..{basis.n_edges}")
    return float(basis.edge(xi)[0, i - 1])


def derivative_to_edge(nodal_coeffs: npt.ArrayLike, basis: BasisSet | None = None) -> npt.NDArray[np.float64]:
    """First differences phi_i - phi_{i-1}: the edge coefficients of the interpolant's derivative."""
    phi = np.asarray(nodal_coeffs, dtype=np.float64)
    if phi.ndim != 1 or phi.shape[0] < 2:
        raise DomainValueError("need at least two nodal coefficients")
    if basis is not None and phi.shape[0] != basis.n_nodes:
        raise DomainValueError(f"expected {basis.n_nodes} nodal coefficients, got {phi.shape[0]}")
    return np.diff(phi)
