"""Gauss-Lobatto-Legendre (primal) and Gauss-Legendre (dual) rules on [-1, 1]."""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from pkg.errors.exceptions import DomainValueError

MAX_ORDER = 20
NEWTON_TOL = 1e-15
NEWTON_MAX_ITER = 100


class RuleKind(str, Enum):
    GLL = "GLL"
    GL = "GL"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a GLL or GL rule of order ``order``.

    GLL of order N has N + 1 nodes including both endpoints, GL of order N has
    N interior nodes. Both integrate polynomials of degree 2N - 1 exactly.
    """

    kind: RuleKind
    order: int
    nodes: npt.NDArray[np.float64]
    weights: npt.NDArray[np.float64]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values: npt.ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))

    def mapped(self, a: float, b: float) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Nodes and weights transplanted affinely onto [a, b]."""
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights


def legendre_table(n: int, x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Legendre polynomials P_0..P_n at ``x`` via the three-term recurrence.

    Returns
    -------
    array of shape (len(x), n + 1)
    """
    x = np.asarray(x, dtype=np.float64)
    table = np.zeros((x.shape[0], n + 1))
    table[:, 0] = 1.0
    if n >= 1:
        table[:, 1] = x
    for k in range(2, n + 1):
        table[:, k] = ((2 * k - 1) * x * table[:, k - 1] - (k - 1) * table[:, k - 2]) / k
    return table


def _gll(n: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    # Chebyshev-Gauss-Lobatto initial guess, Newton on (1 - x^2) P_n'(x)
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    for _ in range(NEWTON_MAX_ITER):
        table = legendre_table(n, x)
        x_old = x
        x = x_old - (x_old * table[:, n] - table[:, n - 1]) / ((n + 1) * table[:, n])
        if np.max(np.abs(x - x_old)) <= NEWTON_TOL:
            break
    table = legendre_table(n, x)
    weights = 2.0 / (n * (n + 1) * table[:, n] ** 2)
    x[0], x[-1] = -1.0, 1.0
    return x, weights


def _gl(n: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    # Chebyshev-like initial guess, Newton on P_n(x)
    i = np.arange(1, n + 1)
    x = -np.cos(np.pi * (4 * i - 1) / (4 * n + 2))
    for _ in range(NEWTON_MAX_ITER):
        p, dp = _legendre_with_derivative(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOL:
            break
    _, dp = _legendre_with_derivative(n, x)
    weights = 2.0 / ((1.0 - x**2) * dp**2)
    return x, weights


def _legendre_with_derivative(n: int, x: npt.NDArray[np.float64]) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    table = legendre_table(n, x)
    p = table[:, n]
    # valid in the open interval, GL nodes never reach the endpoints
    dp = n * (x * p - table[:, n - 1]) / (x**2 - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def compute_rule(kind: RuleKind | str, order: int) -> QuadratureRule:
    """Build the GLL or GL rule of the given order.

    Parameters
    ----------
    kind : RuleKind or str
        ``"GLL"`` for the N + 1 Lobatto nodes, ``"GL"`` for the N Gauss nodes.
    order : int
        Polynomial order N, 1 <= N <= 20.

    Returns
    -------
    QuadratureRule
        Immutable rule with strictly increasing nodes.
    """
    kind = RuleKind(kind)
    if int(order) != order or order < 1:
        raise DomainValueError(f"quadrature order must be a positive integer, got {order!r}")
    if order > MAX_ORDER:
        raise DomainValueError(f"quadrature order {order} exceeds the supported maximum {MAX_ORDER}")

    if kind is RuleKind.GLL:
        nodes, weights = _gll(order)
    elif order == 1:
        nodes, weights = np.zeros(1), np.full(1, 2.0)
    else:
        nodes, weights = _gl(order)

    order_idx = np.argsort(nodes)
    nodes = np.ascontiguousarray(nodes[order_idx])
    weights = np.ascontiguousarray(weights[order_idx])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(kind=kind, order=int(order), nodes=nodes, weights=weights)


def gauss_points(count: int) -> QuadratureRule:
    """Plain Gauss-Legendre rule with ``count`` points (over-integration helper)."""
    if count <= MAX_ORDER:
        return compute_rule(RuleKind.GL, count)
    nodes, weights = np.polynomial.legendre.leggauss(count)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(kind=RuleKind.GL, order=count, nodes=nodes, weights=weights)
