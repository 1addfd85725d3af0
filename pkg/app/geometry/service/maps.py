"""Element maps: affine scaling, the sine-deformed square, transfinite patches.

Whole-domain analytic maps are tiled by composing them with affine sub-maps,
so derivatives follow from the chain rule.
"""

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from app.geometry.entities.entity import Curve, ElementMap, MapKind, Points
from app.mesh.entities.entity import MeshTopology, Side
from pkg.errors.exceptions import GeometryError

CORNER_TOL = 1e-12


def _flat(xi1: npt.ArrayLike, xi2: npt.ArrayLike) -> tuple[Points, Points]:
    a = np.atleast_1d(np.asarray(xi1, dtype=np.float64)).ravel()
    b = np.atleast_1d(np.asarray(xi2, dtype=np.float64)).ravel()
    a, b = np.broadcast_arrays(a, b)
    return a, b


def _jacobian(grad: Points) -> Points:
    return grad[:, 0, 0] * grad[:, 1, 1] - grad[:, 0, 1] * grad[:, 1, 0]


class AffineMap(ElementMap):
    """Axis-aligned box [lower, upper] with constant diagonal F."""

    kind = MapKind.AFFINE

    def __init__(self, lower: Sequence[float], upper: Sequence[float]) -> None:
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        if np.any(self.upper <= self.lower):
            raise GeometryError(f"degenerate box {self.lower} .. {self.upper}")
        self.center = 0.5 * (self.lower + self.upper)
        self.half = 0.5 * (self.upper - self.lower)

    def evaluate(self, xi1: Points, xi2: Points) -> tuple[Points, Points, Points]:
        a, b = _flat(xi1, xi2)
        x = self.center[None, :] + self.half[None, :] * np.stack([a, b], axis=1)
        grad = np.zeros((a.shape[0], 2, 2))
        grad[:, 0, 0] = self.half[0]
        grad[:, 1, 1] = self.half[1]
        return x, grad, np.full(a.shape[0], self.half[0] * self.half[1])


class SineDeformedMap(ElementMap):
    """x_i = xi_i + c sin(pi xi1) sin(pi xi2) on [-1, 1]^2; the boundary is left in place."""

    kind = MapKind.SINE

    def __init__(self, c: float) -> None:
        self.c = float(c)

    def evaluate(self, xi1: Points, xi2: Points) -> tuple[Points, Points, Points]:
        a, b = _flat(xi1, xi2)
        s1, s2 = np.sin(np.pi * a), np.sin(np.pi * b)
        c1, c2 = np.cos(np.pi * a), np.cos(np.pi * b)
        bump = self.c * s1 * s2
        x = np.stack([a + bump, b + bump], axis=1)

        d1 = self.c * np.pi * c1 * s2
        d2 = self.c * np.pi * s1 * c2
        grad = np.empty((a.shape[0], 2, 2))
        grad[:, 0, 0] = 1.0 + d1
        grad[:, 0, 1] = d2
        grad[:, 1, 0] = d1
        grad[:, 1, 1] = 1.0 + d2
        return x, grad, _jacobian(grad)


class ComposedMap(ElementMap):
    """outer(inner(xi)) where inner selects a sub-box of the outer reference square."""

    kind = MapKind.COMPOSED

    def __init__(self, outer: ElementMap, inner: AffineMap) -> None:
        self.outer = outer
        self.inner = inner

    def evaluate(self, xi1: Points, xi2: Points) -> tuple[Points, Points, Points]:
        eta, _, _ = self.inner.evaluate(xi1, xi2)
        x, grad_outer, _ = self.outer.evaluate(eta[:, 0], eta[:, 1])
        grad = grad_outer * self.inner.half[None, None, :]
        return x, grad, _jacobian(grad)


class LineSegment(Curve):
    def __init__(self, start: Sequence[float], end: Sequence[float]) -> None:
        self.start = np.asarray(start, dtype=np.float64)
        self.end = np.asarray(end, dtype=np.float64)

    def __call__(self, t: Points) -> Points:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return self.start[None, :] + t[:, None] * (self.end - self.start)[None, :]

    def derivative(self, t: Points) -> Points:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return np.broadcast_to(self.end - self.start, (t.shape[0], 2)).copy()


class CircularArc(Curve):
    """Arc of the circle (center, radius) from angle theta0 to theta1, uniform in arc length."""

    def __init__(self, center: Sequence[float], radius: float, theta0: float, theta1: float) -> None:
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.theta0 = float(theta0)
        self.theta1 = float(theta1)

    def _angle(self, t: Points) -> Points:
        return self.theta0 + np.atleast_1d(np.asarray(t, dtype=np.float64)) * (self.theta1 - self.theta0)

    def __call__(self, t: Points) -> Points:
        th = self._angle(t)
        return self.center[None, :] + self.radius * np.stack([np.cos(th), np.sin(th)], axis=1)

    def derivative(self, t: Points) -> Points:
        th = self._angle(t)
        scale = self.radius * (self.theta1 - self.theta0)
        return scale * np.stack([-np.sin(th), np.cos(th)], axis=1)


class TransfiniteMap(ElementMap):
    """Gordon-Hall blending of four boundary curves.

    south/north run along xi1 (xi2 = -1 / +1), west/east along xi2 (xi1 = -1 / +1),
    all oriented towards increasing reference coordinate.
    """

    kind = MapKind.TRANSFINITE

    def __init__(self, south: Curve, east: Curve, north: Curve, west: Curve) -> None:
        self.south, self.east, self.north, self.west = south, east, north, west
        zero, one = np.zeros(1), np.ones(1)
        pairs = {
            "south-west": (south(zero), west(zero)),
            "south-east": (south(one), east(zero)),
            "north-west": (north(zero), west(one)),
            "north-east": (north(one), east(one)),
        }
        for name, (p, q) in pairs.items():
            gap = float(np.max(np.abs(p - q)))
            if gap > CORNER_TOL:
                raise GeometryError(f"boundary curves do not close at the {name} corner (gap {gap:.3e})")
        self.p00 = south(zero)[0]
        self.p10 = south(one)[0]
        self.p01 = north(zero)[0]
        self.p11 = north(one)[0]

    def evaluate(self, xi1: Points, xi2: Points) -> tuple[Points, Points, Points]:
        a, b = _flat(xi1, xi2)
        s = (0.5 * (a + 1.0))[:, None]
        t = (0.5 * (b + 1.0))[:, None]
        sf, nf = self.south(s[:, 0]), self.north(s[:, 0])
        wf, ef = self.west(t[:, 0]), self.east(t[:, 0])
        ds, dn = self.south.derivative(s[:, 0]), self.north.derivative(s[:, 0])
        dw, de = self.west.derivative(t[:, 0]), self.east.derivative(t[:, 0])
        p00, p10, p01, p11 = self.p00, self.p10, self.p01, self.p11

        x = (
            (1 - t) * sf + t * nf + (1 - s) * wf + s * ef
            - ((1 - s) * (1 - t) * p00 + s * (1 - t) * p10 + (1 - s) * t * p01 + s * t * p11)
        )
        dx_ds = (1 - t) * ds + t * dn - wf + ef - (-(1 - t) * p00 + (1 - t) * p10 - t * p01 + t * p11)
        dx_dt = -sf + nf + (1 - s) * dw + s * de - (-(1 - s) * p00 - s * p10 + (1 - s) * p01 + s * p11)

        grad = np.empty((a.shape[0], 2, 2))
        grad[:, :, 0] = 0.5 * dx_ds
        grad[:, :, 1] = 0.5 * dx_dt
        return x, grad, _jacobian(grad)


def transfinite_map(edge_curves: Sequence[Curve]) -> TransfiniteMap:
    """Build a Gordon-Hall map from (south, east, north, west) curves."""
    if len(edge_curves) != 4:
        raise GeometryError(f"transfinite map needs 4 boundary curves, got {len(edge_curves)}")
    south, east, north, west = edge_curves
    return TransfiniteMap(south, east, north, west)


def bilinear_map(corners: Sequence[Sequence[float]]) -> TransfiniteMap:
    """Straight-sided quadrilateral through corners ordered (-1,-1), (1,-1), (1,1), (-1,1)."""
    p00, p10, p11, p01 = (np.asarray(c, dtype=np.float64) for c in corners)
    return TransfiniteMap(
        south=LineSegment(p00, p10),
        east=LineSegment(p10, p11),
        north=LineSegment(p01, p11),
        west=LineSegment(p00, p01),
    )


def map_eval(element_map: ElementMap, xi: npt.ArrayLike, element: int | None = None) -> tuple[Points, Points, Points]:
    """Evaluate (x, F, J) at reference points xi of shape (M, 2) or (2,), rejecting J <= 0."""
    pts = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise GeometryError("reference points must lie in [-1, 1]^2")
    x, grad, jac = element_map.evaluate(pts[:, 0], pts[:, 1])
    bad = np.flatnonzero(~(jac > 0.0))
    if bad.size:
        k = int(bad[0])
        where = f" in element {element}" if element is not None else ""
        raise GeometryError(
            f"non-positive Jacobian {jac[k]:.3e}{where} at reference point ({pts[k, 0]:.6f}, {pts[k, 1]:.6f})"
        )
    return x, grad, jac


def lattice_maps(
    mesh: MeshTopology,
    global_map: ElementMap | None = None,
    lower: Sequence[float] = (-1.0, -1.0),
    upper: Sequence[float] = (1.0, 1.0),
) -> list[ElementMap]:
    """One map per element; cells tile [lower, upper], optionally pushed through ``global_map``.

    With a global map the box must be its reference square [-1, 1]^2.
    """
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    step = (hi - lo) / np.array([mesh.nx, mesh.ny])
    maps: list[ElementMap] = []
    for i, j in mesh.cells:
        box = AffineMap(lo + step * (i, j), lo + step * (i + 1, j + 1))
        maps.append(box if global_map is None else ComposedMap(global_map, box))
    return maps


def sub_box(i: int, j: int, nx: int, ny: int) -> AffineMap:
    """Affine sub-map of cell (i, j) in an nx-by-ny split of [-1, 1]^2."""
    h1, h2 = 2.0 / nx, 2.0 / ny
    return AffineMap((-1.0 + i * h1, -1.0 + j * h2), (-1.0 + (i + 1) * h1, -1.0 + (j + 1) * h2))


def face_points(side: Side, t: Points) -> tuple[Points, Points]:
    """Reference coordinates of tangential parameter t in [-1, 1] on a side."""
    t = np.asarray(t, dtype=np.float64)
    if side is Side.LEFT:
        return -np.ones_like(t), t
    if side is Side.RIGHT:
        return np.ones_like(t), t
    if side is Side.BOTTOM:
        return t, -np.ones_like(t)
    return t, np.ones_like(t)


def validate_conforming(mesh: MeshTopology, maps: Sequence[ElementMap], samples: int = 7, tol: float = 1e-10) -> None:
    """Shared interfaces must coincide point by point with matching tangential direction."""
    if len(maps) != mesh.n_elements:
        raise GeometryError(f"{len(maps)} maps for {mesh.n_elements} elements")
    t = np.linspace(-1.0, 1.0, samples)
    for face in mesh.interior_interfaces:
        if face.normal_axis == 0:
            side_minus, side_plus = Side.RIGHT, Side.LEFT
        else:
            side_minus, side_plus = Side.TOP, Side.BOTTOM
        xm = maps[face.minus].position(*face_points(side_minus, t))
        xp = maps[face.plus].position(*face_points(side_plus, t))
        gap = float(np.max(np.abs(xm - xp)))
        if gap > tol:
            raise GeometryError(
                f"interface {face.index} between elements {face.minus} and {face.plus} is not conforming (gap {gap:.3e})"
            )


def check_jacobians(maps: Sequence[ElementMap], reference_points: Points) -> None:
    for e, element_map in enumerate(maps):
        map_eval(element_map, reference_points, element=e)


