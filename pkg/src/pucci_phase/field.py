"""Vector fields of the quadratic systems, region labels and Dulac weight."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import ProblemParams, check_p

TAU_LINE = 1e-12


class OutsideDomain(ValueError):
    """Point in the open second or fourth quadrant."""


class OnInterface(ValueError):
    """Point on the concavity line where a one-sided formula is required."""


class OpenCurve(ValueError):
    pass


class SelfIntersection(ValueError):
    pass


@dataclass(frozen=True)
class PhasePoint:
    X: float
    Z: float

    def __post_init__(self):
        if not (math.isfinite(self.X) and math.isfinite(self.Z)):
            raise ValueError(f"non-finite phase point ({self.X}, {self.Z})")

    def __iter__(self):
        yield self.X
        yield self.Z


class Region(str, enum.Enum):
    R_PLUS = "RPlus"
    R_MINUS = "RMinus"
    ON_CONCAVITY_LINE = "OnConcavityLine"
    THIRD_QUADRANT = "ThirdQuadrant"
    ON_AXIS = "OnAxis"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class LineSet:
    """The straight lines organising the flow in the first quadrant.

    ``x_nullcline`` is the segment where Xdot = 0 (endpoints on the axes),
    ``z_nullcline`` the two pieces where Zdot = 0 joined at ``join_point``
    on the concavity line.
    """

    concavity_level: float
    x_nullcline: tuple[tuple[float, float], tuple[float, float]]
    z_nullcline_upper: tuple[tuple[float, float], tuple[float, float]]
    z_nullcline_lower: tuple[tuple[float, float], tuple[float, float]]
    join_point: tuple[float, float]
    wall_line: float


def _pt(point) -> tuple[float, float]:
    if isinstance(point, PhasePoint):
        return point.X, point.Z
    x, z = point
    return float(x), float(z)


def _on_line(z: float, level: float) -> bool:
    return abs(z - level) <= TAU_LINE * level


def region_of(point, params: ProblemParams) -> Region:
    x, z = _pt(point)
    if not (math.isfinite(x) and math.isfinite(z)):
        raise ValueError("non-finite point")
    if x < 0 and z < 0:
        return Region.THIRD_QUADRANT
    if (x < 0 < z) or (z < 0 < x):
        return Region.OUTSIDE
    if x == 0 or z == 0:
        return Region.ON_AXIS
    level = params.concavity_level
    if _on_line(z, level):
        return Region.ON_CONCAVITY_LINE
    return Region.R_PLUS if z > level else Region.R_MINUS


def _coefficients(x: float, z: float, params: ProblemParams) -> tuple[float, float]:
    """(effective dimension, Z divisor) of the smooth piece containing the point."""
    if x < 0 or z < 0:
        if x > 0 or z > 0:
            raise OutsideDomain(f"({x}, {z}) lies outside 1Q and 3Q")
        return params.n_tilde_3q, params.kappa_3q
    if z > params.concavity_level:
        return float(params.N), params.kappa_up
    return params.n_tilde, params.kappa_down


def vector_field(point, p: float, params: ProblemParams) -> tuple[float, float]:
    """(Xdot, Zdot) of the system selected by ``params.operator``.

    Both one-sided formulas agree on the concavity line, so the lower one is
    used there.
    """
    check_p(p)
    x, z = _pt(point)
    n, k = _coefficients(x, z, params)
    zk = z / k
    return x * (x - (n - 2.0) + zk), z * (n + params.a - p * x - zk)


def vector_field_array(X: np.ndarray, Z: np.ndarray, p: float,
                       params: ProblemParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised field on 1Q/3Q grids; NaN elsewhere."""
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    q1 = (X >= 0) & (Z >= 0)
    q3 = (X <= 0) & (Z <= 0) & ~q1
    up = q1 & (Z > params.concavity_level)
    n = np.where(q3, params.n_tilde_3q, np.where(up, params.N, params.n_tilde))
    k = np.where(q3, params.kappa_3q, np.where(up, params.kappa_up, params.kappa_down))
    zk = Z / k
    u = X * (X - (n - 2.0) + zk)
    v = Z * (n + params.a - p * X - zk)
    bad = ~(q1 | q3)
    u = np.where(bad, np.nan, u)
    v = np.where(bad, np.nan, v)
    return u, v


def lines(p: float, params: ProblemParams) -> LineSet:
    check_p(p)
    level = params.concavity_level
    nt = params.n_tilde
    kd, ku = params.kappa_down, params.kappa_up
    a = params.a
    # Xdot = 0 segment, entirely below the concavity line
    x_null = ((0.0, kd * (nt - 2.0)), (nt - 2.0, 0.0))
    px = (1.0 + a) / p
    # Zdot = 0: upper piece Z = ku (N + a - pX) above the line
    upper = ((0.0, ku * (params.N + a)), (px, level))
    lower_x_end = (nt + a) / p
    lower = ((px, level), (lower_x_end, 0.0))
    return LineSet(level, x_null, upper, lower, (px, level), nt - 2.0)


def field_directions_on_lines(p: float, params: ProblemParams, samples: int = 64) -> dict:
    """Sign verdicts of the field on the distinguished lines.

    Each entry holds the predicted rule and whether every sampled point obeys
    it; sampling excludes the exceptional points where the field is tangent.
    """
    check_p(p)
    alpha = params.alpha(p)
    ls = lines(p, params)
    level = ls.concavity_level
    pivot = (1.0 + params.a) / p
    wall = ls.wall_line
    top = params.n0_height
    report: dict[str, dict] = {}

    xs = np.linspace(0.0, 3.0 * max(wall, pivot, alpha) + 1.0, samples + 2)[1:-1]
    ok = True
    for x in xs:
        if abs(x - pivot) < 1e-9:
            continue
        xd, zd = vector_field((x, level), p, params)
        # crossing R+ -> R- means Zdot < 0 on the line
        ok &= (xd > 0) and ((zd < 0) == (x > pivot))
    report["concavity_line"] = {"rule": "Xdot>0; Zdot<0 iff X>(1+a)/p", "holds": bool(ok)}

    ok = True
    x_end = wall
    for x in np.linspace(0.0, x_end, samples + 2)[1:-1]:
        if abs(x - alpha) < 1e-9:
            continue
        z = params.kappa_down * (wall - x)
        xd, zd = vector_field((x, z), p, params)
        ok &= abs(xd) <= 1e-9 * (1 + abs(zd)) and ((zd > 0) == (x < alpha))
    report["x_nullcline"] = {"rule": "Xdot=0; Zdot>0 iff X<alpha", "holds": bool(ok)}

    ok = True
    x_end = (params.n_tilde + params.a) / p
    for x in np.linspace(0.0, x_end, samples + 2)[1:-1]:
        if abs(x - alpha) < 1e-9 or abs(x - pivot) < 1e-9:
            continue
        if x < pivot:
            z = params.kappa_up * (params.N + params.a - p * x)
        else:
            z = params.kappa_down * (params.n_tilde + params.a - p * x)
        xd, zd = vector_field((x, z), p, params)
        ok &= abs(zd) <= 1e-9 * (1 + abs(xd)) and ((xd > 0) == (x < alpha))
    report["z_nullcline"] = {"rule": "Zdot=0; Xdot>0 iff X<alpha", "holds": bool(ok)}

    ok = True
    for x in np.linspace(0.0, 3.0 * wall, samples + 2)[1:-1]:
        if abs(x - wall) < 1e-9:
            continue
        xd, zd = vector_field((x, 0.0), p, params)
        ok &= zd == 0.0 and ((xd < 0) == (x < wall))
    report["x_axis"] = {"rule": "Xdot<0 iff 0<X<N~-2", "holds": bool(ok)}

    ok = True
    for z in np.linspace(0.0, 3.0 * top, samples + 2)[1:-1]:
        if abs(z - top) < 1e-9:
            continue
        xd, zd = vector_field((0.0, z), p, params)
        ok &= xd == 0.0 and ((zd > 0) == (z < top))
    report["z_axis"] = {"rule": "Zdot>0 iff 0<Z<kappa(N+a)", "holds": bool(ok)}
    return report


def dulac_beta(p: float) -> float:
    return (3.0 - p) / (p - 1.0)


def dulac_weight(point, p: float, params: ProblemParams) -> float:
    x, z = _pt(point)
    return x ** params.alpha(p) * z ** dulac_beta(p)


def dulac_phi(point, p: float, params: ProblemParams) -> float:
    """Weighted divergence of the field for the weight X^alpha Z^beta.

    Closed form per region: phi/(p-1) times ``(n+2+2a) - p(n-2)`` with
    ``n`` the effective dimension of the region.
    """
    check_p(p)
    x, z = _pt(point)
    if not (x > 0 and z > 0):
        raise ValueError("Dulac weight needs a point strictly inside 1Q")
    level = params.concavity_level
    if _on_line(z, level):
        raise OnInterface(f"point ({x}, {z}) is on the concavity line")
    n = float(params.N) if z > level else params.n_tilde
    weight = dulac_weight((x, z), p, params)
    return weight / (p - 1.0) * ((n + 2.0 + 2.0 * params.a) - p * (n - 2.0))


def dulac_phi_expanded(point, p: float, params: ProblemParams) -> float:
    """Same quantity from the unsimplified bracket; used as a cross-check."""
    x, z = _pt(point)
    level = params.concavity_level
    if z > level:
        n, k = float(params.N), params.kappa_up
    else:
        n, k = params.n_tilde, params.kappa_down
    al = params.alpha(p)
    be = dulac_beta(p)
    a = params.a
    bracket = (al * (x - (n - 2.0) + z / k) + be * (n + a - p * x - z / k)
               + (2.0 - p) * x + 2.0 - z / k)
    return dulac_weight((x, z), p, params) * bracket


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _check_simple(pts: np.ndarray) -> None:
    n = len(pts) - 1
    if n > 2000:
        # quadratic check is too slow; sample-based check on a decimated copy
        step = int(math.ceil(n / 2000))
        pts = np.vstack([pts[:-1:step], pts[-1:]])
        n = len(pts) - 1
    segs = [(pts[i], pts[i + 1]) for i in range(n)]
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_intersect(segs[i][0], segs[i][1], segs[j][0], segs[j][1]):
                raise SelfIntersection(f"segments {i} and {j} intersect")


def dulac_line_integral(polyline: Sequence, p: float, params: ProblemParams,
                        closure_tol: float = 1e-9, check_simple: bool = True) -> float:
    """Integral of weight * (f dZ - g dX) around a closed polyline in 1Q.

    Each segment is integrated with 5-point Gauss-Legendre quadrature; the
    field is evaluated on whichever side of the concavity line a node lies.
    Counter-clockwise orientation gives the sign of the enclosed integral of
    the weighted divergence.
    """
    pts = np.asarray(polyline, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise OpenCurve("polyline must be an (n, 2) array")
    scale = 1.0 + np.abs(pts).max()
    if np.hypot(*(pts[0] - pts[-1])) > closure_tol * scale:
        raise OpenCurve("first and last vertices differ")
    if np.any(pts <= 0):
        raise ValueError("polyline must lie strictly inside 1Q")
    if check_simple and len(pts) > 3:
        _check_simple(pts)
    nodes, wts = np.polynomial.legendre.leggauss(5)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * wts
    al = params.alpha(p)
    be = dulac_beta(p)
    a0 = pts[:-1]
    d = pts[1:] - pts[:-1]
    qx = a0[:, 0:1] + s[None, :] * d[:, 0:1]
    qz = a0[:, 1:2] + s[None, :] * d[:, 1:2]
    f, g = vector_field_array(qx, qz, p, params)
    weight = qx ** al * qz ** be
    integrand = weight * (f * d[:, 1:2] - g * d[:, 0:1])
    return float((integrand * w[None, :]).sum())
