"""Stationary points, closed-form Jacobians and their classification."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .field import OnInterface, PhasePoint, TAU_LINE, vector_field
from .params import ProblemParams, check_p, p_pseudo, p_serrin

IMAG_TOL = 1e-10


class MNotInQuadrant(ValueError):
    """M0 requested while it lies outside the open first quadrant."""


class Label(str, enum.Enum):
    O = "O"
    N0 = "N0"
    A0 = "A0"
    M0 = "M0"


class Kind(str, enum.Enum):
    SOURCE = "Source"
    SINK = "Sink"
    SADDLE = "Saddle"
    CENTER = "Center"
    NON_HYPERBOLIC = "NonHyperbolic"


@dataclass
class StationaryPoint:
    label: Label
    location: PhasePoint
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Kind
    in_first_quadrant: bool = True
    # list of (unit vector, "stable" | "unstable")
    tangent_directions: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "label": self.label.value,
            "X": self.location.X,
            "Z": self.location.Z,
            "classification": self.classification.value,
            "in_first_quadrant": self.in_first_quadrant,
            "eigenvalues": [[e.real, e.imag] for e in self.eigenvalues],
        }


def location(label: Label | str, p: float, params: ProblemParams) -> PhasePoint:
    check_p(p)
    label = Label(label)
    if label is Label.O:
        return PhasePoint(0.0, 0.0)
    if label is Label.N0:
        return PhasePoint(0.0, params.n0_height)
    if label is Label.A0:
        return PhasePoint(params.n_tilde - 2.0, 0.0)
    al = params.alpha(p)
    return PhasePoint(al, params.kappa_down * (params.n_tilde - 2.0 - al))


def m0_in_quadrant(p: float, params: ProblemParams) -> bool:
    m0 = location(Label.M0, p, params)
    return m0.X > 0 and m0.Z > 0


def stationary_points(p: float, params: ProblemParams) -> list[StationaryPoint]:
    """O, N0, A0 and M0 with classification.  M0 carries ``in_first_quadrant``."""
    out = []
    for label in Label:
        out.append(classify_stationary(label, p, params, strict=False))
    return out


def jacobian_at(point, p: float, params: ProblemParams, side: str | None = None) -> np.ndarray:
    """Closed-form Jacobian of the smooth piece containing ``point``.

    ``side`` ("up" / "down") overrides the region for points on the
    concavity line; without it such points raise :class:`OnInterface`.
    """
    check_p(p)
    x, z = point
    level = params.concavity_level
    if side is None:
        if x < 0 or z < 0:
            n, k = params.n_tilde_3q, params.kappa_3q
        elif abs(z - level) <= TAU_LINE * level:
            raise OnInterface("Jacobian is discontinuous across the concavity line")
        elif z > level:
            n, k = float(params.N), params.kappa_up
        else:
            n, k = params.n_tilde, params.kappa_down
    elif side == "up":
        n, k = float(params.N), params.kappa_up
    elif side == "down":
        n, k = params.n_tilde, params.kappa_down
    else:
        raise ValueError(f"side must be 'up' or 'down', got {side!r}")
    a = params.a
    return np.array([
        [2.0 * x - (n - 2.0) + z / k, x / k],
        [-p * z, n + a - p * x - 2.0 * z / k],
    ])


def eigen_2x2(J: np.ndarray) -> tuple[complex, complex]:
    """Roots of the characteristic polynomial, (larger real part first)."""
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        r = math.sqrt(disc)
        # avoid cancellation
        q = -0.5 * (tr + math.copysign(r, tr)) if tr != 0 else -0.5 * r
        if q == 0.0:
            e1, e2 = 0.5 * r, -0.5 * r
        else:
            e1, e2 = -q, det / -q
            e1, e2 = max(e1, e2), min(e1, e2)
        return complex(e1), complex(e2)
    r = cmath.sqrt(disc)
    return complex(0.5 * tr, 0.5 * r.imag), complex(0.5 * tr, -0.5 * r.imag)


def _kind(eigs: tuple[complex, complex]) -> Kind:
    s1, s2 = eigs
    re1, re2 = s1.real, s2.real
    tol1 = IMAG_TOL * (1.0 + abs(s1))
    tol2 = IMAG_TOL * (1.0 + abs(s2))
    if abs(re1) < tol1 and abs(re2) < tol2:
        if abs(s1.imag) > tol1:
            return Kind.CENTER
        return Kind.NON_HYPERBOLIC
    if abs(re1) < tol1 or abs(re2) < tol2:
        return Kind.NON_HYPERBOLIC
    if re1 > 0 and re2 > 0:
        return Kind.SOURCE
    if re1 < 0 and re2 < 0:
        return Kind.SINK
    return Kind.SADDLE


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    v = v / np.hypot(v[0], v[1])
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v + 0.0


def _eigvec(J: np.ndarray, sigma: float) -> np.ndarray:
    a, b = J[0, 0] - sigma, J[0, 1]
    c, d = J[1, 0], J[1, 1] - sigma
    # null vector of [[a, b], [c, d]] from the better-conditioned row
    if abs(a) + abs(b) >= abs(c) + abs(d):
        v = (-b, a) if (a != 0 or b != 0) else (1.0, 0.0)
    else:
        v = (d, -c) if (c != 0 or d != 0) else (1.0, 0.0)
    return _unit(v)


def classify_stationary(label: Label | str, p: float, params: ProblemParams,
                        strict: bool = True) -> StationaryPoint:
    """Linear classification of one stationary point.

    N0 uses the upper-region Jacobian, A0 and M0 the lower one.  With
    ``strict`` M0 outside 1Q raises :class:`MNotInQuadrant`; otherwise it is
    returned with ``in_first_quadrant=False``.
    """
    check_p(p)
    label = Label(label)
    loc = location(label, p, params)
    in_q = True
    if label is Label.N0:
        J = jacobian_at((loc.X, loc.Z), p, params, side="up")
    elif label is Label.O:
        J = jacobian_at((0.0, 0.0), p, params, side="down")
    else:
        J = jacobian_at((loc.X, loc.Z), p, params, side="down")
    if label is Label.M0:
        in_q = loc.X > 0 and loc.Z > 0
        if strict and not in_q:
            raise MNotInQuadrant(f"M0 = ({loc.X:g}, {loc.Z:g}) is not in 1Q for p={p:g}")
        if in_q and not loc.Z < params.concavity_level:
            raise AssertionError("M0 must lie below the concavity line")
    eigs = eigen_2x2(J)
    kind = _kind(eigs)
    if label is Label.A0 and abs(p - p_serrin(params)) <= 1e-12 * p:
        kind = Kind.NON_HYPERBOLIC
    if label is Label.M0 and abs(p - p_pseudo(params)) <= 1e-12 * p and in_q:
        kind = Kind.CENTER
    tangents = []
    if eigs[0].imag == 0.0:
        for s in eigs:
            sig = s.real
            if abs(sig) < IMAG_TOL:
                continue
            tangents.append((_eigvec(J, sig), "unstable" if sig > 0 else "stable"))
    return StationaryPoint(label, loc, J, eigs, kind, in_q, tangents)


def n0_unstable_slope(p: float, params: ProblemParams) -> float:
    """Slope dZ/dX of the unstable direction at N0."""
    return -p * params.kappa_up * (params.N + params.a) / (params.N + 2.0 + 2.0 * params.a)


def a0_stable_slope(p: float, params: ProblemParams) -> float:
    nt = params.n_tilde
    return (-p * (nt - 2.0) + 2.0 + params.a) / (nt - 2.0) * params.kappa_down


def n0_unstable_direction(p: float, params: ProblemParams) -> np.ndarray:
    return _unit((1.0, n0_unstable_slope(p, params)))


def a0_stable_direction(p: float, params: ProblemParams) -> np.ndarray:
    """Unit stable direction at A0 pointing into Z > 0."""
    v = np.array([1.0, a0_stable_slope(p, params)])
    v = v / np.hypot(*v)
    return v if v[1] > 0 else -v


def m0_characteristic(p: float, params: ProblemParams) -> dict:
    """Trace, product and discriminant of the quadratic at M0."""
    m0 = location(Label.M0, p, params)
    x0, zk = m0.X, m0.Z / params.kappa_down
    return {
        "trace": x0 - zk,
        "product": x0 * (p - 1.0) * zk,
        "discriminant": (zk - x0) ** 2 - 4.0 * (2.0 + params.a) * zk,
    }


def field_residual(label: Label | str, p: float, params: ProblemParams) -> float:
    loc = location(label, p, params)
    if not (loc.X >= 0 and loc.Z >= 0):
        return 0.0
    fx, fz = vector_field(loc, p, params)
    return math.hypot(fx, fz)
