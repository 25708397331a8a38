"""Event-aware integration, fate detection, return maps and cycle search."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernel as K
from .field import (OutsideDomain, PhasePoint, Region, TAU_LINE, vector_field)
from .params import ProblemParams, check_p
from .stationary import Label, location, m0_in_quadrant

TAU_ORBIT = 1e-9
CAPTURE_REL = 1e-6
CAPTURE_DT = 5.0
# successive section radii closer than this (relative) are treated as converged
RETURN_NOISE = 1e-7


class StepSizeUnderflow(RuntimeError):
    pass


class NoReturn(RuntimeError):
    """The orbit left through a blow-up or capture before returning."""

    def __init__(self, message: str, status: str = ""):
        super().__init__(message)
        self.status = status


class NoCycleFound(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, Direction):
            return value
        v = str(value).lower()
        if v in ("forward", "fwd", "+", "1"):
            return cls.FORWARD
        if v in ("backward", "bwd", "back", "-", "-1"):
            return cls.BACKWARD
        raise ValueError(f"unknown direction {value!r}")

    @property
    def sign(self) -> int:
        return 1 if self is Direction.FORWARD else -1


class EventKind(str, enum.Enum):
    CONCAVITY_CROSS = "ConcavityCross"
    XNULLCLINE_CROSS = "XNullclineCross"
    ZNULLCLINE_CROSS = "ZNullclineCross"
    WALL_CROSS = "WallCross"
    STATIONARY_CAPTURE = "StationaryCapture"
    SECTION_CROSS = "SectionCross"
    BLOWUP_X = "BlowUpX"
    BLOWUP_Z = "BlowUpZ"


_KIND = {
    K.EV_CONCAVITY: EventKind.CONCAVITY_CROSS,
    K.EV_XNULL: EventKind.XNULLCLINE_CROSS,
    K.EV_ZNULL: EventKind.ZNULLCLINE_CROSS,
    K.EV_WALL: EventKind.WALL_CROSS,
    K.EV_CAPTURE: EventKind.STATIONARY_CAPTURE,
    K.EV_SECTION: EventKind.SECTION_CROSS,
    K.EV_BLOWUP_X: EventKind.BLOWUP_X,
    K.EV_BLOWUP_Z: EventKind.BLOWUP_Z,
}


@dataclass(frozen=True)
class Event:
    kind: EventKind
    t: float
    point: PhasePoint
    detail: str | None = None

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "t": self.t, "X": self.point.X, "Z": self.point.Z,
                "detail": self.detail}


@dataclass(frozen=True)
class Section:
    """Vertical ray X = x, Z > z_min, crossed with Xdot of sign ``orientation``."""

    x: float
    z_min: float
    orientation: int = 1

    def contains(self, point) -> bool:
        x, z = point
        return abs(x - self.x) <= 1e-12 * (1.0 + abs(self.x)) and z > self.z_min


@dataclass(frozen=True)
class Budget:
    horizon: float = 500.0
    max_steps: int = 10_000_000
    rtol: float = 1e-10
    atol: float = 1e-12
    hmax: float = 0.5

    def scaled(self, factor: float) -> "Budget":
        return Budget(self.horizon * factor, int(self.max_steps * factor), self.rtol,
                      self.atol, self.hmax)


@dataclass(frozen=True)
class EventSpec:
    """What the integrator watches for besides the fixed lines.

    ``stations`` lists the stationary points that trigger capture.  Caps left
    as ``None`` take the defaults derived from the a priori bounds.
    """

    stations: tuple[str, ...] = ("O", "N0", "A0", "M0")
    capture_rel: float = CAPTURE_REL
    capture_dt: float = CAPTURE_DT
    section: Section | None = None
    max_section: int = 0
    wall_margin: float | None = None
    z_cap: float | None = None
    blow_final: float = 1e5


@dataclass
class Trajectory:
    t: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    events: list[Event]
    direction: Direction
    p: float
    params: ProblemParams
    status: str = "horizon"
    nfev: int = 0
    _regions: list | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def regions(self) -> list[Region]:
        if self._regions is None:
            self._regions = regions_of_arrays(self.X, self.Z, self.params)
        return self._regions

    @property
    def samples(self) -> list[tuple[float, PhasePoint, Region]]:
        return [(float(t), PhasePoint(float(x), float(z)), r)
                for t, x, z, r in zip(self.t, self.X, self.Z, self.regions)]

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(float(self.X[0]), float(self.Z[0]))

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(float(self.X[-1]), float(self.Z[-1]))

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind is kind]

    def has_blowup(self) -> bool:
        return any(e.kind in (EventKind.BLOWUP_X, EventKind.BLOWUP_Z) for e in self.events)

    def points(self) -> np.ndarray:
        return np.column_stack([self.X, self.Z])


def regions_of_arrays(X: np.ndarray, Z: np.ndarray, params: ProblemParams) -> list[Region]:
    level = params.concavity_level
    out = []
    for x, z in zip(X, Z):
        if x < 0 and z < 0:
            out.append(Region.THIRD_QUADRANT)
        elif (x < 0 < z) or (z < 0 < x):
            out.append(Region.OUTSIDE)
        elif x == 0 or z == 0:
            out.append(Region.ON_AXIS)
        elif abs(z - level) <= TAU_LINE * level:
            out.append(Region.ON_CONCAVITY_LINE)
        else:
            out.append(Region.R_PLUS if z > level else Region.R_MINUS)
    return out


def _quadrant(x: float, z: float) -> int:
    if x >= 0 and z >= 0:
        return 1
    if x <= 0 and z <= 0:
        return 3
    raise OutsideDomain(f"start ({x}, {z}) lies outside 1Q and 3Q")


def station_table(p: float, params: ProblemParams, labels: Sequence[str],
                  rel: float) -> list[tuple[str, float, float, float]]:
    rows = []
    for lab in labels:
        loc = location(lab, p, params)
        if Label(lab) is Label.M0 and not m0_in_quadrant(p, params):
            continue
        eps = rel * (1.0 + math.hypot(loc.X, loc.Z))
        rows.append((Label(lab).value, loc.X, loc.Z, eps))
    return rows


def default_caps(params: ProblemParams, spec: EventSpec, quadrant: int) -> tuple[float, float]:
    margin = 0.5 * params.wall if spec.wall_margin is None else spec.wall_margin
    z_cap = (10.0 * (params.concavity_level + params.n0_height)
             if spec.z_cap is None else spec.z_cap)
    if quadrant == 1:
        return params.wall + margin, z_cap
    return 10.0 * (params.n_tilde_3q + params.kappa_3q + 1.0), z_cap


def _start_events(x: float, z: float, p: float, params: ProblemParams, t0: float) -> list[Event]:
    """Events for a start lying on a line (no crossing can be bracketed there)."""
    if not (x > 0 and z > 0):
        return []
    events = []
    level = params.concavity_level
    px = (1.0 + params.a) / p
    at_p = abs(z - level) <= TAU_LINE * level and abs(x - px) <= 1e-12 * (1.0 + px)
    if at_p:
        detail = "at P"
    else:
        detail = None
    pt = PhasePoint(x, z)
    fx, fz = vector_field(pt, p, params)
    if abs(fz) <= 1e-12 * (1.0 + abs(z)) * (1.0 + z):
        events.append(Event(EventKind.ZNULLCLINE_CROSS, t0, pt, detail))
    if abs(z - level) <= TAU_LINE * level:
        if detail is None:
            detail = "R+->R-" if fz < 0 else "R-->R+"
        events.append(Event(EventKind.CONCAVITY_CROSS, t0, pt, detail))
    if abs(fx) <= 1e-12 * (1.0 + x) * (1.0 + x) and not at_p:
        events.append(Event(EventKind.XNULLCLINE_CROSS, t0, pt, None))
    return events


def _crossing_detail(kind: EventKind, fwd_sign: int) -> str | None:
    if kind is EventKind.CONCAVITY_CROSS:
        return "R-->R+" if fwd_sign > 0 else "R+->R-"
    if kind in (EventKind.XNULLCLINE_CROSS, EventKind.ZNULLCLINE_CROSS,
                EventKind.WALL_CROSS, EventKind.SECTION_CROSS):
        return "increasing" if fwd_sign > 0 else "decreasing"
    return None


def integrate(start, p: float, params: ProblemParams, direction="forward",
              horizon: float | None = None, events: EventSpec | None = None,
              budget: Budget | None = None, t0: float = 0.0) -> Trajectory:
    """Adaptive DOPRI5 integration with event localisation.

    Halts on stationary capture, a blow-up threshold or the horizon.  Crossing
    details are reported in forward-time orientation whatever the direction.
    """
    check_p(p)
    direction = Direction.parse(direction)
    spec = events or EventSpec()
    budget = budget or Budget()
    if horizon is None:
        horizon = budget.horizon
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    x0, z0 = (float(v) for v in start)
    if not (math.isfinite(x0) and math.isfinite(z0)):
        raise ValueError("non-finite start")
    quadrant = _quadrant(x0, z0)
    stations = station_table(p, params, spec.stations, spec.capture_rel) if quadrant == 1 else []

    fx, fz = vector_field((x0, z0), p, params)
    if fx == 0.0 and fz == 0.0:
        # equilibrium start: nothing to integrate
        near = min(stations, key=lambda s: math.hypot(x0 - s[1], z0 - s[2]), default=None)
        label = near[0] if near else "stationary"
        ev = Event(EventKind.STATIONARY_CAPTURE, t0, PhasePoint(x0, z0), label)
        return Trajectory(np.array([t0]), np.array([x0]), np.array([z0]), [ev], direction,
                          p, params, "captured", 0)

    x_cap, z_cap = default_caps(params, spec, quadrant)
    sec = spec.section
    section = (1.0, sec.x, sec.z_min, float(sec.orientation)) if sec else (0.0, 0.0, 0.0, 1.0)
    res = K.integrate_kernel(
        t0, x0, z0, direction.sign, params.field_vector(p), float(horizon), budget.rtol,
        budget.atol, budget.hmax, int(budget.max_steps), quadrant,
        (x_cap, z_cap, max(spec.blow_final, 2.0 * max(x_cap, z_cap)), spec.capture_dt),
        [s[1:] for s in stations], section, int(spec.max_section))
    ts, xs, zs, ek, et, ex, ez, es, ei, status, nfev, _, _ = res
    if status in (K.ST_UNDERFLOW, K.ST_NONFINITE):
        raise StepSizeUnderflow(f"step size underflow at t={ts[-1]:.6g}")

    evs = _start_events(x0, z0, p, params, t0)
    for kind, t, x, z, sgn, info in zip(ek, et, ex, ez, es, ei):
        kind = _KIND[int(kind)]
        if kind is EventKind.STATIONARY_CAPTURE:
            detail = stations[int(info)][0]
        else:
            detail = _crossing_detail(kind, int(sgn) * direction.sign)
        evs.append(Event(kind, float(t), PhasePoint(float(x), float(z)), detail))
    status_name = {K.ST_HORIZON: "horizon", K.ST_CAPTURED: "captured",
                   K.ST_BLOWUP_X: "blowup_x", K.ST_BLOWUP_Z: "blowup_z",
                   K.ST_MAX_STEPS: "max_steps", K.ST_SECTION_LIMIT: "section_limit"}[status]
    return Trajectory(ts, xs, zs, evs, direction, p, params, status_name, int(nfev))


# -- fate ------------------------------------------------------------------

class Verdict(str, enum.Enum):
    TO_STATIONARY = "ToStationary"
    TO_PERIODIC_ORBIT = "ToPeriodicOrbit"
    BLOWUP_X = "BlowUpX"
    BLOWUP_Z = "BlowUpZ"
    UNDETERMINED = "Undetermined"


@dataclass
class OrbitFate:
    verdict: Verdict
    target: str | None = None          # stationary label or orbit id
    blowup_time: float | None = None
    certificate: dict = field(default_factory=dict)
    trajectory: Trajectory | None = None

    def as_dict(self) -> dict:
        return {"verdict": self.verdict.value, "target": self.target,
                "blowup_time": self.blowup_time, "certificate": self.certificate}

    def __str__(self) -> str:
        if self.verdict is Verdict.TO_STATIONARY:
            return f"ToStationary({self.target})"
        if self.verdict is Verdict.TO_PERIODIC_ORBIT:
            return f"ToPeriodicOrbit({self.target})"
        return self.verdict.value


def m0_section(p: float, params: ProblemParams) -> Section:
    m0 = location(Label.M0, p, params)
    return Section(m0.X, m0.Z, 1)


def analyze_returns(radii: Sequence[float], eps: float) -> dict:
    """Limit of successive section radii.

    The tail is modelled as r_k = r_inf + c q^k.  Returns the Aitken limit,
    the contraction ratio and a verdict among ``"cycle"``, ``"point"`` and
    ``None`` (not yet decided).
    """
    r = np.asarray(radii, dtype=float)
    out = {"n_returns": int(len(r)), "r_inf": math.nan, "ratio": math.nan,
           "tail": math.nan, "verdict": None}
    if len(r) < 5:
        return out
    d = np.diff(r)
    d1, d2, d3 = d[-1], d[-2], d[-3]
    if d1 == 0.0:
        out.update(r_inf=float(r[-1]), ratio=0.0, tail=0.0,
                   verdict="cycle" if r[-1] > eps else "point")
        return out
    noise = RETURN_NOISE * (1.0 + abs(r[-1]))
    if max(abs(d1), abs(d2), abs(d3)) <= noise:
        # converged to the integration noise floor
        out.update(r_inf=float(r[-1]), ratio=0.0, tail=float(abs(d1)),
                   verdict="cycle" if r[-1] > max(eps, 1e3 * noise) else "point")
        return out
    if d2 == 0.0 or d3 == 0.0:
        return out
    q = d1 / d2
    q_prev = d2 / d3
    out["ratio"] = float(q)
    if not (0.0 < q < 1.0 - 1e-4):
        return out
    r_inf = r[-1] + d1 * q / (1.0 - q)
    tail = abs(r[-1] - r_inf)
    out["r_inf"] = float(r_inf)
    out["tail"] = float(tail)
    steady = abs(q - q_prev) <= 0.05 * (1.0 - q) + 1e-6
    if r_inf <= max(eps, 0.1 * r[-1]) and steady:
        out["verdict"] = "point"
    elif r_inf > eps and steady and tail <= 1e-3 * r_inf:
        out["verdict"] = "cycle"
    return out


def detect_fate(start, p: float, params: ProblemParams, direction="forward",
                budget: Budget | None = None, events: EventSpec | None = None) -> OrbitFate:
    """Forward or backward fate of the orbit through ``start`` (in 1Q).

    Blow-up and capture come from the kernel thresholds; convergence to M0
    or to a cycle around it is read off the returns to the vertical ray above
    M0.  Anything else within the budget is Undetermined.
    """
    budget = budget or Budget()
    x0, z0 = (float(v) for v in start)
    if not (x0 >= 0 and z0 >= 0):
        raise OutsideDomain("detect_fate needs a start in the closed first quadrant")
    spec = events or EventSpec()
    if spec.section is None and m0_in_quadrant(p, params):
        spec = EventSpec(spec.stations, spec.capture_rel, spec.capture_dt,
                         m0_section(p, params), 0, spec.wall_margin, spec.z_cap,
                         spec.blow_final)
    traj = integrate((x0, z0), p, params, direction, budget.horizon, spec, budget)
    return fate_of(traj, p, params, spec)


def fate_of(traj: Trajectory, p: float, params: ProblemParams,
            spec: EventSpec | None = None) -> OrbitFate:
    spec = spec or EventSpec()
    last = traj.events[-1] if traj.events else None
    if last is not None and last.kind is EventKind.STATIONARY_CAPTURE:
        loc = location(last.detail, p, params) if last.detail in Label.__members__ else None
        dist = math.hypot(last.point.X - loc.X, last.point.Z - loc.Z) if loc else 0.0
        return OrbitFate(Verdict.TO_STATIONARY, last.detail,
                         certificate={"final_distance": dist, "t": last.t, "method": "capture"},
                         trajectory=traj)
    if last is not None and last.kind is EventKind.BLOWUP_X:
        return OrbitFate(Verdict.BLOWUP_X, None, last.t,
                         {"threshold_X": float(traj.X[-1])}, traj)
    if last is not None and last.kind is EventKind.BLOWUP_Z:
        return OrbitFate(Verdict.BLOWUP_Z, None, last.t,
                         {"threshold_Z": float(traj.Z[-1])}, traj)
    cert: dict = {"status": traj.status, "t_end": float(traj.t[-1])}
    if m0_in_quadrant(p, params) and spec.section is not None:
        m0 = location(Label.M0, p, params)
        radii = [e.point.Z - m0.Z for e in traj.events_of(EventKind.SECTION_CROSS)]
        eps = spec.capture_rel * (1.0 + math.hypot(m0.X, m0.Z))
        info = analyze_returns(radii, eps)
        cert.update(info)
        if radii:
            cert["last_radius"] = float(radii[-1])
        if info["verdict"] == "point":
            cert["method"] = "returns"
            return OrbitFate(Verdict.TO_STATIONARY, "M0", certificate=cert, trajectory=traj)
        if info["verdict"] == "cycle":
            cert["method"] = "returns"
            return OrbitFate(Verdict.TO_PERIODIC_ORBIT, f"r={info['r_inf']:.6g}",
                             certificate=cert, trajectory=traj)
    return OrbitFate(Verdict.UNDETERMINED, None, certificate=cert, trajectory=traj)


# -- return map and cycles ---------------------------------------------------

def poincare_map(start, p: float, params: ProblemParams, section: Section | None = None,
                 budget: Budget | None = None) -> tuple[PhasePoint, float]:
    """First return to ``section`` (default: ray above M0) and the return time."""
    budget = budget or Budget()
    if section is None:
        if not m0_in_quadrant(p, params):
            raise ValueError("M0 is not in the first quadrant; no default section")
        section = m0_section(p, params)
    x0, z0 = (float(v) for v in start)
    if abs(x0 - section.x) > 1e-9 * (1.0 + abs(section.x)):
        raise ValueError("start is not on the section")
    if not z0 > section.z_min:
        raise ValueError("start must lie strictly above the section anchor")
    spec = EventSpec(stations=("O", "N0", "A0", "M0"), section=section, max_section=1)
    traj = integrate((section.x, z0), p, params, "forward", budget.horizon, spec, budget)
    secs = traj.events_of(EventKind.SECTION_CROSS)
    if not secs:
        raise NoReturn(f"no return to the section (status {traj.status})", traj.status)
    ev = secs[0]
    return ev.point, ev.t


def _displacement(r: float, p: float, params: ProblemParams, section: Section,
                  budget: Budget) -> float:
    pt, _ = poincare_map((section.x, section.z_min + r), p, params, section, budget)
    return pt.Z - section.z_min - r


@dataclass
class PeriodicOrbit:
    points: np.ndarray
    period: float
    section_anchor: PhasePoint
    xz_min: float
    xz_max: float
    crosses_concavity: bool
    concavity_crossings: int = 0
    radius: float = math.nan
    multiplier: float = math.nan

    @property
    def closure_gap(self) -> float:
        return float(np.hypot(*(self.points[0] - self.points[-1])))

    def as_dict(self) -> dict:
        return {"period": self.period, "section_anchor": [self.section_anchor.X,
                                                          self.section_anchor.Z],
                "xz_min": self.xz_min, "xz_max": self.xz_max,
                "crosses_concavity": self.crosses_concavity,
                "concavity_crossings": self.concavity_crossings, "radius": self.radius,
                "multiplier": self.multiplier, "closure_gap": self.closure_gap}


def trace_cycle(radius: float, p: float, params: ProblemParams,
                section: Section | None = None, budget: Budget | None = None,
                multiplier: float = math.nan) -> PeriodicOrbit:
    """One loop from the section point at ``radius``, closed on the last return."""
    budget = budget or Budget()
    section = section or m0_section(p, params)
    spec = EventSpec(section=section, max_section=1)
    traj = integrate((section.x, section.z_min + radius), p, params, "forward",
                     budget.horizon, spec, budget)
    secs = traj.events_of(EventKind.SECTION_CROSS)
    if not secs:
        raise NoReturn("cycle candidate does not return")
    ev = secs[0]
    keep = traj.t < ev.t
    pts = np.column_stack([np.append(traj.X[keep], ev.point.X),
                           np.append(traj.Z[keep], ev.point.Z)])
    xz = pts[:, 0] * pts[:, 1]
    ncross = len(traj.events_of(EventKind.CONCAVITY_CROSS))
    return PeriodicOrbit(pts, ev.t - traj.t[0], PhasePoint(section.x, section.z_min),
                         float(xz.min()), float(xz.max()), ncross >= 2, ncross, radius,
                         multiplier)


def section_extent(p: float, params: ProblemParams) -> float:
    """Largest radius on the ray above M0 inside the a priori box."""
    m0 = location(Label.M0, p, params)
    return params.n0_height - m0.Z


def _signed_displacement(r: float, p: float, params: ProblemParams, section: Section,
                         budget: Budget) -> float:
    """Return displacement; escape through blow-up counts as +inf, capture as -inf."""
    try:
        return _displacement(r, p, params, section, budget)
    except NoReturn as exc:
        if exc.status.startswith("blowup"):
            return math.inf
        if exc.status == "captured":
            return -math.inf
        return math.nan


def _bisect_sign(f, lo: float, hi: float, flo: float, tol: float) -> float:
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if not math.isfinite(fm) and math.isnan(fm):
            break
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_periodic_orbits(p: float, params: ProblemParams, n_scan: int = 40,
                         budget: Budget | None = None, tol: float = TAU_ORBIT,
                         extra_radii: Sequence[float] = ()) -> list[PeriodicOrbit]:
    """All cycles around M0 found by a sign scan of the return displacement.

    Orbits that escape (blow up) before returning count as an outward
    displacement, which brackets unstable cycles at the edge of the basin.
    """
    check_p(p)
    budget = budget or Budget(horizon=200.0)
    if not m0_in_quadrant(p, params):
        raise NoCycleFound("M0 is not in the first quadrant", {"p": p})
    section = m0_section(p, params)
    extent = section_extent(p, params)

    def disp(r):
        return _signed_displacement(r, p, params, section, budget)

    radii = np.unique(np.concatenate([extent * np.geomspace(1e-3, 0.999, n_scan),
                                      np.asarray(extra_radii, dtype=float)]))
    values = [disp(r) for r in radii]
    radii, values = _zoom_escape_edges(list(radii), values, disp)
    cycles = []
    for i in range(len(radii) - 1):
        d1, d2 = values[i], values[i + 1]
        if math.isnan(d1) or math.isnan(d2) or not (d1 * d2 < 0):
            continue
        r_star = _bisect_sign(disp, radii[i], radii[i + 1], d1, tol)
        d_star = disp(r_star)
        if not math.isfinite(d_star) or abs(d_star) > 1e3 * tol + 1e-7 * r_star:
            continue
        cycles.append(_cycle_at(r_star, p, params, section, budget, disp))
    return cycles


def _zoom_escape_edges(radii: list, values: list, disp, levels: int = 3, n: int = 12):
    """Resample where the displacement jumps from inward/outward to escape.

    A stable cycle lying just inside the escape boundary leaves only a thin
    band of negative displacement that a coarse scan can miss.
    """
    for _ in range(levels):
        added = False
        for i in range(len(radii) - 1):
            d1, d2 = values[i], values[i + 1]
            if math.isfinite(d1) and d1 > 0 and d2 == math.inf:
                fine = np.linspace(radii[i], radii[i + 1], n + 2)[1:-1]
                vals = [disp(r) for r in fine]
                radii = radii[:i + 1] + list(fine) + radii[i + 1:]
                values = values[:i + 1] + vals + values[i + 1:]
                added = True
                break
        if not added:
            break
    return np.asarray(radii), values


def _cycle_at(r: float, p: float, params: ProblemParams, section: Section, budget: Budget,
              disp) -> PeriodicOrbit:
    h = max(1e-5 * r, 1e-8)
    dp, dm = disp(r + h), disp(r - h)
    mult = 1.0 + (dp - dm) / (2 * h) if math.isfinite(dp) and math.isfinite(dm) else math.nan
    return trace_cycle(r, p, params, section, budget, mult)


def find_periodic_orbit(p: float, params: ProblemParams, seed_hint: float | None = None,
                        n_scan: int = 40, budget: Budget | None = None,
                        tol: float = TAU_ORBIT) -> PeriodicOrbit:
    """Fixed point of the return map on the ray above M0.

    With ``seed_hint`` (a radius) a zero displacement there returns the orbit
    through the seed; this covers centres where every radius is a fixed point.
    Otherwise the outermost cycle of :func:`find_periodic_orbits` is returned.
    """
    check_p(p)
    budget = budget or Budget(horizon=200.0)
    if not m0_in_quadrant(p, params):
        raise NoCycleFound("M0 is not in the first quadrant", {"p": p})
    section = m0_section(p, params)

    def disp(r):
        return _signed_displacement(r, p, params, section, budget)

    if seed_hint is not None:
        d = disp(seed_hint)
        if math.isfinite(d) and abs(d) < tol:
            return _cycle_at(seed_hint, p, params, section, budget, disp)
    extra = () if seed_hint is None else (seed_hint,)
    cycles = find_periodic_orbits(p, params, n_scan, budget, tol, extra)
    if not cycles:
        raise NoCycleFound("no sign change of the return displacement", {"p": p})
    return max(cycles, key=lambda c: c.radius)


def box_certificate(trajectory: Trajectory, params: ProblemParams) -> bool:
    """True iff every sample lies in the open a priori box."""
    if trajectory.has_blowup():
        raise ValueError("box certificate applies only to global trajectories")
    return points_in_box(trajectory.points(), params)


def points_in_box(points: np.ndarray, params: ProblemParams) -> bool:
    pts = np.asarray(points, dtype=float)
    X, Z = pts[:, 0], pts[:, 1]
    return bool(np.all((X > 0) & (X < params.wall) & (Z > 0) & (Z < params.n0_height)))
