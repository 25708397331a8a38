"""Distinguished orbits, the C/F/P/S partition of p, critical exponents,
singular catalogs and the exterior-domain nonexistence check."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .field import PhasePoint
from .flow import (Budget, EventKind, EventSpec, NoCycleFound, OrbitFate, PeriodicOrbit,
                   Trajectory, Verdict, default_caps, fate_of, find_periodic_orbits,
                   integrate, m0_section, points_in_box)
from .params import Operator, ProblemParams, check_p, p_pseudo, p_serrin, p_sobolev
from .stationary import (Label, a0_stable_direction, location, m0_in_quadrant,
                         n0_unstable_direction)

log = logging.getLogger(__name__)

SEED_REL = 1e-6


class Unresolved(RuntimeError):
    """The fate could not be decided within the budget."""


class BracketFailure(RuntimeError):
    pass


class SaddleUnavailable(ValueError):
    """A0 is not a saddle, so the orbit arriving at it is not unique."""


class PLabel(str, enum.Enum):
    C = "C"
    F = "F"
    P = "P"
    S = "S"


@dataclass
class PClass:
    label: PLabel
    p: float
    evidence: OrbitFate
    wall_radius: float | None = None
    method: str = "numeric"

    def as_dict(self) -> dict:
        return {"p": self.p, "class": self.label.value, "method": self.method,
                "wall_radius": self.wall_radius, "fate": self.evidence.as_dict()}


# -- distinguished orbits ----------------------------------------------------

def gamma_seed(p: float, params: ProblemParams, delta_rel: float = SEED_REL) -> PhasePoint:
    n0 = location(Label.N0, p, params)
    v = n0_unstable_direction(p, params)
    d = delta_rel * (1.0 + math.hypot(n0.X, n0.Z))
    return PhasePoint(d * v[0], n0.Z + d * v[1])


def gamma_time_origin(seed: PhasePoint, params: ProblemParams) -> float:
    """Time at the seed for which the reconstructed u equals 1 there."""
    return math.log(seed.X * seed.Z) / (2.0 + params.a)


def _gamma_spec(p: float, params: ProblemParams, stations=("O", "N0", "A0", "M0")) -> EventSpec:
    section = m0_section(p, params) if m0_in_quadrant(p, params) else None
    return EventSpec(stations=stations, section=section)


def gamma_orbit(p: float, params: ProblemParams, budget: Budget | None = None,
                delta_rel: float = SEED_REL, stations=("O", "N0", "A0", "M0")) -> Trajectory:
    """Forward orbit leaving N0 along its unstable direction."""
    check_p(p)
    seed = gamma_seed(p, params, delta_rel)
    budget = budget or Budget()
    return integrate(seed, p, params, "forward", budget.horizon,
                     _gamma_spec(p, params, stations), budget,
                     t0=gamma_time_origin(seed, params))


def gamma_fate(p: float, params: ProblemParams, budget: Budget | None = None,
               delta_rel: float = SEED_REL) -> OrbitFate:
    traj = gamma_orbit(p, params, budget, delta_rel)
    return fate_of(traj, p, params, _gamma_spec(p, params))


def upsilon_seed(p: float, params: ProblemParams, delta_rel: float = SEED_REL) -> PhasePoint:
    a0 = location(Label.A0, p, params)
    w = a0_stable_direction(p, params)
    d = delta_rel * (1.0 + math.hypot(a0.X, a0.Z))
    return PhasePoint(a0.X + d * w[0], d * w[1])


def _upsilon_spec(p: float, params: ProblemParams) -> EventSpec:
    section = m0_section(p, params) if m0_in_quadrant(p, params) else None
    return EventSpec(stations=("O", "N0", "M0"), section=section)


def upsilon_orbit(p: float, params: ProblemParams, budget: Budget | None = None,
                  delta_rel: float = SEED_REL) -> Trajectory:
    """Backward orbit arriving at A0 along its stable direction."""
    check_p(p)
    if not p > p_serrin(params):
        raise SaddleUnavailable(f"A0 is not a saddle for p={p:g} <= {p_serrin(params):g}")
    budget = budget or Budget()
    seed = upsilon_seed(p, params, delta_rel)
    return integrate(seed, p, params, "backward", budget.horizon,
                     _upsilon_spec(p, params), budget)


def upsilon_fate(p: float, params: ProblemParams, budget: Budget | None = None,
                 delta_rel: float = SEED_REL) -> OrbitFate:
    traj = upsilon_orbit(p, params, budget, delta_rel)
    return fate_of(traj, p, params, _upsilon_spec(p, params))


# -- classification ------------------------------------------------------------

def _trapped(traj: Trajectory) -> bool:
    """Gamma turned back at the X nullcline before reaching the wall."""
    for e in traj.events:
        if e.kind is EventKind.WALL_CROSS:
            return False
        if e.kind is EventKind.XNULLCLINE_CROSS:
            return e.detail == "decreasing"
    return False


def normalized_wall_radius(fate: OrbitFate, params: ProblemParams, p: float) -> float:
    """Zero of u for the regular solution with u(0) = 1."""
    traj = fate.trajectory
    seed = traj.start
    gamma = 1.0 + seed.X / (2.0 + params.a)
    return math.exp(fate.blowup_time) * gamma ** (1.0 / params.alpha(p))


def _theorem_class(p: float, params: ProblemParams) -> PLabel | None:
    """Class of a trapped Gamma when the theory leaves a single option."""
    if params.operator is Operator.PLUS:
        return PLabel.P if p <= p_pseudo(params) else PLabel.S
    if p >= p_sobolev(params):
        return PLabel.S
    return None


def classify_p(p: float, params: ProblemParams, budget: Budget | None = None) -> PClass:
    """Class of p read off the forward fate of Gamma.

    An undetermined fate is retried once with ten times the budget.  If it
    is still open and Gamma is trapped, the class is taken from the
    stationary and Dulac analysis when that leaves one option; otherwise
    :class:`Unresolved` is raised.
    """
    check_p(p)
    budget = budget or Budget()
    fate = gamma_fate(p, params, budget)
    if fate.verdict is Verdict.UNDETERMINED:
        log.info("gamma fate undetermined at p=%r, retrying with 10x budget", p)
        fate = gamma_fate(p, params, budget.scaled(10.0))
    v = fate.verdict
    if v is Verdict.BLOWUP_X:
        return PClass(PLabel.C, p, fate, normalized_wall_radius(fate, params, p))
    if v is Verdict.TO_STATIONARY and fate.target == "A0":
        return PClass(PLabel.F, p, fate)
    if v is Verdict.TO_STATIONARY and fate.target == "M0":
        return PClass(PLabel.S, p, fate)
    if v is Verdict.TO_PERIODIC_ORBIT:
        return PClass(PLabel.P, p, fate)
    if v is Verdict.UNDETERMINED and _trapped(fate.trajectory):
        lab = _theorem_class(p, params)
        if lab is not None:
            return PClass(lab, p, fate, method="trapped+theory")
    raise Unresolved(f"fate of Gamma at p={p!r} is {fate}")


def side_of_critical(p: float, params: ProblemParams, budget: Budget | None = None) -> str:
    """'C' if Gamma reaches the wall, 'trapped' if it turns back, 'F' if it stays at A0.

    A0 is not a capture target here so that orbits lingering near it are
    followed until they leave on one side.
    """
    budget = budget or Budget()
    traj = _gamma_until_return(p, params, budget)
    if any(e.kind is EventKind.BLOWUP_X for e in traj.events) or \
            any(e.kind is EventKind.WALL_CROSS for e in traj.events):
        if not _trapped(traj):
            return "C"
    if _trapped(traj):
        return "trapped"
    return "F"


def _gamma_until_return(p: float, params: ProblemParams, budget: Budget) -> Trajectory:
    """Gamma without A0 capture, stopped once it has gone around M0."""
    check_p(p)
    seed = gamma_seed(p, params)
    section = m0_section(p, params) if m0_in_quadrant(p, params) else None
    spec = EventSpec(stations=("N0", "M0"), section=section, max_section=2)
    return integrate(seed, p, params, "forward", budget.horizon, spec, budget,
                     t0=gamma_time_origin(seed, params))


@dataclass
class CriticalResult:
    p_star: float
    bracket: tuple[float, float]
    tol: float
    bound_check: dict
    iterations: int = 0
    hit_f: bool = False
    a0_distance: float = math.nan
    approaches_a0: bool = False
    operator: str = "plus"
    p_refined: float = math.nan

    def as_dict(self) -> dict:
        return {"p_star": self.p_star, "p_refined": self.p_refined, "bracket": list(self.bracket), "tol": self.tol,
                "bound_check": self.bound_check, "iterations": self.iterations,
                "hit_f": self.hit_f, "a0_distance": self.a0_distance,
                "approaches_a0": self.approaches_a0, "operator": self.operator}


def initial_bracket(params: ProblemParams, rel: float = 1e-3) -> tuple[float, float]:
    if params.operator is Operator.PLUS:
        low, high = max(p_serrin(params), p_sobolev(params)), p_pseudo(params)
    else:
        low, high = p_pseudo(params), p_sobolev(params)
    return low - rel * (low - 1.0), high + rel * (high - 1.0)


def bound_checks(p_star: float, params: ProblemParams) -> dict:
    if params.operator is Operator.PLUS:
        low = max(p_serrin(params), p_sobolev(params))
        return {"lower": bool(p_star > low), "upper": bool(p_star < p_pseudo(params)),
                "lower_bound": low, "upper_bound": p_pseudo(params)}
    return {"lower": bool(p_star > p_pseudo(params)), "upper": bool(p_star < p_sobolev(params)),
            "lower_bound": p_pseudo(params), "upper_bound": p_sobolev(params)}


def _side_with_retry(p: float, params: ProblemParams, budget: Budget) -> str:
    side = side_of_critical(p, params, budget)
    if side == "F":
        side = side_of_critical(p, params, budget.scaled(10.0))
    return side


FINE_BUDGET = Budget(rtol=1e-13, atol=1e-16)


def _bisect_sides(lo: float, hi: float, params: ProblemParams, budget: Budget, tol: float,
                  max_iter: int) -> tuple[float, float, int, bool]:
    it = 0
    while hi - lo > tol and it < max_iter:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        side = _side_with_retry(mid, params, budget)
        it += 1
        if side == "C":
            lo = mid
        elif side == "trapped":
            hi = mid
        else:
            return mid, mid, it, True
    return lo, hi, it, False


def critical_exponent(params: ProblemParams, tol: float = 1e-6, budget: Budget | None = None,
                      max_iter: int = 60, refine: bool = True) -> CriticalResult:
    """Bisection for sup C keeping lo in C and hi in P u S.

    With ``refine`` the bracket is then narrowed to rounding level using
    tighter integration tolerances; the refined value is used only to
    measure how close Gamma comes to A0 (``p_refined``, ``a0_distance``).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    budget = budget or Budget()
    lo, hi = initial_bracket(params)
    s_lo = _side_with_retry(lo, params, budget)
    s_hi = _side_with_retry(hi, params, budget)
    if s_lo != "C" or s_hi != "trapped":
        raise BracketFailure(f"bracket endpoints classified {s_lo} at {lo!r} and {s_hi} at {hi!r}")
    lo, hi, it, hit_f = _bisect_sides(lo, hi, params, budget, tol, max_iter)
    p_star = 0.5 * (lo + hi)
    p_ref, dist = p_star, a0_approach(p_star, params, budget)
    if refine and not hit_f:
        r_lo, r_hi = max(lo - tol, 1.0 + 1e-9), hi + tol
        if (_side_with_retry(r_lo, params, FINE_BUDGET) == "C"
                and _side_with_retry(r_hi, params, FINE_BUDGET) == "trapped"):
            r_lo, r_hi, _, _ = _bisect_sides(r_lo, r_hi, params, FINE_BUDGET,
                                             8.0 * np.spacing(r_hi), 200)
            d = min(a0_approach(r_lo, params, FINE_BUDGET), a0_approach(r_hi, params, FINE_BUDGET))
            if d < dist:
                p_ref, dist = 0.5 * (r_lo + r_hi), d
    a0 = location(Label.A0, p_star, params)
    eps = SEED_REL * (1.0 + math.hypot(a0.X, a0.Z))
    res = CriticalResult(p_star, (lo, hi), tol, bound_checks(p_star, params), it, hit_f,
                         dist, bool(dist <= eps), params.operator.value)
    res.p_refined = p_ref
    return res


def a0_approach(p: float, params: ProblemParams, budget: Budget | None = None) -> float:
    """Closest sampled distance from Gamma to A0 before any blow-up."""
    traj = _gamma_until_return(p, params, budget or Budget())
    a0 = location(Label.A0, p, params)
    return float(np.min(np.hypot(traj.X - a0.X, traj.Z - a0.Z)))


def critical_gamma(result: CriticalResult, params: ProblemParams,
                   budget: Budget | None = None) -> Trajectory:
    """Gamma at the trapped end of the critical bracket.

    The midpoint may sit on the C side, where Gamma leaves the box after
    passing A0; the upper end keeps the bounded picture of p*.
    """
    return gamma_orbit(result.bracket[1], params, budget)


def _polyline_distance(pts: np.ndarray, line: np.ndarray, k: int = 4) -> np.ndarray:
    """Distance from each point to a polyline.

    Candidate segments are those adjacent to the k nearest vertices, which
    is exact for polylines sampled finely compared with their curvature.
    """
    tree = cKDTree(line)
    _, idx = tree.query(pts, k=min(k, len(line)))
    idx = np.atleast_2d(idx.T).T if idx.ndim == 1 else idx
    best = np.full(len(pts), np.inf)
    for off in (-1, 0):
        i0 = np.clip(idx + off, 0, len(line) - 2)
        a, b = line[i0], line[i0 + 1]
        ab = b - a
        L2 = (ab ** 2).sum(-1)
        L2[L2 == 0.0] = 1.0
        q = pts[:, None, :]
        t = np.clip(((q - a) * ab).sum(-1) / L2, 0.0, 1.0)
        d = np.sqrt(((q - a - t[..., None] * ab) ** 2).sum(-1)).min(axis=1)
        best = np.minimum(best, d)
    return best


# radius, in units of the closest approach, of the corner an orbit turns
# while passing a saddle; inside it the two curves do not overlap
CORNER = 100.0


def gamma_upsilon_distance(p: float, params: ProblemParams, hmax: float = 1e-3,
                           trim: float | None = None) -> dict:
    """Hausdorff distance between Gamma and Upsilon on their overlap.

    Gamma is kept up to its closest approach to A0 and Upsilon up to its
    closest approach to N0; points within ``trim`` of N0 or A0 are dropped
    since the two seeds cover those ends differently.
    """
    budget = Budget(horizon=200.0, rtol=1e-13, atol=1e-16, hmax=hmax)
    n0 = location(Label.N0, p, params)
    a0 = location(Label.A0, p, params)
    g = _gamma_until_return(p, params, budget)
    u = integrate(upsilon_seed(p, params), p, params, "backward", budget.horizon,
                  EventSpec(stations=("O", "M0"), section=m0_section(p, params)
                            if m0_in_quadrant(p, params) else None, max_section=2), budget)
    ga = np.hypot(g.X - a0.X, g.Z - a0.Z)
    un = np.hypot(u.X - n0.X, u.Z - n0.Z)
    G = g.points()[: int(np.argmin(ga)) + 1]
    U = u.points()[: int(np.argmin(un)) + 1]
    if trim is None:
        trim = 10.0 * SEED_REL * (1.0 + math.hypot(n0.X, n0.Z) + math.hypot(a0.X, a0.Z))
    # an end is shared only outside the other orbit's closest approach to it
    trim_n0 = max(trim, CORNER * float(un.min()))
    trim_a0 = max(trim, CORNER * float(ga.min()))

    def keep(P):
        far = (np.hypot(P[:, 0] - n0.X, P[:, 1] - n0.Z) > trim_n0) & \
              (np.hypot(P[:, 0] - a0.X, P[:, 1] - a0.Z) > trim_a0)
        return P[far]

    Gk, Uk = keep(G), keep(U)
    if len(Gk) < 2 or len(Uk) < 2:
        return {"hausdorff": math.inf, "n_gamma": int(len(Gk)), "n_upsilon": int(len(Uk))}
    d1 = _polyline_distance(Gk, U).max()
    d2 = _polyline_distance(Uk, G).max()
    return {"hausdorff": float(max(d1, d2)), "gamma_to_upsilon": float(d1),
            "upsilon_to_gamma": float(d2), "n_gamma": int(len(Gk)), "n_upsilon": int(len(Uk)),
            "trim_n0": trim_n0, "trim_a0": trim_a0}


# -- singular catalog ------------------------------------------------------------

class AtZero(str, enum.Enum):
    NTILDE = "(N~-2)-blowing up"
    ALPHA = "alpha-blowing up"
    PSEUDO = "pseudo-blowing up"


class AtInfinity(str, enum.Enum):
    FAST = "fast decay"
    SLOW = "slow decay"
    PSEUDO_SLOW = "pseudo-slow decay"
    BALL = "ball (Dirichlet)"


class Cardinality(str, enum.Enum):
    UNIQUE = "unique up to scaling"
    INFINITE = "infinitely many"
    TRIVIAL = "trivial"


@dataclass
class CatalogEntry:
    at_zero: AtZero
    at_infinity: AtInfinity
    cardinality: Cardinality
    description: str
    representatives: list = field(default_factory=list)

    @property
    def family(self) -> str:
        return f"{self.at_zero.value} / {self.at_infinity.value}"

    @property
    def domain(self) -> str:
        return "ball" if self.at_infinity is AtInfinity.BALL else "whole space"

    def as_dict(self) -> dict:
        return {"family": self.family, "at_zero": self.at_zero.value,
                "at_infinity": self.at_infinity.value, "domain": self.domain,
                "cardinality": self.cardinality.value, "description": self.description,
                "n_representatives": len(self.representatives),
                "representative_starts": [_rep_start(r) for r in self.representatives]}


def _rep_start(rep) -> list[float]:
    if isinstance(rep, PeriodicOrbit):
        return [float(rep.points[0][0]), float(rep.points[0][1])]
    return [float(rep.X[0]), float(rep.Z[0])]


@dataclass
class SingularCatalog:
    p: float
    operator: str
    entries: list[CatalogEntry]
    cycles: list[PeriodicOrbit]
    upsilon: OrbitFate | None = None
    notes: list[str] = field(default_factory=list)

    def families(self) -> set[tuple[AtZero, AtInfinity]]:
        return {(e.at_zero, e.at_infinity) for e in self.entries
                if e.cardinality is not Cardinality.TRIVIAL}

    def as_dict(self) -> dict:
        return {"p": self.p, "operator": self.operator,
                "entries": [e.as_dict() for e in self.entries],
                "cycles": [c.as_dict() for c in self.cycles],
                "upsilon_backward": None if self.upsilon is None else self.upsilon.as_dict(),
                "notes": self.notes}


class _Catalog:
    def __init__(self):
        self.entries: dict[tuple, CatalogEntry] = {}

    def add(self, z0: AtZero, zi: AtInfinity, card: Cardinality, desc: str, rep=None):
        key = (z0, zi, card is Cardinality.TRIVIAL)
        e = self.entries.get(key)
        if e is None:
            e = CatalogEntry(z0, zi, card, desc)
            self.entries[key] = e
        elif card is Cardinality.INFINITE:
            e.cardinality = Cardinality.INFINITE
        if rep is not None and len(e.representatives) < 3:
            e.representatives.append(rep)


def _at_infinity(fate: OrbitFate, cycles: list[PeriodicOrbit]) -> AtInfinity | None:
    v = fate.verdict
    if v is Verdict.BLOWUP_X:
        return AtInfinity.BALL
    if v is Verdict.TO_STATIONARY:
        return {"A0": AtInfinity.FAST, "M0": AtInfinity.SLOW}.get(fate.target)
    if v is Verdict.TO_PERIODIC_ORBIT:
        return AtInfinity.PSEUDO_SLOW
    return None


def _at_zero(fate: OrbitFate) -> AtZero | None:
    v = fate.verdict
    if v is Verdict.TO_STATIONARY:
        return {"A0": AtZero.NTILDE, "M0": AtZero.ALPHA}.get(fate.target)
    if v is Verdict.TO_PERIODIC_ORBIT:
        return AtZero.PSEUDO
    return None


def _fate_from(start, p, params, direction, budget) -> OrbitFate:
    spec = _gamma_spec(p, params)
    traj = integrate(start, p, params, direction, budget.horizon, spec, budget)
    return fate_of(traj, p, params, spec)


def singular_catalog(p: float, params: ProblemParams, budget: Budget | None = None,
                     seed_rel: float = 1e-4) -> SingularCatalog:
    """Singular radial solutions realised by computed orbits.

    The backward limit of an orbit fixes the behaviour at the origin and the
    forward fate the behaviour at infinity (or a zero at finite radius).
    Sources: orbits issued from A0 when it repels, orbits issued from M0
    when it repels, orbits next to each detected cycle crossing the
    concavity line twice, Upsilon, and the trivial solution at M0.
    """
    check_p(p)
    budget = budget or Budget()
    cat = _Catalog()
    notes = []
    ps = p_serrin(params)
    a0 = location(Label.A0, p, params)
    scale = 1.0 + math.hypot(a0.X, a0.Z)
    d = seed_rel * scale

    if p <= ps * (1 + 1e-12):
        # A0 repels (or is non-hyperbolic): orbits leave it into 1Q
        kd = params.kappa_down
        if p < ps * (1 - 1e-12):
            seeds = [(a0.X + d * math.cos(th), d * math.sin(th))
                     for th in (math.pi / 6, math.pi / 2, 5 * math.pi / 6)]
        else:
            # below the X nullcline near A0 = M0
            seeds = [(a0.X - d * c, 0.5 * kd * d * c) for c in (0.5, 1.0, 2.0)]
        for s in seeds:
            f = _fate_from(s, p, params, "forward", budget)
            zi = _at_infinity(f, [])
            if zi is not None:
                cat.add(AtZero.NTILDE, zi, Cardinality.INFINITE,
                        "orbits issued from A0", f.trajectory)

    cycles: list[PeriodicOrbit] = []
    ups = None
    if m0_in_quadrant(p, params):
        m0 = location(Label.M0, p, params)
        cat.add(AtZero.ALPHA, AtInfinity.SLOW, Cardinality.TRIVIAL,
                "u = C_p r^(-alpha), the stationary orbit M0")
        try:
            found = find_periodic_orbits(p, params)
        except NoCycleFound:
            found = []
        cycles = [c for c in found if c.crosses_concavity]
        if len(found) > len(cycles):
            notes.append(f"{len(found) - len(cycles)} cycle(s) not crossing the concavity "
                         "line twice were discarded")
        for c in cycles:
            cat.add(AtZero.PSEUDO, AtInfinity.PSEUDO_SLOW, Cardinality.UNIQUE,
                    "periodic orbit crossing the concavity line twice", c)
        pp = p_pseudo(params)
        m0_source = ps < p < pp * (1 - 1e-12)
        if m0_source:
            sec = m0_section(p, params)
            for frac in (1e-3, 1e-2, 5e-2):
                r = frac * (params.n0_height - m0.Z)
                f = _fate_from((sec.x, sec.z_min + r), p, params, "forward", budget)
                zi = _at_infinity(f, cycles)
                if zi is not None and zi is not AtInfinity.FAST:
                    cat.add(AtZero.ALPHA, zi, Cardinality.INFINITE,
                            "orbits issued from the source M0", f.trajectory)
        for c in cycles:
            sec = m0_section(p, params)
            for sgn, off in [(g, o) for g in (-1.0, 1.0) for o in (1e-3, 3e-3, 1e-2)]:
                r = c.radius * (1.0 + sgn * off)
                start = (sec.x, sec.z_min + r)
                back = _fate_from(start, p, params, "backward", budget)
                if _at_zero(back) is not AtZero.PSEUDO:
                    continue
                fwd = _fate_from(start, p, params, "forward", budget)
                zi = _at_infinity(fwd, cycles)
                if zi is None or zi is AtInfinity.FAST:
                    continue
                side = "inside" if sgn < 0 else "outside"
                cat.add(AtZero.PSEUDO, zi, Cardinality.INFINITE,
                        f"orbits leaving the cycle at r={c.radius:.6g} on the {side}",
                        fwd.trajectory)
    if p > ps:
        ups = upsilon_fate(p, params, budget)
        z0 = _at_zero(ups)
        if z0 is not None:
            cat.add(z0, AtInfinity.FAST, Cardinality.UNIQUE,
                    "Upsilon, the orbit arriving at A0", ups.trajectory)
        elif ups.verdict is Verdict.TO_STATIONARY and ups.target == "N0":
            notes.append("Upsilon coincides with Gamma (regular fast decaying solution)")
        else:
            notes.append(f"Upsilon backward fate {ups}: not singular")
    return SingularCatalog(p, params.operator.value, list(cat.entries.values()), cycles,
                           ups, notes)


# -- exterior domains ------------------------------------------------------------

@dataclass
class ExteriorVerdict:
    verdict: str            # "Nonexistence" or "OutOfScope"
    p: float
    evidence: dict

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "p": self.p, "evidence": self.evidence}


def _point_in_polygon(x: float, y: float, poly: np.ndarray) -> bool:
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    cond = (py > y) != (qy > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = px + (y - py) * (qx - px) / (qy - py)
    return bool(np.count_nonzero(cond & (x < xint)) % 2 == 1)


def gamma_barrier(traj: Trajectory, params: ProblemParams, p: float) -> np.ndarray:
    """Closed polygon formed by Gamma, a vertical drop and the two axes.

    Gamma is cut where it first turns back at the X nullcline (the point of
    largest X) or, if it reaches the wall, at the blow-up threshold.
    """
    X, Z = traj.X, traj.Z
    n = len(X)
    cut = n
    for e in traj.events:
        if e.kind is EventKind.XNULLCLINE_CROSS:
            cut = int(np.searchsorted(traj.t, e.t))
            break
    x_cap, _ = default_caps(params, EventSpec(), 1)
    keep = slice(0, cut)
    xs, zs = X[keep], Z[keep]
    inside = xs <= x_cap
    xs, zs = xs[inside], zs[inside]
    n0 = location(Label.N0, p, params)
    x_end = float(xs[-1])
    poly = np.vstack([[0.0, 0.0], [0.0, n0.Z], np.column_stack([xs, zs]), [x_end, 0.0]])
    return poly


def exterior_nonexistence_check(p: float, params: ProblemParams, p_star: float | None = None,
                                tol: float = 1e-6, budget: Budget | None = None,
                                n_xi: int = 3) -> ExteriorVerdict:
    """Nonexistence of positive radial solutions outside a ball for p <= p*.

    An exterior solution corresponds to an orbit that blows up backward in
    Z (entering 1Q from Z = +inf) and stays bounded forward.  For p <= p*
    Gamma, the axes and a vertical drop enclose every admissible limit set,
    and such an orbit would have to cross Gamma.  The evidence records the
    barrier tests and the forward fates of a few orbits entering from above.
    """
    check_p(p)
    budget = budget or Budget()
    if p_star is not None:
        in_scope = p <= p_star + tol
        scope_reason = f"p <= p* = {p_star!r}"
    else:
        cls = classify_p(p, params, budget)
        in_scope = cls.label in (PLabel.C, PLabel.F)
        scope_reason = f"class {cls.label.value}"
    if not in_scope:
        return ExteriorVerdict("OutOfScope", p, {"reason": scope_reason})
    # p* is only known to tol; at the critical exponent itself use the C side,
    # where Gamma runs past A0 along the X axis and the barrier encloses it
    p_bar = p
    if p_star is not None and abs(p - p_star) <= tol:
        p_bar = p_star - tol
    traj = gamma_orbit(p_bar, params, budget, stations=("N0", "M0"))
    poly = gamma_barrier(traj, params, p_bar)
    checks = {}
    scale = 1.0 + params.wall
    if m0_in_quadrant(p, params):
        m0 = location(Label.M0, p, params)
        checks["M0_inside"] = _point_in_polygon(m0.X, m0.Z, poly)
    a0 = location(Label.A0, p, params)
    # A0 sits on the X axis; test it against the closed region
    nudge = 1e-9 * scale
    a0_in = _point_in_polygon(a0.X - nudge, nudge, poly)
    a0_gap = float(np.min(np.hypot(poly[:, 0] - a0.X, poly[:, 1] - a0.Z)))
    checks["A0_in_closure"] = bool(a0_in or a0_gap <= 1e-4 * scale)
    cyc_ok = True
    n_cycles = 0
    if m0_in_quadrant(p, params):
        try:
            cycles = find_periodic_orbits(p, params)
        except NoCycleFound:
            cycles = []
        n_cycles = len(cycles)
        for c in cycles:
            pts = c.points[:: max(1, len(c.points) // 50)]
            cyc_ok &= all(_point_in_polygon(x, z, poly) for x, z in pts)
    checks["cycles_inside"] = bool(cyc_ok)
    checks["n_cycles"] = n_cycles
    # orbits entering 1Q from Z = +inf next to the Z axis
    n0 = location(Label.N0, p, params)
    xi = []
    for k in range(n_xi):
        start = (1e-3 * (k + 1) * scale, 2.0 * n0.Z)
        outside = not _point_in_polygon(start[0], start[1], poly)
        f = _fate_from(start, p, params, "forward", budget)
        b = _fate_from(start, p, params, "backward", budget)
        xi.append({"start": list(start), "outside_barrier": outside,
                   "forward": str(f), "backward": str(b)})
    xi_ok = all(x["outside_barrier"] and x["forward"] == "BlowUpX" and x["backward"] == "BlowUpZ"
                for x in xi)
    barrier_ok = all(v for k, v in checks.items() if k != "n_cycles")
    evidence = {"reason": scope_reason, "barrier_p": p_bar, "barrier": checks, "barrier_passes": bool(barrier_ok),
                "xi_orbits": xi, "xi_pass": bool(xi_ok),
                "gamma_in_box": points_in_box(poly[2:-1], params) if len(poly) > 3 else False,
                "barrier_vertices": int(len(poly))}
    verdict = "Nonexistence" if barrier_ok and xi_ok else "Inconclusive"
    return ExteriorVerdict(verdict, p, evidence)
