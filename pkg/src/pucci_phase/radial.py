"""Radial profiles: reconstruction from orbits, energy, decay constants and an
independent shooting oracle for the second-order equation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .field import TAU_LINE, vector_field_array
from .flow import (Direction, EventKind, EventSpec, NoCycleFound, StepSizeUnderflow,
                   Trajectory, Verdict, analyze_returns, fate_of, find_periodic_orbits,
                   m0_section)
from .params import ProblemParams, check_p
from .stationary import Label, location, m0_in_quadrant

TAU_RES = 1e-6
TAU_ROUND = 1e-8
# samples whose radial quantities leave this log range are not representable
LOG_RANGE = math.log(1e280)


class EmptyTrajectory(ValueError):
    pass


class NonPositiveXZ(ValueError):
    pass


class VanishingDerivative(ValueError):
    pass


class UnresolvedFate(RuntimeError):
    pass


class WrongRegion(ValueError):
    """Energy requested outside the convex region."""


@dataclass
class RadialSolution:
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    ddu: np.ndarray
    p: float
    params: ProblemParams
    gamma: float | None = None
    wall_radius: float | None = None
    classification: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    # r^alpha u and r^(alpha+1) u' along the shooting path, if available
    w: np.ndarray | None = None
    V: np.ndarray | None = None
    # (R, 0, u'(R), u''(R)) at the first zero, if the profile vanishes
    wall_data: tuple | None = None

    def __len__(self) -> int:
        return len(self.r)

    @property
    def samples(self) -> list[tuple[float, float, float, float]]:
        return [(float(a), float(b), float(c), float(d))
                for a, b, c, d in zip(self.r, self.u, self.du, self.ddu)]

    @property
    def at_infinity(self) -> str | None:
        return self.classification.get("at_infinity")


# -- the second-order equation ------------------------------------------------

def _pucci_second(y, params: ProblemParams):
    """u'' from kappa(u'') u'' = y: the divisor depends on the sign of u''."""
    return np.where(y > 0, y / params.kappa_down, y / params.kappa_up)


def second_derivative(r, u, du, p: float, params: ProblemParams):
    """u'' solving the radial equation for a decreasing positive profile."""
    r, u, du = (np.asarray(v, dtype=float) for v in (r, u, du))
    y = -params.kappa_up * (params.N - 1) * du / r - r ** params.a * np.abs(u) ** p
    return _pucci_second(y, params)


def ode_residual(sol: RadialSolution) -> np.ndarray:
    """Relative residual of the radial equation at each sample."""
    prm, p = sol.params, sol.p
    kap = np.where(sol.ddu > 0, prm.kappa_down, prm.kappa_up)
    first = prm.kappa_up * (prm.N - 1) * sol.du / sol.r
    src = sol.r ** prm.a * sol.u ** p
    res = kap * sol.ddu + first + src
    scale = np.abs(kap * sol.ddu) + np.abs(first) + np.abs(src)
    scale[scale == 0.0] = 1.0
    return np.abs(res) / scale


# -- phase <-> radial ------------------------------------------------------------

def reconstruct_u(traj: Trajectory, p: float, params: ProblemParams,
                  anchor: tuple[float, float] | None = None) -> RadialSolution:
    """u(r) = r^(-alpha) (XZ)^(1/(p-1)) with r = e^t along a 1Q trajectory.

    With ``anchor = (t0, u0)`` the profile is rescaled (v = tau u(tau^(1/alpha) r))
    so that the sample at time t0 takes the value u0; this shifts radii by
    the matching factor.  u' = -X u / r and u'' is taken from the phase
    velocity, u'' = (u/r^2)(X + X^2 - Xdot), so the equation residual is a
    genuine check of the reconstruction.

    Far along an orbit u, u' or r^a u^p may leave the double range although
    X and Z are moderate; the profile is cut before the first such sample and
    the cut radius is recorded as ``classification["truncated_at_r"]``.
    """
    check_p(p)
    if traj is None or len(traj.t) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    t, X, Z = np.asarray(traj.t, float), np.asarray(traj.X, float), np.asarray(traj.Z, float)
    if traj.direction is Direction.BACKWARD:
        t, X, Z = t[::-1], X[::-1], Z[::-1]
    xz = X * Z
    if np.any(~(xz > 0)) or np.any(X < 0):
        raise NonPositiveXZ("reconstruction needs X > 0 and Z > 0 at every sample")
    al = params.alpha(p)
    shift = 0.0
    if anchor is not None:
        t0, u0 = anchor
        if not u0 > 0:
            raise ValueError("anchor value must be positive")
        uc = math.exp(-al * t0) * float(np.interp(t0, t, xz)) ** (1.0 / (p - 1.0))
        shift = math.log(u0 / uc) / al
    # sample at time t sits at radius e^(t - shift) with value e^(alpha shift) u_c
    log_r = t - shift
    log_u = -al * t + np.log(xz) / (p - 1.0) + al * shift
    with np.errstate(divide="ignore"):
        logs = np.vstack([log_r, log_u, np.log(X) + log_u - log_r, log_u - 2.0 * log_r,
                          params.a * log_r + p * log_u])
    bad = np.flatnonzero(np.any(np.abs(logs) > LOG_RANGE, axis=0))
    cut_r = None
    if len(bad):
        k = int(bad[0])
        if k == 0:
            raise NonPositiveXZ("first sample lies outside the representable range")
        cut_r = math.exp(log_r[k])
        t, X, Z, log_r, log_u = t[:k], X[:k], Z[:k], log_r[:k], log_u[:k]
    r = np.exp(log_r)
    u = np.exp(log_u)
    du = -X * u / r
    xdot, _ = vector_field_array(X, Z, p, params)
    ddu = u / r ** 2 * (X + X * X - xdot)
    sol = RadialSolution(r, u, du, ddu, p, params)
    if cut_r is not None:
        sol.classification["truncated_at_r"] = cut_r
    blow = [e for e in traj.events if e.kind is EventKind.BLOWUP_X]
    if blow:
        sol.wall_radius = math.exp(blow[0].t - shift)
    return sol


def to_phase(sol: RadialSolution, params: ProblemParams | None = None,
             p: float | None = None) -> Trajectory:
    """X = -r u'/u, Z = -r^(1+a) u^p / u', t = ln r."""
    params = params or sol.params
    p = sol.p if p is None else p
    r, u, du = sol.r, sol.u, sol.du
    if np.any(~(u > 0)):
        raise ValueError("u must be positive")
    if np.any(du == 0.0) or np.any(np.abs(du) <= 1e-300):
        raise VanishingDerivative("u' vanishes at a sample")
    X = -r * du / u
    # logarithms keep Z finite where u^p alone would underflow
    Z = -np.sign(du) * np.exp((1.0 + params.a) * np.log(r) + p * np.log(u) - np.log(np.abs(du)))
    return Trajectory(np.log(r), X, Z, [], Direction.FORWARD, p, params, "reconstructed", 0)


# -- energy ----------------------------------------------------------------------

@dataclass
class EnergyValue:
    value: float
    region_valid: bool


def energy(point, p: float, params: ProblemParams, t: float = 0.0) -> EnergyValue:
    """Phase form of the energy in the convex region (closure).

    E = e^{t(N~-2-2 alpha)} X (XZ)^{2/(p-1)} {X/2 + Z/(k(p+1)) - (N~+a)/(p+1)},
    k the divisor below the concavity line; for a = 0 the exponent 2/(p-1)
    equals alpha.  When lam = Lam the field has no interface and the whole of
    1Q is admissible.
    """
    check_p(p)
    x, z = (float(v) for v in point)
    level = params.concavity_level
    if params.kappa_up == params.kappa_down:
        level = math.inf
    if not (x > 0 and z > 0) or z > level * (1.0 + TAU_LINE):
        raise WrongRegion(f"({x:g}, {z:g}) is not in the convex region of 1Q")
    nt, k, a = params.n_tilde, params.kappa_down, params.a
    al = params.alpha(p)
    val = (math.exp(t * (nt - 2.0 - 2.0 * al)) * x * (x * z) ** (2.0 / (p - 1.0))
           * (0.5 * x + z / (k * (p + 1.0)) - (nt + a) / (p + 1.0)))
    return EnergyValue(val, True)


def energy_radial(r: float, u: float, du: float, ddu: float, p: float,
                  params: ProblemParams) -> EnergyValue:
    """E(r) = r^N~ (u'^2/2 + r^a u^{p+1}/(k(p+1))) + (N~+a)/(p+1) u u' r^{N~-1}, u'' >= 0."""
    check_p(p)
    if ddu < 0:
        raise WrongRegion("radial energy is defined where u'' >= 0")
    nt, k, a = params.n_tilde, params.kappa_down, params.a
    val = (r ** nt * (0.5 * du * du + r ** a * u ** (p + 1.0) / (k * (p + 1.0)))
           + (nt + a) / (p + 1.0) * u * du * r ** (nt - 1.0))
    return EnergyValue(val, True)


def energy_rate_coefficient(p: float, params: ProblemParams) -> float:
    """dE/dr = r^{N~-1} u'^2 times this coefficient (zero at the pseudo exponent)."""
    nt = params.n_tilde
    return (nt + params.a) / (p + 1.0) - 0.5 * (nt - 2.0)


def level_function(X, p: float, params: ProblemParams):
    """h(X) = (N~+a-pX) X^p, the energy level read on the Z nullcline."""
    X = np.asarray(X, dtype=float)
    return (params.n_tilde + params.a - p * X) * X ** p


# -- shooting oracle ---------------------------------------------------------------

@dataclass(frozen=True)
class ShootingOptions:
    rtol: float = 1e-11
    atol: float = 1e-14
    r0_rel: float = 1e-6
    chunk: float = 20.0          # in ln r between fate checks
    amp_eps: float = 1e-7
    slope_tol: float = 0.05


def _ef_rhs(params: ProblemParams, p: float):
    al = params.alpha(p)
    ku, kd, n1 = params.kappa_up, params.kappa_down, params.N - 1

    def rhs(s, y):
        w, V = y
        q = -ku * n1 * V - max(w, 0.0) ** p
        return [V + al * w, (1.0 + al) * V + (q / kd if q > 0 else q / ku)]
    return rhs


def shoot_regular(gamma: float, p: float, params: ProblemParams, r_max: float = 1e150,
                  options: ShootingOptions | None = None) -> RadialSolution:
    """Integrate u'' from the series start at r0 until u = 0, r_max or a decided fate.

    Works in w = r^alpha u and V = r^(alpha+1) u' against s = ln r, where the
    equation is autonomous; steps are restarted at every change of concavity.
    The fate at infinity is read from the shooting data alone: a zero, the
    limit of -r u'/u, and the amplitude of the oscillations of w.
    """
    check_p(p)
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    opt = options or ShootingOptions()
    prm = params
    a, al, ku = prm.a, prm.alpha(p), prm.kappa_up
    r0 = opt.r0_rel * gamma ** (-(p - 1.0) / (2.0 + a))
    c = gamma ** p / (ku * (prm.N + a))
    u0 = gamma - c * r0 ** (2.0 + a) / (2.0 + a)
    du0 = -c * r0 ** (1.0 + a)
    s, s_end = math.log(r0), math.log(r_max)
    y = np.array([r0 ** al * u0, r0 ** (al + 1.0) * du0])
    rhs = _ef_rhs(prm, p)

    def zero(s_, y_):
        return y_[0]
    zero.terminal, zero.direction = True, -1

    def concav(s_, y_):
        return -ku * (prm.N - 1) * y_[1] - max(y_[0], 0.0) ** p
    concav.terminal = True

    def extremum(s_, y_):
        return y_[1] + al * y_[0]

    S, W, VV = [s], [y[0]], [y[1]]
    ext_s, ext_w = [], []
    verdict, wall, v_wall = None, None, None
    next_check = s + opt.chunk
    n_concav = 0
    while s < s_end and (verdict is None or (verdict == "slow" and not _settled(ext_w, W))):
        stop = min(s_end, next_check)
        sol = solve_ivp(rhs, (s, stop), y, method="DOP853", rtol=opt.rtol, atol=opt.atol,
                        events=(zero, concav, extremum), dense_output=False)
        if sol.status < 0:
            raise StepSizeUnderflow(sol.message)
        S.extend(sol.t[1:])
        W.extend(sol.y[0, 1:])
        VV.extend(sol.y[1, 1:])
        for se, ye in zip(sol.t_events[2], sol.y_events[2]):
            ext_s.append(float(se))
            ext_w.append(float(ye[0]))
        s, y = float(sol.t[-1]), sol.y[:, -1].copy()
        if sol.status == 1:
            if len(sol.t_events[0]):
                wall = math.exp(float(sol.t_events[0][0]))
                v_wall = float(sol.y_events[0][0][1])
                verdict = "vanishes"
                break
            n_concav += 1
            # step off the kink so the next call does not stop immediately
            sol2 = solve_ivp(rhs, (s, s + 1e-9), y, method="RK45", rtol=opt.rtol, atol=opt.atol)
            s, y = float(sol2.t[-1]), sol2.y[:, -1].copy()
            continue
        if s >= next_check:
            next_check = s + opt.chunk
            if verdict is not None:
                continue
            verdict = _decide(np.array(S), np.array(W), np.array(VV), ext_w, prm, p, opt,
                              final=False)
    S, W, VV = np.array(S), np.array(W), np.array(VV)
    if verdict is None:
        verdict = _decide(S, W, VV, ext_w, prm, p, opt, final=True)
    keep = W > 0
    S, W, VV = S[keep], W[keep], VV[keep]
    r = np.exp(S)
    u = W * r ** (-al)
    du = VV * r ** (-al - 1.0)
    ok = (u > 1e-300) & (du < 0)
    r, u, du, Wk, Vk = r[ok], u[ok], du[ok], W[ok], VV[ok]
    ddu = second_derivative(r, u, du, p, prm)
    res = RadialSolution(r, u, du, ddu, p, prm, gamma, wall,
                         {"at_zero": "regular", "at_infinity": verdict,
                          "concavity_changes": n_concav, "n_extrema": len(ext_w)},
                         w=Wk, V=Vk)
    res.constants = _shooting_constants(res, ext_w, verdict, prm, p)
    if wall is not None:
        du_w = v_wall * wall ** (-al - 1.0)
        ddu_w = float(second_derivative(wall, 0.0, du_w, p, prm))
        res.wall_data = (wall, 0.0, du_w, ddu_w)
    return res


def _settled(ext_w: list[float], W: list[float], rel: float = 1e-10) -> bool:
    """Oscillation of w has died out (slow decay constant readable)."""
    return len(ext_w) >= 2 and abs(ext_w[-1] - ext_w[-2]) <= rel * abs(W[-1])


def _amplitudes(ext_w: list[float]) -> list[float]:
    return [abs(ext_w[i + 1] - ext_w[i]) for i in range(len(ext_w) - 1)]


def _decide(S, W, V, ext_w, prm: ProblemParams, p: float, opt: ShootingOptions,
            final: bool) -> str | None:
    al = prm.alpha(p)
    amps = _amplitudes(ext_w)
    if len(amps) >= 6:
        info = analyze_returns(amps[::2], opt.amp_eps * (1.0 + abs(W[-1])))
        if info["verdict"] == "point":
            return "slow"
        if info["verdict"] == "cycle":
            return "pseudo-slow"
    if not final:
        return None
    # local slope -r u'/u over the last decade of r
    tail = (S >= S[-1] - math.log(10.0)) & (W > 0)
    if not tail.any():
        return "undetermined"
    slope = float(np.median(-V[tail] / W[tail]))
    if abs(slope - (prm.n_tilde - 2.0)) <= opt.slope_tol:
        return "fast"
    if abs(slope - al) <= opt.slope_tol:
        return "slow"
    return "undetermined"


def _shooting_constants(sol: RadialSolution, ext_w, verdict, prm, p) -> dict:
    out: dict = {}
    if len(sol) == 0:
        return out
    if verdict == "fast":
        out["c_fast"] = float(sol.u[-1] * sol.r[-1] ** (prm.n_tilde - 2.0))
    elif verdict == "slow":
        out["C_slow"] = float(sol.w[-1])
    elif verdict == "pseudo-slow" and len(ext_w) >= 2:
        last = ext_w[-2:]
        out["c1"], out["c2"] = float(min(last)), float(max(last))
    return out


def oracle_class(p: float, params: ProblemParams, gamma: float = 1.0,
                 r_max: float = 1e150) -> str:
    """C/F/P/S from shooting alone."""
    sol = shoot_regular(gamma, p, params, r_max)
    return {"vanishes": "C", "fast": "F", "slow": "S", "pseudo-slow": "P"}.get(
        sol.at_infinity, "undetermined")


# -- decay constants ---------------------------------------------------------------

@dataclass
class DecayConstants:
    kind: str
    c_fast: float | None = None
    C_slow: float | None = None
    C_p: float | None = None
    c1: float | None = None
    c2: float | None = None
    xz_end: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def slow_constant(p: float, params: ProblemParams) -> float:
    """C_p = (X0 Z0)^(1/(p-1)) of the singular solution C_p r^(-alpha)."""
    m0 = location(Label.M0, p, params)
    return (m0.X * m0.Z) ** (1.0 / (p - 1.0))


def _fast_plateau(sol: RadialSolution, traj: Trajectory, params: ProblemParams) -> float:
    """u r^(N~-2) where it is flattest on the approach to A0.

    The last samples before capture drift along the unstable X direction of
    A0, so the value at the end is less accurate than the plateau.
    """
    c = sol.u * sol.r ** (params.n_tilde - 2.0)
    n = len(c)
    if n < 3:
        return float(c[-1])
    rate = np.abs(np.diff(np.log(c)) / np.diff(np.log(sol.r)))
    a0x = params.n_tilde - 2.0
    X, Z = traj.X, traj.Z
    if traj.direction is Direction.BACKWARD:
        X, Z = X[::-1], Z[::-1]
    near = np.hypot(X[1:n] - a0x, Z[1:n]) < 1e-2 * (1.0 + a0x)
    idx = np.flatnonzero(near)
    if len(idx) == 0:
        return float(c[-1])
    return float(c[idx[np.argmin(rate[idx])] + 1])


def decay_constants(obj, p: float, params: ProblemParams) -> DecayConstants:
    """Decay constants of a resolved trajectory or shooting solution."""
    check_p(p)
    if isinstance(obj, RadialSolution):
        kind = obj.at_infinity
        c = obj.constants
        if kind == "fast":
            return DecayConstants("fast", c_fast=c["c_fast"])
        if kind == "slow":
            return DecayConstants("slow", C_slow=c["C_slow"], C_p=slow_constant(p, params))
        if kind == "pseudo-slow" and "c1" in c:
            return DecayConstants("pseudo-slow", c1=c["c1"], c2=c["c2"])
        raise UnresolvedFate(f"shooting fate {kind!r} has no decay constants")
    traj: Trajectory = obj
    if len(traj.t) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    last = traj.events[-1] if traj.events else None
    if last is not None and last.kind is EventKind.STATIONARY_CAPTURE and last.detail == "A0":
        sol = reconstruct_u(traj, p, params)
        return DecayConstants("fast", c_fast=_fast_plateau(sol, traj, params))
    if m0_in_quadrant(p, params):
        m0 = location(Label.M0, p, params)
        end = traj.end
        near = math.hypot(end.X - m0.X, end.Z - m0.Z) <= 1e-5 * (1.0 + math.hypot(m0.X, m0.Z))
        captured = (last is not None and last.kind is EventKind.STATIONARY_CAPTURE
                    and last.detail == "M0")
        if captured or near:
            xz = end.X * end.Z
            return DecayConstants("slow", C_slow=xz ** (1.0 / (p - 1.0)),
                                  C_p=slow_constant(p, params), xz_end=xz)
        fate = fate_of(traj, p, params, EventSpec(section=m0_section(p, params)))
        if fate.verdict is Verdict.TO_PERIODIC_ORBIT:
            r_inf = fate.certificate["r_inf"]
            try:
                cycles = find_periodic_orbits(p, params)
            except NoCycleFound:
                cycles = []
            if cycles:
                cyc = min(cycles, key=lambda c: abs(c.radius - r_inf))
                e = 1.0 / (p - 1.0)
                return DecayConstants("pseudo-slow", c1=cyc.xz_min ** e, c2=cyc.xz_max ** e)
    raise UnresolvedFate("trajectory fate is not resolved to A0, M0 or a cycle")
