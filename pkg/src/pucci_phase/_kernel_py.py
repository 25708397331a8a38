"""Pure-Python integration kernel (fallback for the compiled ``_kernel``).

Dormand-Prince 5(4) with the 4th-order continuous extension, event
localisation on the dense output, and forced step splitting at the
concavity line where the vector field has a derivative jump.

The algorithm must stay line-for-line equivalent to ``_kernel.pyx``; the
parity test in ``tests/test_kernel.py`` compares both.
"""
import math

import numpy as np

# event kinds, shared with _kernel.pyx and flow.py
EV_CONCAVITY = 0
EV_XNULL = 1
EV_ZNULL = 2
EV_WALL = 3
EV_CAPTURE = 4
EV_SECTION = 5
EV_BLOWUP_X = 6
EV_BLOWUP_Z = 7

# termination status
ST_HORIZON = 0
ST_CAPTURED = 1
ST_BLOWUP_X = 2
ST_BLOWUP_Z = 3
ST_MAX_STEPS = 4
ST_UNDERFLOW = 5
ST_SECTION_LIMIT = 6
ST_NONFINITE = 7

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
A71, A73, A74, A75, A76 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
D1, D3, D4, D5, D6, D7 = (-12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0,
                          -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
                          -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0)

TAU_EVENT = 1e-12


def field(x, z, fp, quadrant):
    """Right-hand side; ``fp`` = (p, a, N, Ntil, kup, kdn, level, Ntil3, k3)."""
    p = fp[0]
    a = fp[1]
    if quadrant == 3:
        n = fp[7]
        k = fp[8]
    elif z > fp[6]:
        n = fp[2]
        k = fp[4]
    else:
        n = fp[3]
        k = fp[5]
    zk = z / k
    return x * (x - (n - 2.0) + zk), z * (n + a - p * x - zk)


def _xfac(x, z, fp, quadrant):
    if quadrant == 3:
        return x - (fp[7] - 2.0) + z / fp[8]
    if z > fp[6]:
        return x - (fp[2] - 2.0) + z / fp[4]
    return x - (fp[3] - 2.0) + z / fp[5]


def _zfac(x, z, fp, quadrant):
    if quadrant == 3:
        return fp[7] + fp[1] - fp[0] * x - z / fp[8]
    if z > fp[6]:
        return fp[2] + fp[1] - fp[0] * x - z / fp[4]
    return fp[3] + fp[1] - fp[0] * x - z / fp[5]


def _event_value(kind, x, z, fp, quadrant, section):
    if kind == EV_CONCAVITY:
        return z - fp[6]
    if kind == EV_XNULL:
        return _xfac(x, z, fp, quadrant)
    if kind == EV_ZNULL:
        return _zfac(x, z, fp, quadrant)
    if kind == EV_WALL:
        return x - (fp[3] - 2.0)
    return x - section[1]


def _dense(theta, y0, r2, r3, r4, r5):
    t1 = 1.0 - theta
    return y0 + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)))


class _Step:
    """Coefficients of one accepted step's continuous extension."""

    __slots__ = ("x0", "z0", "rx2", "rx3", "rx4", "rx5", "rz2", "rz3", "rz4", "rz5")

    def __init__(self, x0, z0, x1, z1, h, k1x, k1z, k3x, k3z, k4x, k4z, k5x, k5z,
                 k6x, k6z, k7x, k7z):
        self.x0 = x0
        self.z0 = z0
        self.rx2 = x1 - x0
        self.rz2 = z1 - z0
        self.rx3 = h * k1x - self.rx2
        self.rz3 = h * k1z - self.rz2
        self.rx4 = self.rx2 - h * k7x - self.rx3
        self.rz4 = self.rz2 - h * k7z - self.rz3
        self.rx5 = h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x)
        self.rz5 = h * (D1 * k1z + D3 * k3z + D4 * k4z + D5 * k5z + D6 * k6z + D7 * k7z)

    def at(self, theta):
        return (_dense(theta, self.x0, self.rx2, self.rx3, self.rx4, self.rx5),
                _dense(theta, self.z0, self.rz2, self.rz3, self.rz4, self.rz5))


def _rk_step(x, z, h, k1x, k1z, fp, quadrant):
    """One DOPRI5 step.  Returns (x1, z1, err_x, err_z, stages...)."""
    k2x, k2z = field(x + h * A21 * k1x, z + h * A21 * k1z, fp, quadrant)
    k3x, k3z = field(x + h * (A31 * k1x + A32 * k2x), z + h * (A31 * k1z + A32 * k2z),
                     fp, quadrant)
    k4x, k4z = field(x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
                     z + h * (A41 * k1z + A42 * k2z + A43 * k3z), fp, quadrant)
    k5x, k5z = field(x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
                     z + h * (A51 * k1z + A52 * k2z + A53 * k3z + A54 * k4z), fp, quadrant)
    k6x, k6z = field(x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                     z + h * (A61 * k1z + A62 * k2z + A63 * k3z + A64 * k4z + A65 * k5z),
                     fp, quadrant)
    x1 = x + h * (A71 * k1x + A73 * k3x + A74 * k4x + A75 * k5x + A76 * k6x)
    z1 = z + h * (A71 * k1z + A73 * k3z + A74 * k4z + A75 * k5z + A76 * k6z)
    k7x, k7z = field(x1, z1, fp, quadrant)
    ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    ez = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z + E7 * k7z)
    return x1, z1, ex, ez, k3x, k3z, k4x, k4z, k5x, k5z, k6x, k6z, k7x, k7z


def _locate(step, kind, g0, g1, h, fp, quadrant, section):
    """Illinois iteration for the root of an event function on [0, 1]."""
    lo, hi = 0.0, 1.0
    glo, ghi = g0, g1
    tol = TAU_EVENT / max(abs(h), 1e-300)
    side = 0
    theta = 0.5
    for _ in range(200):
        theta = (lo * ghi - hi * glo) / (ghi - glo)
        if not (lo < theta < hi):
            theta = 0.5 * (lo + hi)
        x, z = step.at(theta)
        g = _event_value(kind, x, z, fp, quadrant, section)
        if g == 0.0:
            return theta
        if (g > 0.0) == (glo > 0.0):
            lo, glo = theta, g
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = theta, g
            if side == 1:
                glo *= 0.5
            side = 1
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def _initial_step(x, z, fx, fz, fp, quadrant, rtol, atol, hmax):
    sx = atol + rtol * abs(x)
    sz = atol + rtol * abs(z)
    d0 = math.sqrt(0.5 * ((x / sx) ** 2 + (z / sz) ** 2))
    d1 = math.sqrt(0.5 * ((fx / sx) ** 2 + (fz / sz) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, hmax)
    fx1, fz1 = field(x + h0 * fx, z + h0 * fz, fp, quadrant)
    d2 = math.sqrt(0.5 * (((fx1 - fx) / sx) ** 2 + ((fz1 - fz) / sz) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, hmax)


def integrate_kernel(t0, x0, z0, direction, fp, horizon, rtol, atol, hmax, max_steps,
                     quadrant, caps, stations, section, max_section):
    """Integrate one trajectory.

    Parameters are plain floats / float sequences so that the compiled kernel
    can share the signature:

    caps      (x_cap, z_cap, blow_final, dt_cap)
    stations  rows (X, Z, eps) of points that trigger capture
    section   (enabled, x_section, z_min, orientation)

    Returns ``(ts, xs, zs, ev_kind, ev_t, ev_x, ev_z, ev_sign, ev_info,
    status, nfev, naccept, nreject)``.
    """
    fp = [float(v) for v in fp]
    caps = [float(v) for v in caps]
    section = [float(v) for v in section]
    st = [(float(r[0]), float(r[1]), float(r[2])) for r in stations]
    dirn = 1.0 if direction >= 0 else -1.0
    x_cap, z_cap, blow_final, dt_cap = caps
    level = fp[6]
    sec_on = section[0] != 0.0
    sec_zmin, sec_orient = section[2], section[3]

    ts = [t0]
    xs = [x0]
    zs = [z0]
    ev_kind, ev_t, ev_x, ev_z, ev_sign, ev_info = [], [], [], [], [], []

    t = t0
    x = x0
    z = z0
    nfev = 0
    naccept = 0
    nreject = 0
    nsec = 0
    status = ST_HORIZON
    t_end = t0 + dirn * horizon

    # capture bookkeeping: which station we are near and since when
    cap_idx = -1
    cap_since = 0.0
    for i, (sx_, sz_, se_) in enumerate(st):
        if math.hypot(x - sx_, z - sz_) < se_:
            cap_idx = i
            cap_since = t
            break
    if cap_idx >= 0 and dt_cap <= 0.0:
        ev_kind.append(EV_CAPTURE); ev_t.append(t); ev_x.append(x); ev_z.append(z)
        ev_sign.append(0); ev_info.append(cap_idx)
        return (np.array(ts), np.array(xs), np.array(zs), np.array(ev_kind, dtype=np.int64),
                np.array(ev_t), np.array(ev_x), np.array(ev_z),
                np.array(ev_sign, dtype=np.int64), np.array(ev_info, dtype=np.int64),
                ST_CAPTURED, 0, 0, 0)

    kx, kz = field(x, z, fp, quadrant)
    nfev += 1
    # side of the concavity line the trajectory is heading into
    if quadrant == 3:
        side = 0
    elif z > level:
        side = 1
    elif z < level:
        side = -1
    else:
        vz = dirn * kz
        side = 1 if vz > 1e-14 * (1.0 + abs(z)) else -1

    h = _initial_step(x, z, dirn * kx, dirn * kz, fp, quadrant, rtol, atol, hmax)
    nfev += 1
    blowing = 0  # 1 once an X blow-up has been declared, 2 for Z
    check_kinds = (EV_XNULL, EV_ZNULL, EV_WALL, EV_SECTION) if quadrant == 1 else ()

    while True:
        if naccept >= max_steps:
            status = ST_MAX_STEPS
            break
        if not blowing:
            remaining = (t_end - t) * dirn
            if remaining <= 0.0:
                status = ST_HORIZON
                break
            if h > remaining:
                h = remaining
        hs = dirn * h
        (x1, z1, ex, ez, k3x, k3z, k4x, k4z, k5x, k5z, k6x, k6z,
         k7x, k7z) = _rk_step(x, z, hs, kx, kz, fp, quadrant)
        nfev += 6
        sx = atol + rtol * max(abs(x), abs(x1))
        sz = atol + rtol * max(abs(z), abs(z1))
        err = math.sqrt(0.5 * ((ex / sx) ** 2 + (ez / sz) ** 2))
        if not (math.isfinite(err) and math.isfinite(x1) and math.isfinite(z1)):
            h *= 0.2
            nreject += 1
            if h < 1e-14 * (1.0 + abs(t)):
                status = ST_NONFINITE
                break
            continue
        if err > 1.0:
            fac = max(0.2, 0.9 * err ** -0.2)
            h *= fac
            nreject += 1
            if h < 1e-14 * (1.0 + abs(t)):
                status = ST_UNDERFLOW
                break
            continue

        # accepted; concavity split first
        crossed = False
        if quadrant == 1:
            gc1 = z1 - level
            if (side > 0 and gc1 < 0.0) or (side < 0 and gc1 > 0.0):
                step = _Step(x, z, x1, z1, hs, kx, kz, k3x, k3z, k4x, k4z, k5x, k5z,
                             k6x, k6z, k7x, k7z)
                theta = _locate(step, EV_CONCAVITY, z - level, gc1, hs, fp, quadrant,
                                section)
                hc = theta * h
                if hc > 1e-12 * (1.0 + abs(t)):
                    (x1, z1, ex, ez, k3x, k3z, k4x, k4z, k5x, k5z, k6x, k6z,
                     k7x, k7z) = _rk_step(x, z, dirn * hc, kx, kz, fp, quadrant)
                    nfev += 6
                    z1 = level
                    k7x, k7z = field(x1, z1, fp, quadrant)
                    nfev += 1
                    h_next = h
                    h = hc
                    hs = dirn * h
                    crossed = True
                else:
                    side = 1 if gc1 > 0.0 else -1
        step = _Step(x, z, x1, z1, hs, kx, kz, k3x, k3z, k4x, k4z, k5x, k5z,
                     k6x, k6z, k7x, k7z)
        t1 = t + hs
        # events other than the concavity line, in order of occurrence
        found = []
        for kind in check_kinds:
            if kind == EV_SECTION and not sec_on:
                continue
            g0 = _event_value(kind, x, z, fp, quadrant, section)
            g1 = _event_value(kind, x1, z1, fp, quadrant, section)
            if g0 * g1 < 0.0 or (g1 == 0.0 and g0 != 0.0):
                theta = _locate(step, kind, g0, g1, hs, fp, quadrant, section) if g1 != 0.0 \
                    else 1.0
                ex_, ez_ = step.at(theta)
                sgn = 1 if g1 > g0 else -1
                if kind == EV_SECTION:
                    if ez_ <= sec_zmin or sgn * dirn * sec_orient <= 0:
                        continue
                found.append((theta, kind, ex_, ez_, sgn))
        if crossed:
            sgn = 1 if side < 0 else -1
            found.append((1.0, EV_CONCAVITY, x1, z1, sgn))
        found.sort(key=lambda e: e[0])
        sec_stop = False
        for theta, kind, ex_, ez_, sgn in found:
            ev_kind.append(kind)
            ev_t.append(t + theta * hs)
            ev_x.append(ex_)
            ev_z.append(ez_)
            ev_sign.append(sgn)
            ev_info.append(0)
            if kind == EV_SECTION:
                nsec += 1
                if max_section > 0 and nsec >= max_section:
                    sec_stop = True

        t = t1
        x = x1
        z = z1
        kx, kz = k7x, k7z
        naccept += 1
        ts.append(t)
        xs.append(x)
        zs.append(z)

        if crossed:
            vz = dirn * kz
            if vz > 1e-14 * (1.0 + abs(z)):
                side = 1
            elif vz < -1e-14 * (1.0 + abs(z)):
                side = -1
            else:
                side = -1
            h = h_next
        else:
            fac = min(10.0, max(0.2, 0.9 * max(err, 1e-10) ** -0.2))
            h = min(h * fac, hmax)

        if sec_stop:
            status = ST_SECTION_LIMIT
            break

        if blowing:
            if blowing == 1 and abs(x) >= blow_final:
                ev_kind.append(EV_BLOWUP_X); ev_t.append(t + dirn * abs(x / kx))
                ev_x.append(x); ev_z.append(z); ev_sign.append(0); ev_info.append(0)
                status = ST_BLOWUP_X
                break
            if blowing == 2 and abs(z) >= blow_final:
                ev_kind.append(EV_BLOWUP_Z); ev_t.append(t + dirn * abs(z / kz))
                ev_x.append(x); ev_z.append(z); ev_sign.append(0); ev_info.append(0)
                status = ST_BLOWUP_Z
                break
            continue

        # blow-up thresholds: magnitude beyond cap and still growing
        if abs(x) >= x_cap and dirn * kx * x > 0.0:
            blowing = 1
            continue
        if abs(z) >= z_cap and dirn * kz * z > 0.0:
            blowing = 2
            continue

        # capture
        if cap_idx >= 0:
            sx_, sz_, se_ = st[cap_idx]
            if math.hypot(x - sx_, z - sz_) >= se_:
                cap_idx = -1
        if cap_idx < 0:
            for i, (sx_, sz_, se_) in enumerate(st):
                if math.hypot(x - sx_, z - sz_) < se_:
                    cap_idx = i
                    cap_since = t
                    break
        if cap_idx >= 0 and abs(t - cap_since) >= dt_cap:
            ev_kind.append(EV_CAPTURE); ev_t.append(t); ev_x.append(x); ev_z.append(z)
            ev_sign.append(0); ev_info.append(cap_idx)
            status = ST_CAPTURED
            break

    return (np.array(ts), np.array(xs), np.array(zs), np.array(ev_kind, dtype=np.int64),
            np.array(ev_t, dtype=float), np.array(ev_x, dtype=float),
            np.array(ev_z, dtype=float), np.array(ev_sign, dtype=np.int64),
            np.array(ev_info, dtype=np.int64),
            status, nfev, naccept, nreject)
