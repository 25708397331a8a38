# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernel.

Same algorithm and signature as ``_kernel_py.integrate_kernel``; only the
inner loop is typed.  Keep the two in step.
"""
import numpy as np

from libc.math cimport fabs, sqrt, hypot, isfinite, pow

cdef enum:
    EV_CONCAVITY = 0
    EV_XNULL = 1
    EV_ZNULL = 2
    EV_WALL = 3
    EV_CAPTURE = 4
    EV_SECTION = 5
    EV_BLOWUP_X = 6
    EV_BLOWUP_Z = 7

cdef enum:
    ST_HORIZON = 0
    ST_CAPTURED = 1
    ST_BLOWUP_X = 2
    ST_BLOWUP_Z = 3
    ST_MAX_STEPS = 4
    ST_UNDERFLOW = 5
    ST_SECTION_LIMIT = 6
    ST_NONFINITE = 7

cdef double C2 = 1.0 / 5.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0
cdef double D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0
cdef double D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0

cdef double TAU_EVENT = 1e-12


cdef struct Params:
    double p, a, N, nt, kup, kdn, level, nt3, k3
    int quadrant
    double sec_x


cdef struct Stage:
    double x1, z1, ex, ez, k3x, k3z, k4x, k4z, k5x, k5z, k6x, k6z, k7x, k7z


cdef struct Dense:
    double x0, z0, rx2, rx3, rx4, rx5, rz2, rz3, rz4, rz5


cdef inline void field(double x, double z, Params* P, double* fx, double* fz) nogil:
    cdef double n, k, zk
    if P.quadrant == 3:
        n = P.nt3
        k = P.k3
    elif z > P.level:
        n = P.N
        k = P.kup
    else:
        n = P.nt
        k = P.kdn
    zk = z / k
    fx[0] = x * (x - (n - 2.0) + zk)
    fz[0] = z * (n + P.a - P.p * x - zk)


cdef inline double xfac(double x, double z, Params* P) nogil:
    if P.quadrant == 3:
        return x - (P.nt3 - 2.0) + z / P.k3
    if z > P.level:
        return x - (P.N - 2.0) + z / P.kup
    return x - (P.nt - 2.0) + z / P.kdn


cdef inline double zfac(double x, double z, Params* P) nogil:
    if P.quadrant == 3:
        return P.nt3 + P.a - P.p * x - z / P.k3
    if z > P.level:
        return P.N + P.a - P.p * x - z / P.kup
    return P.nt + P.a - P.p * x - z / P.kdn


cdef inline double event_value(int kind, double x, double z, Params* P) nogil:
    if kind == EV_CONCAVITY:
        return z - P.level
    if kind == EV_XNULL:
        return xfac(x, z, P)
    if kind == EV_ZNULL:
        return zfac(x, z, P)
    if kind == EV_WALL:
        return x - (P.nt - 2.0)
    return x - P.sec_x


cdef inline double dense1(double theta, double y0, double r2, double r3, double r4,
                          double r5) nogil:
    cdef double t1 = 1.0 - theta
    return y0 + theta * (r2 + t1 * (r3 + theta * (r4 + t1 * r5)))


cdef void make_dense(Dense* d, double x0, double z0, double h, double k1x, double k1z,
                     Stage* s) nogil:
    d.x0 = x0
    d.z0 = z0
    d.rx2 = s.x1 - x0
    d.rz2 = s.z1 - z0
    d.rx3 = h * k1x - d.rx2
    d.rz3 = h * k1z - d.rz2
    d.rx4 = d.rx2 - h * s.k7x - d.rx3
    d.rz4 = d.rz2 - h * s.k7z - d.rz3
    d.rx5 = h * (D1 * k1x + D3 * s.k3x + D4 * s.k4x + D5 * s.k5x + D6 * s.k6x + D7 * s.k7x)
    d.rz5 = h * (D1 * k1z + D3 * s.k3z + D4 * s.k4z + D5 * s.k5z + D6 * s.k6z + D7 * s.k7z)


cdef inline void dense_at(Dense* d, double theta, double* x, double* z) nogil:
    x[0] = dense1(theta, d.x0, d.rx2, d.rx3, d.rx4, d.rx5)
    z[0] = dense1(theta, d.z0, d.rz2, d.rz3, d.rz4, d.rz5)


cdef void rk_step(double x, double z, double h, double k1x, double k1z, Params* P,
                  Stage* s) nogil:
    cdef double k2x, k2z
    field(x + h * A21 * k1x, z + h * A21 * k1z, P, &k2x, &k2z)
    field(x + h * (A31 * k1x + A32 * k2x), z + h * (A31 * k1z + A32 * k2z), P,
          &s.k3x, &s.k3z)
    field(x + h * (A41 * k1x + A42 * k2x + A43 * s.k3x),
          z + h * (A41 * k1z + A42 * k2z + A43 * s.k3z), P, &s.k4x, &s.k4z)
    field(x + h * (A51 * k1x + A52 * k2x + A53 * s.k3x + A54 * s.k4x),
          z + h * (A51 * k1z + A52 * k2z + A53 * s.k3z + A54 * s.k4z), P, &s.k5x, &s.k5z)
    field(x + h * (A61 * k1x + A62 * k2x + A63 * s.k3x + A64 * s.k4x + A65 * s.k5x),
          z + h * (A61 * k1z + A62 * k2z + A63 * s.k3z + A64 * s.k4z + A65 * s.k5z),
          P, &s.k6x, &s.k6z)
    s.x1 = x + h * (A71 * k1x + A73 * s.k3x + A74 * s.k4x + A75 * s.k5x + A76 * s.k6x)
    s.z1 = z + h * (A71 * k1z + A73 * s.k3z + A74 * s.k4z + A75 * s.k5z + A76 * s.k6z)
    field(s.x1, s.z1, P, &s.k7x, &s.k7z)
    s.ex = h * (E1 * k1x + E3 * s.k3x + E4 * s.k4x + E5 * s.k5x + E6 * s.k6x + E7 * s.k7x)
    s.ez = h * (E1 * k1z + E3 * s.k3z + E4 * s.k4z + E5 * s.k5z + E6 * s.k6z + E7 * s.k7z)


cdef double locate(Dense* d, int kind, double g0, double g1, double h, Params* P) nogil:
    cdef double lo = 0.0, hi = 1.0, glo = g0, ghi = g1
    cdef double tol = TAU_EVENT / (fabs(h) if fabs(h) > 1e-300 else 1e-300)
    cdef int side = 0, it
    cdef double theta = 0.5, x, z, g
    for it in range(200):
        theta = (lo * ghi - hi * glo) / (ghi - glo)
        if not (lo < theta < hi):
            theta = 0.5 * (lo + hi)
        dense_at(d, theta, &x, &z)
        g = event_value(kind, x, z, P)
        if g == 0.0:
            return theta
        if (g > 0.0) == (glo > 0.0):
            lo = theta
            glo = g
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi = theta
            ghi = g
            if side == 1:
                glo *= 0.5
            side = 1
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


cdef double initial_step(double x, double z, double fx, double fz, Params* P, double rtol,
                         double atol, double hmax) nogil:
    cdef double sx = atol + rtol * fabs(x)
    cdef double sz = atol + rtol * fabs(z)
    cdef double d0 = sqrt(0.5 * ((x / sx) ** 2 + (z / sz) ** 2))
    cdef double d1 = sqrt(0.5 * ((fx / sx) ** 2 + (fz / sz) ** 2))
    cdef double h0, h1, fx1, fz1, d2, dm
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    if h0 > hmax:
        h0 = hmax
    field(x + h0 * fx, z + h0 * fz, P, &fx1, &fz1)
    d2 = sqrt(0.5 * (((fx1 - fx) / sx) ** 2 + ((fz1 - fz) / sz) ** 2)) / h0
    dm = d1 if d1 > d2 else d2
    if dm <= 1e-15:
        h1 = h0 * 1e-3
        if h1 < 1e-6:
            h1 = 1e-6
    else:
        h1 = pow(0.01 / dm, 0.2)
    if 100.0 * h0 < h1:
        h1 = 100.0 * h0
    if hmax < h1:
        h1 = hmax
    return h1


def integrate_kernel(double t0, double x0, double z0, direction, fp, double horizon,
                     double rtol, double atol, double hmax, long max_steps, int quadrant,
                     caps, stations, section, long max_section):
    """Integrate one trajectory; see ``_kernel_py.integrate_kernel``."""
    cdef Params P
    P.p = fp[0]; P.a = fp[1]; P.N = fp[2]; P.nt = fp[3]; P.kup = fp[4]
    P.kdn = fp[5]; P.level = fp[6]; P.nt3 = fp[7]; P.k3 = fp[8]
    P.quadrant = quadrant
    P.sec_x = float(section[1])
    cdef double dirn = 1.0 if direction >= 0 else -1.0
    cdef double x_cap = caps[0], z_cap = caps[1], blow_final = caps[2], dt_cap = caps[3]
    cdef double level = P.level
    cdef bint sec_on = float(section[0]) != 0.0
    cdef double sec_zmin = float(section[2]), sec_orient = float(section[3])

    cdef Py_ssize_t nst = len(stations), i
    st_arr = np.zeros((max(nst, 1), 3))
    for i in range(nst):
        st_arr[i, 0] = float(stations[i][0])
        st_arr[i, 1] = float(stations[i][1])
        st_arr[i, 2] = float(stations[i][2])
    cdef double[:, ::1] st = st_arr

    # growable output buffers
    cdef Py_ssize_t cap_n = 1024, n = 0
    ts_a = np.empty(cap_n)
    xs_a = np.empty(cap_n)
    zs_a = np.empty(cap_n)
    cdef double[::1] ts = ts_a, xs = xs_a, zs = zs_a
    ev_kind, ev_t, ev_x, ev_z, ev_sign, ev_info = [], [], [], [], [], []

    cdef double t = t0, x = x0, z = z0
    cdef long nfev = 0, naccept = 0, nreject = 0, nsec = 0
    cdef int status = ST_HORIZON
    cdef double t_end = t0 + dirn * horizon
    cdef long cap_idx = -1
    cdef double cap_since = 0.0

    ts[0] = t; xs[0] = x; zs[0] = z
    n = 1

    for i in range(nst):
        if hypot(x - st[i, 0], z - st[i, 1]) < st[i, 2]:
            cap_idx = i
            cap_since = t
            break
    if cap_idx >= 0 and dt_cap <= 0.0:
        return (ts_a[:1].copy(), xs_a[:1].copy(), zs_a[:1].copy(),
                np.array([EV_CAPTURE], dtype=np.int64), np.array([t]), np.array([x]),
                np.array([z]), np.array([0], dtype=np.int64),
                np.array([cap_idx], dtype=np.int64), ST_CAPTURED, 0, 0, 0)

    cdef double kx, kz, vz
    field(x, z, &P, &kx, &kz)
    nfev += 1
    cdef int side
    if quadrant == 3:
        side = 0
    elif z > level:
        side = 1
    elif z < level:
        side = -1
    else:
        vz = dirn * kz
        side = 1 if vz > 1e-14 * (1.0 + fabs(z)) else -1

    cdef double h = initial_step(x, z, dirn * kx, dirn * kz, &P, rtol, atol, hmax)
    nfev += 1
    cdef int blowing = 0
    cdef int kinds[4]
    kinds[0] = EV_XNULL; kinds[1] = EV_ZNULL; kinds[2] = EV_WALL; kinds[3] = EV_SECTION
    cdef int nkinds = 4 if quadrant == 1 else 0

    cdef Stage s
    cdef Dense d
    cdef double hs, sx, sz, err, fac, remaining, gc1, theta, hc, h_next = 0.0, t1
    cdef double g0, g1, exv, ezv
    cdef bint crossed, sec_stop
    cdef int kind, sgn, j, m
    # per-step found events (at most 5)
    cdef double f_theta[5]
    cdef double f_x[5]
    cdef double f_z[5]
    cdef int f_kind[5]
    cdef int f_sign[5]
    cdef int nf
    cdef double tmpd
    cdef int tmpi

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
        rk_step(x, z, hs, kx, kz, &P, &s)
        nfev += 6
        sx = atol + rtol * (fabs(x) if fabs(x) > fabs(s.x1) else fabs(s.x1))
        sz = atol + rtol * (fabs(z) if fabs(z) > fabs(s.z1) else fabs(s.z1))
        err = sqrt(0.5 * ((s.ex / sx) ** 2 + (s.ez / sz) ** 2))
        if not (isfinite(err) and isfinite(s.x1) and isfinite(s.z1)):
            h *= 0.2
            nreject += 1
            if h < 1e-14 * (1.0 + fabs(t)):
                status = ST_NONFINITE
                break
            continue
        if err > 1.0:
            fac = 0.9 * pow(err, -0.2)
            if fac < 0.2:
                fac = 0.2
            h *= fac
            nreject += 1
            if h < 1e-14 * (1.0 + fabs(t)):
                status = ST_UNDERFLOW
                break
            continue

        crossed = False
        if quadrant == 1:
            gc1 = s.z1 - level
            if (side > 0 and gc1 < 0.0) or (side < 0 and gc1 > 0.0):
                make_dense(&d, x, z, hs, kx, kz, &s)
                theta = locate(&d, EV_CONCAVITY, z - level, gc1, hs, &P)
                hc = theta * h
                if hc > 1e-12 * (1.0 + fabs(t)):
                    rk_step(x, z, dirn * hc, kx, kz, &P, &s)
                    nfev += 6
                    s.z1 = level
                    field(s.x1, s.z1, &P, &s.k7x, &s.k7z)
                    nfev += 1
                    h_next = h
                    h = hc
                    hs = dirn * h
                    crossed = True
                else:
                    side = 1 if gc1 > 0.0 else -1
        make_dense(&d, x, z, hs, kx, kz, &s)
        t1 = t + hs
        nf = 0
        for j in range(nkinds):
            kind = kinds[j]
            if kind == EV_SECTION and not sec_on:
                continue
            g0 = event_value(kind, x, z, &P)
            g1 = event_value(kind, s.x1, s.z1, &P)
            if g0 * g1 < 0.0 or (g1 == 0.0 and g0 != 0.0):
                if g1 != 0.0:
                    theta = locate(&d, kind, g0, g1, hs, &P)
                else:
                    theta = 1.0
                dense_at(&d, theta, &exv, &ezv)
                sgn = 1 if g1 > g0 else -1
                if kind == EV_SECTION:
                    if ezv <= sec_zmin or sgn * dirn * sec_orient <= 0:
                        continue
                f_theta[nf] = theta; f_kind[nf] = kind; f_x[nf] = exv; f_z[nf] = ezv
                f_sign[nf] = sgn
                nf += 1
        if crossed:
            f_theta[nf] = 1.0; f_kind[nf] = EV_CONCAVITY; f_x[nf] = s.x1; f_z[nf] = s.z1
            f_sign[nf] = 1 if side < 0 else -1
            nf += 1
        # stable insertion sort by theta
        for j in range(1, nf):
            m = j
            while m > 0 and f_theta[m - 1] > f_theta[m]:
                tmpd = f_theta[m]; f_theta[m] = f_theta[m - 1]; f_theta[m - 1] = tmpd
                tmpd = f_x[m]; f_x[m] = f_x[m - 1]; f_x[m - 1] = tmpd
                tmpd = f_z[m]; f_z[m] = f_z[m - 1]; f_z[m - 1] = tmpd
                tmpi = f_kind[m]; f_kind[m] = f_kind[m - 1]; f_kind[m - 1] = tmpi
                tmpi = f_sign[m]; f_sign[m] = f_sign[m - 1]; f_sign[m - 1] = tmpi
                m -= 1
        sec_stop = False
        for j in range(nf):
            ev_kind.append(f_kind[j])
            ev_t.append(t + f_theta[j] * hs)
            ev_x.append(f_x[j])
            ev_z.append(f_z[j])
            ev_sign.append(f_sign[j])
            ev_info.append(0)
            if f_kind[j] == EV_SECTION:
                nsec += 1
                if max_section > 0 and nsec >= max_section:
                    sec_stop = True

        t = t1
        x = s.x1
        z = s.z1
        kx = s.k7x
        kz = s.k7z
        naccept += 1
        if n == cap_n:
            cap_n *= 2
            ts_a = np.resize(ts_a, cap_n)
            xs_a = np.resize(xs_a, cap_n)
            zs_a = np.resize(zs_a, cap_n)
            ts = ts_a; xs = xs_a; zs = zs_a
        ts[n] = t; xs[n] = x; zs[n] = z
        n += 1

        if crossed:
            vz = dirn * kz
            if vz > 1e-14 * (1.0 + fabs(z)):
                side = 1
            else:
                side = -1
            h = h_next
        else:
            fac = 0.9 * pow(err if err > 1e-10 else 1e-10, -0.2)
            if fac < 0.2:
                fac = 0.2
            if fac > 10.0:
                fac = 10.0
            h = h * fac
            if h > hmax:
                h = hmax

        if sec_stop:
            status = ST_SECTION_LIMIT
            break

        if blowing:
            if blowing == 1 and fabs(x) >= blow_final:
                ev_kind.append(EV_BLOWUP_X); ev_t.append(t + dirn * fabs(x / kx))
                ev_x.append(x); ev_z.append(z); ev_sign.append(0); ev_info.append(0)
                status = ST_BLOWUP_X
                break
            if blowing == 2 and fabs(z) >= blow_final:
                ev_kind.append(EV_BLOWUP_Z); ev_t.append(t + dirn * fabs(z / kz))
                ev_x.append(x); ev_z.append(z); ev_sign.append(0); ev_info.append(0)
                status = ST_BLOWUP_Z
                break
            continue

        if fabs(x) >= x_cap and dirn * kx * x > 0.0:
            blowing = 1
            continue
        if fabs(z) >= z_cap and dirn * kz * z > 0.0:
            blowing = 2
            continue

        if cap_idx >= 0:
            if hypot(x - st[cap_idx, 0], z - st[cap_idx, 1]) >= st[cap_idx, 2]:
                cap_idx = -1
        if cap_idx < 0:
            for i in range(nst):
                if hypot(x - st[i, 0], z - st[i, 1]) < st[i, 2]:
                    cap_idx = i
                    cap_since = t
                    break
        if cap_idx >= 0 and fabs(t - cap_since) >= dt_cap:
            ev_kind.append(EV_CAPTURE); ev_t.append(t); ev_x.append(x); ev_z.append(z)
            ev_sign.append(0); ev_info.append(cap_idx)
            status = ST_CAPTURED
            break

    return (ts_a[:n].copy(), xs_a[:n].copy(), zs_a[:n].copy(),
            np.array(ev_kind, dtype=np.int64), np.array(ev_t, dtype=float),
            np.array(ev_x, dtype=float), np.array(ev_z, dtype=float),
            np.array(ev_sign, dtype=np.int64), np.array(ev_info, dtype=np.int64),
            status, nfev, naccept, nreject)
