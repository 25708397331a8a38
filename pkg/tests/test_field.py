import numpy as np
import pytest
from scipy import integrate as si

from pucci_phase.field import (OnInterface, OpenCurve, OutsideDomain, Region, SelfIntersection,
                               dulac_line_integral, dulac_phi, dulac_phi_expanded, dulac_weight,
                               field_directions_on_lines, lines, region_of, vector_field,
                               vector_field_array)
from pucci_phase.params import make_params, p_pseudo, p_sobolev
from pucci_phase.stationary import Label, location


def test_region_labels(lap3):
    assert region_of((1, 3), lap3) is Region.R_PLUS
    assert region_of((1, 2), lap3) is Region.ON_CONCAVITY_LINE
    assert region_of((1, 1), lap3) is Region.R_MINUS
    assert region_of((-1, -1), lap3) is Region.THIRD_QUADRANT
    assert region_of((0, 1), lap3) is Region.ON_AXIS
    assert region_of((-1, 1), lap3) is Region.OUTSIDE


def test_field_vanishes_at_n0_and_m0(plus4):
    p = 7.0
    assert vector_field(location(Label.N0, p, plus4), p, plus4) == (0.0, 0.0)
    fx, fz = vector_field(location(Label.M0, p, plus4), p, plus4)
    assert abs(fx) < 1e-15 and abs(fz) < 1e-15


def test_field_at_point_p_on_the_line():
    # on the concavity line only the upper-region data (N, lambda) enter
    prm = make_params(1, 1, "plus", 3, 0)
    fx, fz = vector_field((0.2, 2.0), 5.0, prm)
    assert fx == pytest.approx(0.24, abs=1e-15)
    assert fz == pytest.approx(0.0, abs=1e-15)


def test_crossing_direction_on_line():
    prm = make_params(1, 1, "plus", 3, 0)
    fx, fz = vector_field((1.0, 2.0), 5.0, prm)
    assert fx == pytest.approx(2.0) and fz < 0


def test_z_nullcline_at_alpha(plus4):
    p = 7.0
    al = plus4.alpha(p)
    z = plus4.kappa_down * (plus4.wall - al)
    fx, fz = vector_field((al, z), p, plus4)
    assert abs(fz) < 1e-14


def test_a0_on_x_axis(plus4):
    fx, fz = vector_field((plus4.wall, 0.0), 6.0, plus4)
    assert fx == 0.0 and fz == 0.0


def test_outside_domain(plus4):
    with pytest.raises(OutsideDomain):
        vector_field((1.0, -1.0), 5.0, plus4)


def test_array_matches_scalar(minus3):
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 5, 50)
    Z = rng.uniform(0, 12, 50)
    fx, fz = vector_field_array(X, Z, 2.2, minus3)
    for x, z, a, b in zip(X, Z, fx, fz):
        assert (a, b) == pytest.approx(vector_field((x, z), 2.2, minus3), rel=1e-14)
    gx, _ = vector_field_array(np.array([1.0]), np.array([-1.0]), 2.2, minus3)
    assert np.isnan(gx[0])


def test_field_against_radial_equation():
    # Xdot and Zdot from the chain rule applied to the radial equation at r = 1
    rng = np.random.default_rng(3)
    for _ in range(50):
        lam = rng.uniform(0.3, 1)
        prm = make_params(lam, lam * rng.uniform(1, 2.5), rng.choice(["plus", "minus"]), 6,
                          rng.uniform(-0.5, 2))
        p = rng.uniform(1.2, 8)
        x, z = rng.uniform(0.05, 4), rng.uniform(0.05, 3 * prm.concavity_level)
        if abs(z - prm.concavity_level) < 1e-3:
            continue
        u = (x * z) ** (1 / (p - 1))
        du = -x * u
        y = -prm.kappa_up * (prm.N - 1) * du - u ** p
        ddu = y / prm.kappa_down if y > 0 else y / prm.kappa_up
        xdot = x * (1 + x) - ddu / u
        zdot = z * (1 + prm.a - p * x - ddu / du)
        fx, fz = vector_field((x, z), p, prm)
        assert fx == pytest.approx(xdot, rel=1e-10, abs=1e-12)
        assert fz == pytest.approx(zdot, rel=1e-10, abs=1e-12)


def test_lines(plus4):
    ls = lines(7.0, plus4)
    assert ls.concavity_level == 3.0
    assert ls.x_nullcline == ((0.0, 1.0), (0.5, 0.0))
    assert ls.join_point == (1 / 7, 3.0)
    assert ls.z_nullcline_upper[0] == (0.0, 4.0)
    assert ls.wall_line == 0.5


@pytest.mark.parametrize("args,p", [((1, 2, "plus", 4, 0), 7.0), ((1, 2, "minus", 3, 0), 2.0),
                                    ((1, 1, "plus", 3, 1), 4.0)])
def test_direction_table(args, p):
    rep = field_directions_on_lines(p, make_params(*args))
    assert all(v["holds"] for v in rep.values()), rep


def test_dulac_closed_form_matches_expansion(plus4):
    rng = np.random.default_rng(5)
    for _ in range(100):
        q = (rng.uniform(0.01, 3), rng.uniform(0.01, 8))
        p = rng.uniform(1.5, 12)
        if abs(q[1] - plus4.concavity_level) < 1e-6:
            continue
        assert dulac_phi(q, p, plus4) == pytest.approx(dulac_phi_expanded(q, p, plus4),
                                                       rel=1e-10, abs=1e-13)


def test_dulac_is_weighted_divergence(minus3):
    # central differences of the weighted field, away from the interface
    p, h = 2.7, 1e-5
    for q in [(0.4, 1.0), (1.3, 2.5), (0.7, 7.0), (2.0, 9.0)]:
        def wf(x, z):
            w = dulac_weight((x, z), p, minus3)
            f, g = vector_field((x, z), p, minus3)
            return w * f, w * g
        x, z = q
        div = ((wf(x + h, z)[0] - wf(x - h, z)[0]) + (wf(x, z + h)[1] - wf(x, z - h)[1])) / (2 * h)
        assert dulac_phi(q, p, minus3) == pytest.approx(div, rel=1e-6)


def test_dulac_zero_on_upper_region_at_sobolev(plus4):
    p = p_sobolev(plus4)
    for q in [(0.1, 3.5), (1.0, 10.0), (4.0, 3.01)]:
        assert abs(dulac_phi(q, p, plus4)) <= 1e-12


def test_dulac_signs(plus4):
    for q in [(0.1, 3.5), (0.3, 1.0), (2.0, 0.2)]:
        assert dulac_phi(q, 0.9 * p_sobolev(plus4), plus4) > 0
        assert dulac_phi(q, 1.1 * p_pseudo(plus4), plus4) < 0


def test_dulac_on_interface(plus4):
    with pytest.raises(OnInterface):
        dulac_phi((0.5, plus4.concavity_level), 5.0, plus4)


def test_line_integral_small_circle_positive(plus4):
    p = 6.0
    m0 = location(Label.M0, p, plus4)
    th = np.linspace(0, 2 * np.pi, 401)
    circle = np.column_stack([m0.X + 0.05 * np.cos(th), m0.Z + 0.05 * np.sin(th)])
    circle[-1] = circle[0]
    val = dulac_line_integral(circle, p, plus4)
    area = si.dblquad(lambda z, x: dulac_phi((x, z), p, plus4), m0.X - 0.05, m0.X + 0.05,
                      lambda x: m0.Z - np.sqrt(max(0.0025 - (x - m0.X) ** 2, 0.0)),
                      lambda x: m0.Z + np.sqrt(max(0.0025 - (x - m0.X) ** 2, 0.0)),
                      epsabs=1e-12)[0]
    assert val > 0
    assert val == pytest.approx(area, rel=1e-3)


def test_line_integral_rectangle_green(minus3):
    p = 2.2
    corners = np.array([(0.5, 0.5), (1.5, 0.5), (1.5, 2.0), (0.5, 2.0), (0.5, 0.5)])
    t = np.linspace(0, 1, 21)[:-1, None]
    rect = np.vstack([a + t * (b - a) for a, b in zip(corners[:-1], corners[1:])] + [corners[:1]])
    val = dulac_line_integral(rect, p, minus3)
    area = si.dblquad(lambda z, x: dulac_phi((x, z), p, minus3), 0.5, 1.5, 0.5, 2.0,
                      epsabs=1e-12)[0]
    assert val == pytest.approx(area, rel=1e-6)


def test_line_integral_degenerate_and_errors(plus4):
    seg = [(1.0, 1.0), (2.0, 1.0), (1.0, 1.0)]
    assert dulac_line_integral(seg, 6.0, plus4, check_simple=False) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(OpenCurve):
        dulac_line_integral([(1, 1), (2, 1), (2, 2)], 6.0, plus4)
    with pytest.raises(SelfIntersection):
        dulac_line_integral([(1, 1), (2, 2), (2, 1), (1, 2), (1, 1)], 6.0, plus4)


def test_line_integral_vanishes_on_center_orbit(lap3):
    from pucci_phase.flow import trace_cycle
    cyc = trace_cycle(0.2, 5.0, lap3)
    pts = cyc.points[::5].copy()
    pts[-1] = pts[0]
    val = dulac_line_integral(pts, 5.0, lap3, check_simple=False)
    assert abs(val) < 1e-3 * dulac_line_integral(
        [(0.3, 0.3), (0.7, 0.3), (0.7, 0.7), (0.3, 0.7), (0.3, 0.3)], 4.0, lap3)
