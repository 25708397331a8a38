import numpy as np
import pytest

from pucci_phase.field import OnInterface, vector_field
from pucci_phase.params import make_params, p_pseudo, p_serrin
from pucci_phase.stationary import (Kind, Label, MNotInQuadrant, a0_stable_direction,
                                    a0_stable_slope, classify_stationary, eigen_2x2,
                                    field_residual, jacobian_at, location, m0_characteristic,
                                    n0_unstable_direction, n0_unstable_slope, stationary_points)


def test_laplacian_m0(lap3):
    m0 = location(Label.M0, 5.0, lap3)
    assert (m0.X, m0.Z) == (0.5, 0.5)


def test_a0_meets_m0_at_serrin(plus4):
    a0, m0 = location(Label.A0, 5.0, plus4), location(Label.M0, 5.0, plus4)
    assert (a0.X, a0.Z) == (0.5, 0.0)
    assert m0.X == pytest.approx(0.5, abs=1e-15) and m0.Z == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("p", [1.5, 3.0, 7.0])
def test_origin_field_exactly_zero(plus4, minus3, p):
    for prm in (plus4, minus3):
        assert vector_field((0.0, 0.0), p, prm) == (0.0, 0.0)


def test_locations(plus4, minus3):
    assert tuple(location(Label.N0, 6.0, plus4)) == (0.0, 4.0)
    assert tuple(location(Label.N0, 2.0, minus3)) == (0.0, 6.0)
    assert tuple(location(Label.A0, 2.0, minus3)) == (3.0, 0.0)
    m0 = location(Label.M0, 2.0, minus3)
    assert m0.X == pytest.approx(2.0) and m0.Z == pytest.approx(1.0)


def test_n0_jacobian(plus4):
    J = jacobian_at((0.0, 4.0), 7.0, plus4, side="up")
    np.testing.assert_allclose(J, [[2.0, 0.0], [-28.0, -4.0]], atol=1e-15)
    eigs = sorted(e.real for e in classify_stationary("N0", 7.0, plus4).eigenvalues)
    assert eigs == [-4.0, 2.0]


def test_n0_jacobian_weighted():
    prm = make_params(1, 2, "plus", 4, 1.5)
    J = classify_stationary("N0", 7.0, prm).jacobian
    np.testing.assert_allclose(J, [[3.5, 0.0], [-7.0 * 5.5, -5.5]], atol=1e-14)


def test_a0_jacobian(plus4):
    p = 7.0
    J = classify_stationary("A0", p, plus4).jacobian
    nt = plus4.n_tilde
    np.testing.assert_allclose(J, [[nt - 2, (nt - 2) / 2.0], [0.0, nt - p * (nt - 2)]],
                               atol=1e-15)


def test_m0_trace_vanishes_at_pseudo(plus4, minus3):
    for prm in (plus4, minus3):
        J = classify_stationary("M0", p_pseudo(prm), prm).jacobian
        assert abs(np.trace(J)) < 1e-12


def test_jacobian_on_interface(plus4):
    with pytest.raises(OnInterface):
        jacobian_at((0.3, 3.0), 6.0, plus4)
    with pytest.raises(ValueError):
        jacobian_at((0.3, 3.0), 6.0, plus4, side="left")


def test_a0_nonhyperbolic_at_serrin(plus4, minus3):
    for prm in (plus4, minus3):
        sp = classify_stationary("A0", p_serrin(prm), prm)
        assert sp.classification is Kind.NON_HYPERBOLIC
        assert min(abs(e) for e in sp.eigenvalues) < 1e-12


def test_m0_center_at_pseudo(plus4, minus3, lap3):
    for prm in (plus4, minus3, lap3):
        assert classify_stationary("M0", p_pseudo(prm), prm).classification is Kind.CENTER


def test_classification_regimes(plus4):
    ps, pp = p_serrin(plus4), p_pseudo(plus4)
    assert classify_stationary("O", 3.0, plus4).classification is Kind.SADDLE
    assert classify_stationary("N0", 3.0, plus4).classification is Kind.SADDLE
    assert classify_stationary("A0", 0.5 * (1 + ps), plus4).classification is Kind.SOURCE
    assert classify_stationary("A0", ps + 1, plus4).classification is Kind.SADDLE
    assert classify_stationary("M0", 0.5 * (ps + pp), plus4).classification is Kind.SOURCE
    assert classify_stationary("M0", pp + 1, plus4).classification is Kind.SINK


def test_m0_outside_quadrant(plus4):
    with pytest.raises(MNotInQuadrant):
        classify_stationary("M0", 4.0, plus4)
    with pytest.raises(MNotInQuadrant):
        classify_stationary("M0", 5.0, plus4)
    m0 = [s for s in stationary_points(4.0, plus4) if s.label is Label.M0][0]
    assert not m0.in_first_quadrant


@pytest.mark.parametrize("prm", [make_params(1, 2, "plus", 4, 0), make_params(1, 2, "minus", 3, 0),
                                 make_params(0.7, 1.9, "plus", 5, 1.0)])
def test_m0_sign_flip_at_pseudo(prm):
    pp = p_pseudo(prm)
    below = classify_stationary("M0", pp - 1e-6, prm).eigenvalues
    above = classify_stationary("M0", pp + 1e-6, prm).eigenvalues
    assert all(e.real > 0 for e in below) and all(e.real < 0 for e in above)


def test_tangent_directions(plus4):
    p = 7.0
    sp = classify_stationary("N0", p, plus4)
    unstable = [v for v, tag in sp.tangent_directions if tag == "unstable"][0]
    assert unstable[0] > 0
    assert unstable[1] / unstable[0] == pytest.approx(n0_unstable_slope(p, plus4), rel=1e-12)
    np.testing.assert_allclose(n0_unstable_direction(p, plus4), unstable, atol=1e-14)
    J = sp.jacobian
    np.testing.assert_allclose(J @ unstable, 2.0 * unstable, atol=1e-12)
    sa = classify_stationary("A0", p, plus4)
    stable = [v for v, tag in sa.tangent_directions if tag == "stable"][0]
    assert stable[1] / stable[0] == pytest.approx(a0_stable_slope(p, plus4), rel=1e-12)
    assert a0_stable_direction(p, plus4)[1] > 0
    unst = [v for v, tag in sa.tangent_directions if tag == "unstable"][0]
    np.testing.assert_allclose(unst, [1.0, 0.0], atol=1e-15)


def test_n0_slope_uses_upper_coefficient(minus3):
    # for the minus operator the upper coefficient is Lambda
    assert n0_unstable_slope(2.0, minus3) == pytest.approx(-2.0 * 2.0 * 3 / 5)


def test_residuals(plus4, minus3):
    for prm, p in ((plus4, 7.0), (minus3, 2.2)):
        for label in Label:
            assert field_residual(label, p, prm) < 1e-10


def test_m0_characteristic(plus4):
    p = 7.0
    ch = m0_characteristic(p, plus4)
    J = classify_stationary("M0", p, plus4).jacobian
    assert ch["trace"] == pytest.approx(np.trace(J), abs=1e-14)
    assert ch["product"] == pytest.approx(np.linalg.det(J), rel=1e-12)


def test_eigen_2x2_against_numpy():
    rng = np.random.default_rng(0)
    for _ in range(500):
        J = rng.normal(size=(2, 2)) * rng.uniform(0.1, 10)
        ours = sorted(eigen_2x2(J), key=lambda c: (c.real, c.imag))
        ref = sorted(np.linalg.eigvals(J), key=lambda c: (c.real, c.imag))
        np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-12 * np.abs(J).max())


def test_jacobian_finite_difference(minus3):
    p, h = 2.3, 1e-6
    for q in [(0.5, 1.0), (1.0, 9.0), (-0.5, -0.3)]:
        J = jacobian_at(q, p, minus3)
        fd = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fp = np.array(vector_field(np.add(q, e), p, minus3))
            fm = np.array(vector_field(np.subtract(q, e), p, minus3))
            fd[:, j] = (fp - fm) / (2 * h)
        np.testing.assert_allclose(J, fd, rtol=1e-7, atol=1e-7)
