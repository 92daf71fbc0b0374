import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qccgeom import zoo
from qccgeom.qcc import fit_qcc
from qccgeom.soliton import (
    EXPANDING, NOT_A_SOLITON, SHRINKING, STEADY, PreconditionError, SingularConditionError,
    best_lambda, best_lambda_mu, classify, eta_soliton_report, eta_soliton_residual,
    geodesic_soliton_condition, kenmotsu_type_check, ricci_soliton_report, soliton_loss,
    soliton_residual, torse_forming_detect,
)
from qccgeom.tensor import Chart, Geometry, MetricField, VectorField

XYZ = ("x", "y", "z")
# unit Killing (Hopf) field of the round 3-sphere in stereographic coordinates
HOPF = ["-y+z*x", "x+z*y", "(1-x^2-y^2-z^2)/2+z^2"]


def zero_field(coords):
    return VectorField(["0"] * len(coords), coords)


def warped(f, n=3):
    """dt^2 + f(t)^2 (flat fibre) with xi = d/dt."""
    coords = ("t", "x", "y", "z")[:n]
    comps = {(0, 0): "1", **{(i, i): f"({f})^2" for i in range(1, n)}}
    g = MetricField(Chart(coords, ((-1, 1),) * n), comps)
    return g, VectorField(["1"] + ["0"] * (n - 1), coords)


# ---------------------------------------------------------------------------
# least-squares lambda

@pytest.mark.parametrize("name, V", [("sphere", None), ("warped-exp-sphere", "xi"), ("hyperbolic-ball", "xi")])
def test_best_lambda_is_parabola_vertex(name, V):
    # the loss is an exact quadratic in lam, so three samples determine its vertex
    e = zoo.builtin(name, 3)
    geo = Geometry(e.metric)
    field = e.xi_field if V == "xi" else VectorField(["x*y", "sin(z)", "1"], XYZ)
    lam, _ = best_lambda(geo, field)
    xs = np.array([-5.0, 0.0, 5.0])
    ys = np.array([soliton_loss(geo, field, x) for x in xs])
    c2, c1, _ = np.polyfit(xs, ys, 2)
    assert lam == pytest.approx(-c1 / (2 * c2), rel=1e-9, abs=1e-9)
    scan = np.linspace(lam - 1, lam + 1, 201)
    assert soliton_loss(geo, field, lam) <= min(soliton_loss(geo, field, x) for x in scan) + 1e-9


@pytest.mark.parametrize("n", [3, 4])
def test_gaussian_shrinker(n):
    e = zoo.builtin("gaussian-shrinker", n)
    lam, res = best_lambda(e.metric, e.V_field)
    assert lam == pytest.approx(-1.0, abs=1e-10)
    assert res <= 1e-10
    assert classify(lam, res) == SHRINKING
    assert soliton_residual(e.metric, e.V_field, -1.0) <= 1e-12


@pytest.mark.parametrize("n", [3, 4])
def test_sphere_with_zero_field(n):
    e = zoo.builtin("sphere", n)
    lam, res = best_lambda(e.metric, zero_field(e.coords))
    assert lam == pytest.approx(-(n - 1), abs=1e-9)
    assert res <= 1e-9
    assert classify(lam, res) == SHRINKING


def test_hyperbolic_with_zero_field_is_expanding():
    e = zoo.builtin("hyperbolic-ball", 3)
    lam, res = best_lambda(e.metric, zero_field(e.coords))
    assert lam == pytest.approx(2.0, abs=1e-9)
    assert classify(lam, res) == EXPANDING


def test_flat_zero_field_is_steady():
    e = zoo.builtin("flat", 3)
    lam, res = best_lambda(e.metric, zero_field(e.coords))
    assert classify(lam, res) == STEADY


def test_not_a_soliton():
    e = zoo.builtin("sphere", 3)
    lam, res = best_lambda(e.metric, e.xi_field)
    assert res > 1e-2
    assert classify(lam, res) == NOT_A_SOLITON


def test_residual_grows_away_from_best():
    e = zoo.builtin("gaussian-shrinker", 3)
    assert soliton_residual(e.metric, e.V_field, -0.5) > 0.1


# ---------------------------------------------------------------------------
# generator solitons on regular QCC manifolds

def test_hopf_field_soliton_on_sphere():
    e = zoo.builtin("sphere", 3)
    xi = VectorField(HOPF, XYZ)
    rep = ricci_soliton_report(e.metric, xi, xi)
    assert rep.residual <= 1e-12
    assert rep.lam == pytest.approx(-2.0, abs=1e-12)
    assert rep.lambda_predicted == pytest.approx(-2.0, abs=1e-12)
    assert rep.cls == SHRINKING
    assert rep.checks == {"lambda_equals_minus_S_xi_xi": True, "not_steady": True}
    assert rep.status == "pass"


@pytest.mark.parametrize("n", [3, 4])
def test_eta_soliton_on_hyperbolic_warp(n):
    # L_xi g = 2(g - eta eta), S = -(n-1) g: lam = n-2, mu = 1, lam + mu = -S(xi, xi)
    e = zoo.builtin("warped-exp-flat", n)
    lam, mu, res = best_lambda_mu(e.metric, e.xi_field, e.xi_field)
    assert (lam, mu) == (pytest.approx(n - 2, abs=1e-12), pytest.approx(1.0, abs=1e-12))
    assert res <= 1e-12
    rep = eta_soliton_report(e.metric, e.xi_field, e.xi_field)
    assert rep.checks == {"lambda_plus_mu_equals_minus_S_xi_xi": True}
    assert eta_soliton_residual(e.metric, e.xi_field, n - 2, 1.0, e.xi_field) <= 1e-12
    # the plain Ricci soliton equation has no solution here
    assert ricci_soliton_report(e.metric, e.xi_field, e.xi_field).cls == NOT_A_SOLITON


REGULAR = [(name, n) for name in ("sphere", "hyperbolic-ball", "warped-exp-flat", "warped-exp-sphere") for n in (3, 4)]


@pytest.mark.parametrize("name, n", REGULAR)
def test_generator_soliton_never_steady(name, n):
    e = zoo.builtin(name, n)
    fit = fit_qcc(e.metric, e.xi_field)
    for rep in (ricci_soliton_report(e.metric, e.xi_field, e.xi_field, fit=fit),
                eta_soliton_report(e.metric, e.xi_field, e.xi_field, fit=fit)):
        assert rep.cls != STEADY
        assert rep.status == "pass"
        if rep.residual <= 1e-6 and rep.mu is not None:
            assert rep.lam + rep.mu == pytest.approx(-float(np.mean(fit.s_xixi)), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_accepted_eta_pairs_satisfy_sum_rule(lam, mu):
    # any (lam, mu) with a small residual must obey lam + mu = -S(xi, xi) = n-1
    e = zoo.builtin("warped-exp-flat", 3)
    if eta_soliton_residual(e.metric, e.xi_field, lam, mu, e.xi_field) <= 1e-6:
        assert lam + mu == pytest.approx(2.0, abs=1e-6)


def test_no_prediction_when_field_differs_from_generator():
    e = zoo.builtin("sphere", 3)
    rep = ricci_soliton_report(e.metric, zero_field(e.coords), e.xi_field)
    assert rep.lambda_predicted is None and rep.checks == {}
    assert rep.cls == SHRINKING


def test_no_prediction_when_non_regular():
    e = zoo.builtin("flat", 3)
    rep = ricci_soliton_report(e.metric, e.xi_field, e.xi_field)
    assert rep.cls == STEADY
    assert rep.lambda_predicted is None


# ---------------------------------------------------------------------------
# geodesic soliton condition

def test_geodesic_condition_on_hyperbolic_warp_is_singular():
    e = zoo.builtin("warped-exp-flat", 4)
    with pytest.raises(SingularConditionError):
        geodesic_soliton_condition(e.metric, e.xi_field, -1, 0)


def test_geodesic_condition_needs_four_dimensions():
    e = zoo.builtin("warped-exp-flat", 3)
    with pytest.raises(PreconditionError):
        geodesic_soliton_condition(e.metric, e.xi_field, -1, -1)


def test_geodesic_condition_on_warped_sphere():
    e = zoo.builtin("warped-exp-sphere", 4)
    out = geodesic_soliton_condition(e.metric, e.xi_field, "exp(-2*t)-1", "-exp(-2*t)")
    assert out["geodesic_residual"] <= 1e-12
    # a + b = -1 is constant, so xi(a+b) = 0
    assert np.max(np.abs(out["xi_of_a_plus_b"])) <= 1e-12
    np.testing.assert_allclose(out["S_xi_xi"], -3.0, atol=1e-12)
    assert set(out) == {"geodesic_residual", "condition_defect", "lambda_condition_defect",
                        "xi_of_a_plus_b", "S_xi_xi"}


def test_geodesic_condition_two_forms_differ():
    # constant a, b with a + b = -1 (para-Sasakian values for n = 4): the two
    # readings of the scalar condition disagree by (a+b)(n-1) - (a+b)/(n-1)
    e = zoo.builtin("warped-exp-flat", 4)
    a, b = 1 / 3, -4 / 3
    out = geodesic_soliton_condition(e.metric, e.xi_field, a, b)
    assert out["condition_defect"] == pytest.approx(0.0, abs=1e-12)
    lhs = a * 3 + b
    assert out["lambda_condition_defect"] == pytest.approx(abs(lhs - (-3.0)), abs=1e-12)


# ---------------------------------------------------------------------------
# torse-forming generators

@pytest.mark.parametrize("n", [3, 4])
def test_hyperbolic_warp_is_kenmotsu_type(n):
    e = zoo.builtin("warped-exp-flat", n)
    tf = torse_forming_detect(e.metric, e.xi_field)
    assert tf.torse_forming and tf.subclass == "kenmotsu-type"
    np.testing.assert_allclose(tf.f, 1.0, atol=1e-12)
    eta = np.zeros(n)
    eta[0] = 1.0
    np.testing.assert_allclose(tf.omega, np.tile(-eta, (len(tf.f), 1)), atol=1e-12)
    assert tf.geodesic and tf.closed
    assert tf.f_plus_omega_xi <= 1e-12


@pytest.mark.parametrize("warp, f", [("cosh(t)", np.tanh), ("exp(2*t)", lambda t: 2 + 0 * t),
                                     ("cos(t)", lambda t: -np.tan(t))])
def test_planted_torse_forming(warp, f):
    g, xi = warped(warp)
    tf = torse_forming_detect(g, xi)
    t = Geometry(g).points[:, 0]
    assert tf.subclass == "kenmotsu-type"
    np.testing.assert_allclose(tf.f, f(t), atol=1e-12)
    assert tf.closedness_residual <= 1e-12


def test_parallel_generator_is_geodesic_subclass():
    e = zoo.builtin("flat", 3)
    tf = torse_forming_detect(e.metric, e.xi_field)
    assert tf.subclass == "geodesic"
    np.testing.assert_allclose(tf.f, 0.0, atol=1e-14)


def test_sphere_generator_is_not_torse_forming():
    e = zoo.builtin("sphere", 3)
    tf = torse_forming_detect(e.metric, e.xi_field)
    assert tf.subclass == "not-torse-forming"
    assert tf.fit_residual > 1e-2
    assert tf.closed is None


def test_kenmotsu_check_on_hyperbolic_warp():
    e = zoo.builtin("warped-exp-flat", 4)
    tf = torse_forming_detect(e.metric, e.xi_field)
    out = kenmotsu_type_check(e.metric, e.xi_field, tf, fit_qcc(e.metric, e.xi_field))
    assert out["status"] == "pass"
    assert out["verdict"] == EXPANDING
    assert out["a_plus_b_plus_f2"] <= 1e-12
    assert out["lambda_predicted"] == pytest.approx(3.0)
    assert out["lambda_from_S"] == pytest.approx(3.0)


@pytest.mark.parametrize("warp", ["cosh(t)", "cos(t)"])
def test_kenmotsu_with_non_constant_f(warp):
    # a + b = -(f^2 + xi(f)) holds exactly; the constant-f reading does not
    g, xi = warped(warp, n=4)
    fit = fit_qcc(g, xi)
    tf = torse_forming_detect(g, xi)
    out = kenmotsu_type_check(g, xi, tf, fit)
    assert out["checks"]["curvature_identity"]
    assert out["a_plus_b_plus_f2_plus_xi_f"] <= 1e-12
    assert not out["checks"]["a_plus_b_equals_minus_f2"]
    assert not out["checks"]["f_constant"]
    assert out["verdict"] == "no Ricci soliton with V = xi"
    assert out["status"] == "fail"


def test_kenmotsu_check_preconditions():
    e = zoo.builtin("sphere", 3)
    tf = torse_forming_detect(e.metric, e.xi_field)
    with pytest.raises(PreconditionError):
        kenmotsu_type_check(e.metric, e.xi_field, tf, fit_qcc(e.metric, e.xi_field))


def test_kenmotsu_check_non_regular():
    g, xi = warped("2+sin(t)")
    out = kenmotsu_type_check(g, xi, torse_forming_detect(g, xi), fit_qcc(g, xi))
    assert out["verdict"] == "indeterminate, no conclusion"
