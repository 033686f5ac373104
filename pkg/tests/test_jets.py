"""Tests for truncated Taylor jet arithmetic and composition.

Derivative values of composed functions are checked against hand-derived
closed forms (written out in each test) rather than against the jet
machinery itself.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wefe import jets
from wefe.errors import JetDomainError, JetError
from wefe.jets import Jet, compose, int_power, n_coeffs


def jet_xy(x, y, order=3):
    return (
        Jet.variable(0, x, 2, order),
        Jet.variable(1, y, 2, order),
    )


# -- construction and queries ----------------------------------------------


def test_constant_and_variable():
    c = Jet.constant(2.5, 3, 2)
    assert c.value() == 2.5
    assert np.all(c.coeffs[1:] == 0.0)
    v = Jet.variable(1, 4.0, 3, 2)
    assert v.value() == 4.0
    assert v.partial((0, 1, 0)) == 1.0
    assert v.partial((1, 0, 0)) == 0.0
    assert v.partial((0, 2, 0)) == 0.0


def test_n_coeffs_counts_multi_indices():
    # dim 2 order 3: 1 + 2 + 3 + 4
    assert n_coeffs(2, 3) == 10
    assert n_coeffs(3, 3) == 20
    assert n_coeffs(1, 5) == 6


def test_immutability():
    j = Jet.constant(1.0, 2, 2)
    with pytest.raises(AttributeError):
        j.order = 5
    with pytest.raises(ValueError):
        j.coeffs[0] = 7.0  # backing array is read-only


def test_partial_includes_factorials():
    x, _ = jet_xy(2.0, 0.0)
    p = x * x * x  # x^3: d3/dx3 = 6
    assert p.partial((3, 0)) == pytest.approx(6.0)
    assert p.partial((2, 0)) == pytest.approx(12.0)  # 6x at x=2


def test_partial_validation():
    j = Jet.constant(1.0, 2, 2)
    with pytest.raises(JetError):
        j.partial((1,))
    with pytest.raises(JetError):
        j.partial((2, 1))
    with pytest.raises(JetError):
        j.partial((-1, 0))


def test_gradient_and_truncate():
    x, y = jet_xy(1.0, 2.0)
    f = x * y + 3.0 * x
    assert np.allclose(f.gradient(), [5.0, 1.0])
    t = f.truncate(1)
    assert t.order == 1
    assert t.value() == f.value()
    with pytest.raises(JetError):
        t.truncate(3)


def test_derivative_drops_one_order():
    x, y = jet_xy(1.5, -0.5)
    f = x * x * y  # df/dx = 2xy, d2f/dxdy = 2x
    d = f.derivative(0)
    assert d.order == 2
    assert d.value() == pytest.approx(2.0 * 1.5 * -0.5)
    assert d.partial((0, 1)) == pytest.approx(3.0)


def test_mixed_dim_order_rejected():
    a = Jet.constant(1.0, 2, 3)
    b = Jet.constant(1.0, 3, 3)
    c = Jet.constant(1.0, 2, 2)
    with pytest.raises(JetError):
        a + b
    with pytest.raises(JetError):
        a * c


# -- arithmetic ------------------------------------------------------------


def test_polynomial_product_exact():
    x, y = jet_xy(2.0, 3.0)
    f = (x + y) * (x - y)  # x^2 - y^2
    g = x * x - y * y
    assert np.allclose(f.coeffs, g.coeffs)


def test_scalar_mixing():
    x, _ = jet_xy(1.0, 1.0)
    assert ((2.0 * x + 1.0) - (x + x + 1.0)).coeffs == pytest.approx(0.0)
    assert (1.0 - x).value() == 0.0
    assert (-x).value() == -1.0


def test_division_by_jet():
    x, y = jet_xy(2.0, 1.0)
    q = (x * y) / x
    assert np.allclose(q.coeffs, y.coeffs, atol=1e-14)


def test_reciprocal_hand_values():
    # f(x) = 1/x at x=2: f=-1/4 f'' = 2/8, f''' = -6/16
    x = Jet.variable(0, 2.0, 1, 3)
    r = x.reciprocal()
    assert r.value() == pytest.approx(0.5)
    assert r.partial((1,)) == pytest.approx(-0.25)
    assert r.partial((2,)) == pytest.approx(0.25)
    assert r.partial((3,)) == pytest.approx(-6.0 / 16.0)


def test_reciprocal_of_zero():
    with pytest.raises(JetDomainError):
        Jet.variable(0, 0.0, 1, 3).reciprocal()


def test_rtruediv():
    x = Jet.variable(0, 4.0, 1, 2)
    assert (1.0 / x).value() == pytest.approx(0.25)
    assert (2.0 / x).partial((1,)) == pytest.approx(-2.0 / 16.0)


# -- composition against hand-derived formulas -----------------------------


def test_exp_univariate():
    x = Jet.variable(0, 0.7, 1, 3)
    e = compose("exp", x)
    for k in range(4):
        assert e.partial((k,)) == pytest.approx(math.exp(0.7))


def test_sin_cos_chain_rule_hand():
    # f(x) = sin(x^2):
    # f'   = 2x cos(x^2)
    # f''  = 2 cos(x^2) - 4x^2 sin(x^2)
    # f''' = -12x sin(x^2) - 8x^3 cos(x^2)
    x0 = 0.8
    x = Jet.variable(0, x0, 1, 3)
    f = compose("sin", x * x)
    s, c = math.sin(x0 * x0), math.cos(x0 * x0)
    assert f.value() == pytest.approx(s)
    assert f.partial((1,)) == pytest.approx(2 * x0 * c)
    assert f.partial((2,)) == pytest.approx(2 * c - 4 * x0 * x0 * s)
    assert f.partial((3,)) == pytest.approx(-12 * x0 * s - 8 * x0**3 * c)


def test_log_hand():
    # log(x) at x0: derivatives 1/x, -1/x^2, 2/x^3
    x0 = 1.7
    f = compose("log", Jet.variable(0, x0, 1, 3))
    assert f.value() == pytest.approx(math.log(x0))
    assert f.partial((1,)) == pytest.approx(1 / x0)
    assert f.partial((2,)) == pytest.approx(-1 / x0**2)
    assert f.partial((3,)) == pytest.approx(2 / x0**3)


def test_sqrt_hand():
    x0 = 2.3
    f = compose("sqrt", Jet.variable(0, x0, 1, 3))
    assert f.partial((1,)) == pytest.approx(0.5 * x0**-0.5)
    assert f.partial((2,)) == pytest.approx(-0.25 * x0**-1.5)
    assert f.partial((3,)) == pytest.approx(0.375 * x0**-2.5)


def test_tan_hand():
    # tan' = sec^2, tan'' = 2 sec^2 tan, tan''' = 2 sec^2 (sec^2 + 2 tan^2)
    x0 = 0.6
    f = compose("tan", Jet.variable(0, x0, 1, 3))
    t = math.tan(x0)
    sec2 = 1 + t * t
    assert f.value() == pytest.approx(t)
    assert f.partial((1,)) == pytest.approx(sec2)
    assert f.partial((2,)) == pytest.approx(2 * sec2 * t)
    assert f.partial((3,)) == pytest.approx(2 * sec2 * (sec2 + 2 * t * t))


def test_arctanh_hand():
    # arctanh' = 1/(1-x^2), '' = 2x/(1-x^2)^2, ''' = (2 + 6x^2)/(1-x^2)^3
    x0 = 0.4
    f = compose("arctanh", Jet.variable(0, x0, 1, 3))
    d = 1 - x0 * x0
    assert f.value() == pytest.approx(math.atanh(x0))
    assert f.partial((1,)) == pytest.approx(1 / d)
    assert f.partial((2,)) == pytest.approx(2 * x0 / d**2)
    assert f.partial((3,)) == pytest.approx((2 + 6 * x0 * x0) / d**3)


def test_sinh_cosh():
    x0 = 0.9
    s = compose("sinh", Jet.variable(0, x0, 1, 3))
    c = compose("cosh", Jet.variable(0, x0, 1, 3))
    assert s.partial((1,)) == pytest.approx(math.cosh(x0))
    assert s.partial((2,)) == pytest.approx(math.sinh(x0))
    assert c.partial((1,)) == pytest.approx(math.sinh(x0))
    assert c.partial((3,)) == pytest.approx(math.sinh(x0))


def test_real_power():
    x0 = 1.9
    p = 2.5
    f = compose("pow", Jet.variable(0, x0, 1, 3), exponent=p)
    assert f.value() == pytest.approx(x0**p)
    assert f.partial((1,)) == pytest.approx(p * x0 ** (p - 1))
    assert f.partial((2,)) == pytest.approx(p * (p - 1) * x0 ** (p - 2))
    assert f.partial((3,)) == pytest.approx(p * (p - 1) * (p - 2) * x0 ** (p - 3))


def test_int_power():
    x, y = jet_xy(1.3, 0.4)
    f = int_power(x + y, 4)
    assert f.value() == pytest.approx(1.7**4)
    assert f.partial((1, 0)) == pytest.approx(4 * 1.7**3)
    assert int_power(x, 0).value() == 1.0
    inv = int_power(x, -2)
    assert inv.value() == pytest.approx(1.3**-2)
    assert inv.partial((1, 0)) == pytest.approx(-2 * 1.3**-3)


def test_mixed_partials_multivariate():
    # f(x, y) = exp(x * y): d3f/dx2dy = y exp(xy) (2 + xy) ... derive:
    # f_x = y e^xy; f_xx = y^2 e^xy; f_xxy = (2y + x y^2) e^xy
    x0, y0 = 0.5, 1.2
    x, y = jet_xy(x0, y0)
    f = compose("exp", x * y)
    e = math.exp(x0 * y0)
    assert f.partial((1, 0)) == pytest.approx(y0 * e)
    assert f.partial((2, 0)) == pytest.approx(y0 * y0 * e)
    assert f.partial((2, 1)) == pytest.approx((2 * y0 + x0 * y0 * y0) * e)
    assert f.partial((1, 1)) == pytest.approx((1 + x0 * y0) * e)


# -- domain handling -------------------------------------------------------


@pytest.mark.parametrize(
    "fn,value",
    [
        ("log", 0.0),
        ("log", -1.0),
        ("sqrt", -0.5),
        ("sqrt", 0.0),
        ("arctanh", 1.0),
        ("arctanh", -1.2),
    ],
)
def test_domain_errors(fn, value):
    with pytest.raises(JetDomainError):
        compose(fn, Jet.variable(0, value, 1, 3))


def test_tan_pole_margin():
    with pytest.raises(JetDomainError):
        compose("tan", Jet.variable(0, math.pi / 2, 1, 3))


def test_pow_negative_base():
    with pytest.raises(JetDomainError):
        compose("pow", Jet.variable(0, -2.0, 1, 3), exponent=0.5)


def test_unknown_function():
    with pytest.raises(JetError):
        compose("gamma", Jet.constant(1.0, 1, 3))


# -- structural properties (hypothesis) ------------------------------------

finite = st.floats(min_value=-3.0, max_value=3.0)


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite, finite)
def test_product_rule(x0, y0, a, b):
    x, y = jet_xy(x0, y0)
    f = a * x + x * y
    g = b * y + x * x
    left = (f * g).derivative(0)
    right = f.derivative(0) * g.truncate(2) + f.truncate(2) * g.derivative(0)
    assert np.allclose(left.coeffs, right.coeffs, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(finite, finite)
def test_ring_axioms(x0, y0):
    x, y = jet_xy(x0, y0)
    f, g, h = x + 1.0, y - 2.0, x * y
    assert np.allclose((f * g).coeffs, (g * f).coeffs)
    assert np.allclose(((f + g) + h).coeffs, (f + (g + h)).coeffs)
    assert np.allclose((f * (g + h)).coeffs, (f * g + f * h).coeffs, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.2, max_value=2.5))
def test_exp_log_inverse(x0):
    x = Jet.variable(0, x0, 1, 3)
    round_trip = compose("exp", compose("log", x))
    assert np.allclose(round_trip.coeffs, x.coeffs, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-1.2, max_value=1.2))
def test_sin_sq_plus_cos_sq(x0):
    x = Jet.variable(0, x0, 1, 3)
    s, c = compose("sin", x), compose("cos", x)
    one = s * s + c * c
    assert one.value() == pytest.approx(1.0)
    assert np.allclose(one.coeffs[1:], 0.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0), st.floats(min_value=0.3, max_value=3.0))
def test_division_inverts_multiplication(x0, y0):
    x, y = jet_xy(x0, y0)
    f = x + 2.0 * y
    g = y + 0.5
    assert np.allclose(((f / g) * g).coeffs, f.coeffs, atol=1e-9)
