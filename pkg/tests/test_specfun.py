import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from rkpp.specfun import (
    SQRT2_OVER_2,
    EllipticModulus,
    elliptic_K,
    erfc,
    heat_polynomial,
    heat_polynomial_coefficients,
    jacobi_cn,
    jacobi_dn,
    jacobi_sd,
    jacobi_sn,
    jacobi_sncndn,
    upper_gamma,
)

K_VALUES = [0.0, 0.1, 0.5, SQRT2_OVER_2, 0.9, 0.99]


def test_erfc_against_scipy():
    x = np.linspace(-6, 27, 2001)
    ref = sc.erfc(x)
    got = erfc(x)
    assert np.all(np.abs(got - ref) <= 1e-13 * np.maximum(ref, 1e-300) + 1e-300)


def test_erfc_large_argument_relative_accuracy():
    mpmath = pytest.importorskip("mpmath")
    for x in (5.0, 10.0, 20.0, 26.0):
        ref = float(mpmath.erfc(x))
        assert erfc(x) == pytest.approx(ref, rel=1e-12)


def test_erfc_reflection():
    x = np.linspace(-4, 4, 81)
    np.testing.assert_allclose(erfc(x) + erfc(-x), 2.0, atol=1e-15)


@pytest.mark.parametrize("s", [0.25, 0.5, 1.0, 2.5, 7.0])
def test_upper_gamma_against_scipy(s):
    for x in (0.0, 0.01, 0.5, 1.0, 3.0, 10.0, 40.0):
        ref = sc.gammaincc(s, x) * math.gamma(s)
        assert upper_gamma(s, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_upper_gamma_closed_forms():
    x = 1.7
    assert upper_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-14)
    assert upper_gamma(0.5, x) == pytest.approx(math.sqrt(math.pi) * math.erfc(math.sqrt(x)), rel=1e-13)
    # recurrence Gamma(s+1, x) = s Gamma(s, x) + x^s e^-x
    s = 1.3
    assert upper_gamma(s + 1, x) == pytest.approx(s * upper_gamma(s, x) + x**s * math.exp(-x), rel=1e-13)


def test_upper_gamma_domain():
    with pytest.raises(ValueError):
        upper_gamma(0.0, 1.0)
    with pytest.raises(ValueError):
        upper_gamma(1.0, -0.1)


def test_modulus_validation():
    with pytest.raises(ValueError):
        EllipticModulus(1.0)
    with pytest.raises(ValueError):
        EllipticModulus(-0.1)
    with pytest.raises(ValueError):
        jacobi_sn(0.3, 1.2)
    assert EllipticModulus(0.6).complementary == pytest.approx(0.8)


@pytest.mark.parametrize("k", K_VALUES)
def test_elliptic_K_against_scipy(k):
    # scipy uses the parameter m = k^2
    assert elliptic_K(k) == pytest.approx(sc.ellipk(k * k), rel=1e-14)


@pytest.mark.parametrize("k", K_VALUES)
def test_jacobi_against_scipy(k):
    u = np.linspace(-8, 8, 401)
    sn, cn, dn, _ = sc.ellipj(u, k * k)
    s2, c2, d2 = jacobi_sncndn(u, k)
    np.testing.assert_allclose(s2, sn, atol=1e-13)
    np.testing.assert_allclose(c2, cn, atol=1e-13)
    np.testing.assert_allclose(d2, dn, atol=1e-13)
    np.testing.assert_allclose(jacobi_sd(u, k), sn / dn, atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.floats(-20, 20), st.floats(0.0, 0.995))
def test_jacobi_identities(u, k):
    sn, cn, dn = jacobi_sncndn(u, k)
    assert sn * sn + cn * cn == pytest.approx(1.0, abs=1e-13)
    assert dn * dn + k * k * sn * sn == pytest.approx(1.0, abs=1e-13)


def test_jacobi_derivatives_by_finite_difference():
    k = 0.8
    u = np.linspace(-3, 3, 31)
    h = 1e-5
    sn, cn, dn = jacobi_sncndn(u, k)
    dsn = (jacobi_sn(u + h, k) - jacobi_sn(u - h, k)) / (2 * h)
    dcn = (jacobi_cn(u + h, k) - jacobi_cn(u - h, k)) / (2 * h)
    ddn = (jacobi_dn(u + h, k) - jacobi_dn(u - h, k)) / (2 * h)
    np.testing.assert_allclose(dsn, cn * dn, atol=1e-9)
    np.testing.assert_allclose(dcn, -sn * dn, atol=1e-9)
    np.testing.assert_allclose(ddn, -k * k * sn * cn, atol=1e-9)


def test_jacobi_degenerate_modulus():
    u = np.linspace(-2, 2, 21)
    np.testing.assert_allclose(jacobi_sn(u, 0.0), np.sin(u), atol=1e-15)
    np.testing.assert_allclose(jacobi_cn(u, 0.0), np.cos(u), atol=1e-15)
    np.testing.assert_allclose(jacobi_dn(u, 0.0), 1.0, atol=1e-15)


def test_jacobi_quarter_period():
    k = 0.7
    K = elliptic_K(k)
    assert jacobi_sn(K, k) == pytest.approx(1.0, abs=1e-14)
    assert jacobi_cn(K, k) == pytest.approx(0.0, abs=1e-12)
    assert jacobi_dn(K, k) == pytest.approx(math.sqrt(1 - k * k), abs=1e-12)


def test_jacobi_scalar_inputs_return_floats():
    assert isinstance(jacobi_sn(0.4, 0.5), float)
    assert isinstance(jacobi_sd(0.4, EllipticModulus(0.5)), float)


def test_heat_polynomial_low_orders():
    xi, th = 1.3, 0.4
    assert heat_polynomial(0, xi, th) == 1.0
    assert heat_polynomial(1, xi, th) == pytest.approx(xi)
    assert heat_polynomial(2, xi, th) == pytest.approx(xi**2 + 2 * th)
    assert heat_polynomial(3, xi, th) == pytest.approx(xi**3 + 6 * xi * th)
    assert heat_polynomial(4, xi, th) == pytest.approx(xi**4 + 12 * xi**2 * th + 12 * th**2)
    assert heat_polynomial_coefficients(2) == [(0, 2, 1.0), (1, 0, 2.0)]
    with pytest.raises(ValueError):
        heat_polynomial_coefficients(-1)


@pytest.mark.parametrize("m", range(0, 9))
def test_heat_polynomial_solves_heat_equation(m):
    sympy = pytest.importorskip("sympy")
    xi, th = sympy.symbols("xi theta")
    poly = sum(c * th**j * xi**pxi for j, pxi, c in heat_polynomial_coefficients(m))
    assert sympy.simplify(sympy.diff(poly, th) - sympy.diff(poly, xi, 2)) == 0
    # H_m(xi, 0) = xi^m
    assert sympy.expand(poly.subs(th, 0) - xi**m) == 0


def test_heat_polynomial_hermite_relation():
    # H_m(xi, -1/4) equals 2^-m times the physicists' Hermite polynomial
    xi = np.linspace(-2, 2, 9)
    for m in range(7):
        np.testing.assert_allclose(heat_polynomial(m, xi, -0.25), sc.eval_hermite(m, xi) / 2**m, atol=1e-12)


def test_heat_polynomial_vectorized_at_origin():
    xi = np.array([0.0, 0.0, 1.0])
    th = np.array([0.0, 1.0, 1.0])
    np.testing.assert_allclose(heat_polynomial(2, xi, th), [0.0, 2.0, 3.0])
