import math

import numpy as np
import pytest

from rkpp.expr import CoefficientSet, parse_expr
from rkpp.kernel import kernel_functions, kernel_functions_burgers, solve_characteristic, solve_characteristic_burgers
from rkpp.riccati import (
    InitialData,
    NoSignChangeError,
    RiccatiBlowUpError,
    SingularTimeError,
    characteristic_residual,
    combine_burgers,
    combine_ermakov,
    combine_riccati,
    find_singularity,
    residual_components,
    residual_riccati_system,
    solve_alternative,
)

GENERAL = dict(a="1+t/3", b="0.3*cos(t)", c="sin(t)", d="0.2*t", f="exp(-t)", g="cos(2*t)")
FULL_INIT = dict(mu0_init=1.3, beta_init=0.7, gamma_init=0.1, delta_init=0.4, eps_init=-0.3, kappa_init=0.5)
SAMPLES = np.linspace(0.2, 1.8, 20)


def kernels_for(coeffs, t_max):
    return kernel_functions(coeffs, solve_characteristic(coeffs, (0.0, t_max)))


@pytest.fixture(scope="module")
def free():
    return kernels_for(CoefficientSet(a=1), 10)


@pytest.fixture(scope="module")
def general():
    coeffs = CoefficientSet.from_strings(**GENERAL)
    return coeffs, kernels_for(coeffs, 2)


# --- initial data -----------------------------------------------------------


def test_initial_data_validation():
    with pytest.raises(ValueError):
        InitialData(mu0_init=0)
    with pytest.raises(ValueError):
        InitialData(beta_init=0)
    with pytest.raises(ValueError):
        InitialData(l0=2)
    with pytest.raises(ValueError):
        InitialData(kappa_init=math.nan)


# --- Riccati combination -----------------------------------------------------


def test_free_case_trivial_data(free):
    p = combine_riccati(free, InitialData(mu0_init=2.0, gamma_init=0.3))
    t = np.linspace(0.1, 5, 9)
    np.testing.assert_allclose(p.alpha(t), 0.0, atol=1e-12)
    np.testing.assert_allclose(p.mu(t), 2.0, rtol=1e-12)
    np.testing.assert_allclose(p.gamma(t), 0.3 + t, rtol=1e-12)
    np.testing.assert_allclose(p.beta(t), 1.0, rtol=1e-12)


def test_free_case_general_alpha(free):
    p = combine_riccati(free, InitialData(mu0_init=1.5, alpha0_init=0.1))
    t = np.array([0.5, 2.0, 4.0])
    np.testing.assert_allclose(p.mu(t), 1.5 * (1 - 0.4 * t), rtol=1e-11)


def test_free_case_residual_and_corruption(free):
    coeffs = CoefficientSet(a=1)
    p = combine_riccati(free, InitialData(mu0_init=2.0, gamma_init=0.3))
    assert residual_riccati_system(p, coeffs, SAMPLES) <= 1e-7
    assert residual_riccati_system(p.with_perturbation("alpha", 1e-3), coeffs, SAMPLES) >= 1e-4
    with pytest.raises(KeyError):
        p.with_perturbation("zeta", 1.0)


def test_general_riccati_combination_solves_system(general):
    coeffs, k = general
    init = InitialData(alpha0_init=-1.0, **FULL_INIT)
    # alpha(0) + gamma0 stays negative, so the window is free of singular times
    assert np.all(init.alpha0_init + k.gamma0(SAMPLES) < 0)
    p = combine_riccati(k, init)
    assert residual_riccati_system(p, coeffs, SAMPLES, h=1e-4) <= 1e-6
    assert characteristic_residual(p, coeffs, SAMPLES) <= 1e-6


def test_riccati_initial_limits(general):
    _, k = general
    init = InitialData(alpha0_init=-1.0, **FULL_INIT)
    v = combine_riccati(k, init).evaluate(np.array([1e-6]))
    for field, name in [("mu", "mu0_init"), ("alpha", "alpha0_init"), ("beta", "beta_init"),
                        ("gamma", "gamma_init"), ("delta", "delta_init"), ("epsilon", "eps_init"),
                        ("kappa", "kappa_init")]:
        assert v[field][0] == pytest.approx(getattr(init, name), abs=1e-4)


def test_beta_identity_both_forms(general):
    coeffs, k = general
    init = InitialData(alpha0_init=-1.0, **FULL_INIT)
    p = combine_riccati(k, init)
    beta_alt = init.beta_init * init.mu0_init * k.lam(SAMPLES) / p.mu(SAMPLES)
    np.testing.assert_allclose(p.beta(SAMPLES), beta_alt, rtol=1e-10)


def test_gamma_derivative_and_l0_variant(general):
    coeffs, k = general
    h = 1e-4
    for l0 in (1, -1):
        p = combine_riccati(k, InitialData(alpha0_init=-1.0, l0=l0, **FULL_INIT))
        a = 1 + SAMPLES / 3
        dg = (p.gamma(SAMPLES + h) - p.gamma(SAMPLES - h)) / (2 * h)
        np.testing.assert_allclose(dg, l0 * a * p.beta(SAMPLES) ** 2, atol=1e-7)
        assert residual_components(p, coeffs, SAMPLES)["gamma"] <= 1e-7


def test_singular_time_reported(general):
    _, k = general
    p = combine_riccati(k, InitialData(alpha0_init=0.2))
    t_star = find_singularity(k, 0.2, (0.2, 1.9))
    with pytest.raises(SingularTimeError) as err:
        p.mu(np.array([t_star]))
    assert err.value.t == pytest.approx(t_star)


# --- singularity times -------------------------------------------------------


@pytest.mark.parametrize("alpha0", [0.05, 0.25, 2.0])
def test_free_singularity_closed_form(free, alpha0):
    t_star = find_singularity(free, alpha0, (1e-3, 10))
    assert t_star == pytest.approx(1 / (4 * alpha0), abs=1e-8)
    p = combine_riccati(free, InitialData(alpha0_init=alpha0))
    approach = [abs(p.mu(t_star * (1 - e))) for e in (1e-2, 1e-4, 1e-6)]
    assert approach[0] > approach[1] > approach[2]
    assert approach[2] < 1e-5
    assert abs(free.pair.mu0(t_star) * (alpha0 + free.gamma0(t_star))) <= 1e-8


def test_singularity_errors(free):
    with pytest.raises(NoSignChangeError):
        find_singularity(free, -1.0, (0.5, 5))
    with pytest.raises(ValueError):
        find_singularity(free, 0.25, (0.0, 5))
    with pytest.raises(ValueError):
        find_singularity(free, 0.25, (2, 1))


# --- Ermakov combination -----------------------------------------------------


@pytest.fixture(scope="module")
def ermakov_21():
    coeffs = CoefficientSet(a=1, c=1, d=1, c0=1)
    return coeffs, kernels_for(coeffs, 2.5)


def test_ermakov_worked_example(ermakov_21):
    coeffs, k = ermakov_21
    p = combine_ermakov(k, InitialData(alpha0_init=-3 / 8, beta_init=0.5))
    t = np.linspace(0.01, 2, 50)
    np.testing.assert_allclose(p.mu(t), np.sqrt((np.exp(-2 * t) + 1) / 2), atol=1e-6)
    np.testing.assert_allclose(p.beta(t), np.exp(-t) / np.sqrt(2 * (np.exp(-2 * t) + 1)), atol=1e-6)
    np.testing.assert_allclose(p.alpha(t), -(np.exp(-2 * t) + 2) / (4 * (1 + np.exp(-2 * t))), atol=1e-6)
    assert residual_riccati_system(p, coeffs, SAMPLES) <= 1e-6
    comps = residual_components(p, coeffs, SAMPLES)
    for name in ("delta", "epsilon", "kappa"):
        assert comps[name] == 0.0
        np.testing.assert_array_equal(getattr(p, name)(SAMPLES), 0.0)


def test_ermakov_general_data():
    coeffs = CoefficientSet.from_strings(c0=1, **GENERAL)
    k = kernels_for(coeffs, 1.0)
    init = InitialData(alpha0_init=-2.0, **FULL_INIT)
    t = np.linspace(0.1, 0.9, 20)
    p = combine_ermakov(k, init)
    assert residual_riccati_system(p, coeffs, t) <= 1e-6
    v = p.evaluate(np.array([1e-6]))
    assert v["epsilon"][0] == pytest.approx(init.eps_init, abs=1e-4)
    assert v["kappa"][0] == pytest.approx(init.kappa_init, abs=1e-4)


def test_ermakov_displayed_epsilon_halves_initial_value():
    coeffs = CoefficientSet.from_strings(c0=1, **GENERAL)
    k = kernels_for(coeffs, 1.0)
    init = InitialData(alpha0_init=-2.0, **FULL_INIT)
    p = combine_ermakov(k, init, printed_epsilon=True)
    assert p.epsilon(1e-6) == pytest.approx(init.eps_init / 2, abs=1e-4)
    assert residual_components(p, coeffs, np.linspace(0.1, 0.9, 20))["delta"] > 1e-3


def test_ermakov_gamma_limit(ermakov_21):
    _, k = ermakov_21
    big = combine_ermakov(k, InitialData(alpha0_init=-1e6, gamma_init=0.7, beta_init=0.5))
    assert big.gamma(1.0) == pytest.approx(0.7, abs=1e-6)


def test_ermakov_domain_violation(ermakov_21):
    _, k = ermakov_21
    p = combine_ermakov(k, InitialData(alpha0_init=0.1))
    with pytest.raises(SingularTimeError):
        p.mu(np.linspace(0.1, 2.4, 50))


# --- Burgers combination -----------------------------------------------------


def test_burgers_combination_solves_system():
    a, b, f = parse_expr("1/4 + t/8"), parse_expr("0.3*sin(t)"), parse_expr("cos(t)")
    pair = solve_characteristic_burgers(a, b, (0, 2))
    k = kernel_functions_burgers(a, b, f, pair)
    p = combine_burgers(k, InitialData(alpha0_init=0.4, delta_init=0.2, eps_init=-0.1, gamma_init=0.3))
    coeffs = CoefficientSet(a=a, b=b, f=f)
    comps = residual_components(p, coeffs, SAMPLES)
    assert max(comps.values()) <= 1e-6
    assert p.alpha(1e-7) == pytest.approx(0.4, abs=1e-5)
    with pytest.raises(ValueError):
        combine_burgers(kernels_for(CoefficientSet(a=1), 1), InitialData())


# --- alternative system ------------------------------------------------------


def test_alternative_tanh_example():
    coeffs = CoefficientSet.from_strings(
        a="1", b="(1 - 2*tanh(t)^2)/4", c="tanh(t)", d="1", f="2*sech(t)*tanh(t)", g="-2*sech(t)", c0=0
    )
    init = InitialData(delta_init=-1.0)
    t = np.linspace(0, 2, 21)
    for integrate in (False, True):
        p = solve_alternative(coeffs, init, (0, 2), integrate_c=integrate)
        np.testing.assert_allclose(p.mu(t), np.cosh(t) * np.exp(-2 * t), rtol=1e-9)
        np.testing.assert_allclose(p.delta(t), -1 / np.cosh(t), atol=1e-9)
        np.testing.assert_allclose(p.kappa(t), -np.tanh(t), atol=1e-9)
        np.testing.assert_allclose(p.gamma(t), t)
        assert residual_riccati_system(p, coeffs, np.linspace(0.1, 1.9, 20)) <= 1e-6
    assert p.mu(0.0) == pytest.approx(1.0)


def test_alternative_rational_example():
    coeffs = CoefficientSet.from_strings(
        a="1", b="-csch(t)^2/2", c="csch(t)*sech(t)", d="(1 + csch(t)*sech(t))/2", c0=0
    )
    p = solve_alternative(coeffs, InitialData(mu0_init=math.exp(-0.05)), (0.05, 2))
    # csch t sech t = 2 / sinh(2t) equals 2 where sinh(2t) = 1
    t_half = math.asinh(1.0) / 2
    assert p.alpha(t_half) == pytest.approx(-0.5, abs=1e-12)
    t = np.linspace(0.1, 2, 10)
    np.testing.assert_allclose(p.mu(t), np.exp(-t), rtol=1e-9)


def test_alternative_drift_example():
    coeffs = CoefficientSet.from_strings(
        a="1", b="1 - (1 - tanh(t/2))/8", c="(1 - tanh(t/2))/2", d="1",
        f="exp(t/2)*tanh(t/2)/2", g="2*exp(t/2)", c0=1,
    )
    p = solve_alternative(coeffs, InitialData(delta_init=1.0), (0, 2))
    t = np.linspace(0, 2, 11)
    np.testing.assert_allclose(p.delta(t), np.exp(t / 2), rtol=1e-9)
    np.testing.assert_allclose(p.kappa(t), 1 - np.exp(t), atol=1e-9)
    assert p.kappa(0.0) == 0.0
    assert residual_riccati_system(p, coeffs, np.linspace(0.1, 1.9, 20)) <= 1e-6


def test_alternative_errors():
    with pytest.raises(RiccatiBlowUpError) as err:
        solve_alternative(CoefficientSet(a=1, b=1), InitialData(), (0, 3), integrate_c=True)
    # c = 2 tan(2t) escapes at pi/4
    assert err.value.t == pytest.approx(math.pi / 4, abs=1e-3)
    with pytest.raises(ValueError):
        solve_alternative(CoefficientSet(a=1, g=1), InitialData(delta_init=0.0), (0, 1))
    with pytest.raises(ValueError):
        solve_alternative(CoefficientSet(a=2), InitialData(), (0, 1))
