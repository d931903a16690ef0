"""Multiparameter solutions of the Riccati and Ermakov systems.

The unknowns ``mu, alpha, beta, gamma, delta, epsilon, kappa`` obey

    alpha'   = -b + 2c alpha + 4a alpha^2 + c0 a beta^4
    beta'    = (c + 4a alpha) beta
    gamma'   = a beta^2
    delta'   = (c + 4a alpha) delta + f - 2 alpha g + 2 c0 a beta^3 epsilon
    epsilon' = -(g - 2a delta) beta
    kappa'   = -g delta + a delta^2 + c0 a epsilon^2 beta^2

together with ``alpha = -mu'/(4a mu) - d/(2a)``.  ``c0 = 0`` is the Riccati
case and ``c0 = 1`` the Ermakov case.  Initial data refer to the anchor time
of the kernels (usually 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .expr import CoefficientSet, differentiate, eval_expr
from .kernel import KernelSet

__all__ = [
    "InitialData",
    "ParameterFunctions",
    "SingularTimeError",
    "RiccatiBlowUpError",
    "NoSignChangeError",
    "combine_riccati",
    "combine_ermakov",
    "combine_burgers",
    "solve_alternative",
    "find_singularity",
    "residual_riccati_system",
    "residual_components",
    "characteristic_residual",
    "FIELDS",
]

FIELDS = ("mu", "alpha", "beta", "gamma", "delta", "epsilon", "kappa")


class SingularTimeError(ArithmeticError):
    """Raised when a parameter function is evaluated where it is singular."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class RiccatiBlowUpError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class NoSignChangeError(ValueError):
    pass


@dataclass(frozen=True)
class InitialData:
    mu0_init: float = 1.0
    alpha0_init: float = 0.0
    beta_init: float = 1.0
    gamma_init: float = 0.0
    delta_init: float = 0.0
    eps_init: float = 0.0
    kappa_init: float = 0.0
    l0: int = 1

    def __post_init__(self):
        if not self.mu0_init > 0:
            raise ValueError("mu(0) must be positive")
        if self.beta_init == 0:
            raise ValueError("beta(0) must be non-zero")
        if self.l0 not in (-1, 1):
            raise ValueError("l0 must be +1 or -1")
        for name in ("mu0_init", "alpha0_init", "beta_init", "gamma_init", "delta_init", "eps_init", "kappa_init"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **changes) -> "InitialData":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class ParameterFunctions:
    """Evaluable ``mu .. kappa`` on ``(t0, t_end]`` (closed at t0 for the alternative flavour)."""

    flavor: str
    init: InitialData
    t0: float
    t_end: float
    _evaluate: Callable = field(repr=False)
    kernels: KernelSet | None = field(default=None, repr=False)
    extras: dict = field(default_factory=dict, repr=False)

    def evaluate(self, t) -> dict[str, np.ndarray]:
        """All seven functions at once (plus ``g``/``c`` for the alternative flavour)."""
        return self._evaluate(np.atleast_1d(np.asarray(t, dtype=float)))

    def _one(self, name, t):
        v = self.evaluate(t)[name]
        return float(v[0]) if np.ndim(t) == 0 else v.reshape(np.shape(t))

    def mu(self, t):
        return self._one("mu", t)

    def alpha(self, t):
        return self._one("alpha", t)

    def beta(self, t):
        return self._one("beta", t)

    def gamma(self, t):
        return self._one("gamma", t)

    def delta(self, t):
        return self._one("delta", t)

    def epsilon(self, t):
        return self._one("epsilon", t)

    def kappa(self, t):
        return self._one("kappa", t)

    def with_perturbation(self, name: str, amount: float) -> "ParameterFunctions":
        """Copy with ``amount`` added to one field; used to check that audits detect corruption."""
        if name not in FIELDS:
            raise KeyError(name)
        base = self._evaluate

        def shifted(t):
            out = dict(base(t))
            out[name] = out[name] + amount
            return out

        return ParameterFunctions(self.flavor, self.init, self.t0, self.t_end, shifted, self.kernels, self.extras)


def _singular_check(t, denom, what):
    bad = ~np.isfinite(denom) | (np.abs(denom) < 1e-13)
    if np.any(bad):
        t_bad = float(np.asarray(t)[bad][0])
        raise SingularTimeError(f"{what} vanishes at t={t_bad:.17g}", t_bad)


def combine_riccati(kernels: KernelSet, init: InitialData) -> ParameterFunctions:
    """The c0 = 0 general solution in terms of the kernels and initial data."""
    i = init

    def evaluate(t):
        k = kernels.all(t)
        D = i.alpha0_init + k["gamma0"]
        _singular_check(t, D, "alpha(0) + gamma0")
        E = i.delta_init + k["epsilon0"]
        return {
            "mu": -2.0 * i.mu0_init * k["mu0"] * D,
            "alpha": k["alpha0"] - k["beta0"] ** 2 / (4.0 * D),
            "beta": -i.beta_init * k["beta0"] / (2.0 * D),
            "gamma": i.l0 * i.gamma_init - i.l0 * i.beta_init**2 / (4.0 * D),
            "delta": k["delta0"] - k["beta0"] * E / (2.0 * D),
            "epsilon": i.eps_init - i.beta_init * E / (2.0 * D),
            "kappa": i.kappa_init + k["kappa0"] - E**2 / (4.0 * D),
        }

    return ParameterFunctions("riccati", init, kernels.t0, kernels.t_end, evaluate, kernels)


def combine_ermakov(kernels: KernelSet, init: InitialData, *, printed_epsilon: bool = False) -> ParameterFunctions:
    """The c0 = 1 general solution.

    ``printed_epsilon`` uses the displayed epsilon formula, which lacks a factor
    2 on ``epsilon(0)`` and so only reproduces ``epsilon(0)/2`` at the anchor.
    """
    i = init
    b2 = i.beta_init**2

    def evaluate(t):
        k = kernels.all(t)
        D = i.alpha0_init + k["gamma0"]
        R = 4.0 * D**2 - b2**2
        if np.any(R <= 0):
            t_bad = float(np.asarray(t)[R <= 0][0])
            raise SingularTimeError(f"4(gamma0 + alpha(0))^2 - beta(0)^4 <= 0 at t={t_bad:.17g}", t_bad)
        sq = np.sqrt(R)
        E = i.delta_init + k["epsilon0"]
        eps_coef = 1.0 if printed_epsilon else 2.0
        return {
            "mu": k["mu0"] * i.mu0_init * sq,
            "alpha": k["alpha0"] - k["beta0"] ** 2 * D / R,
            "beta": i.beta_init * k["beta0"] / sq,
            "gamma": i.gamma_init - 0.25 * np.log((D + 0.5 * b2) / (D - 0.5 * b2)),
            "delta": k["delta0"] + k["beta0"] * (i.eps_init * i.beta_init**3 - 2.0 * D * E) / R,
            "epsilon": (i.beta_init * E - eps_coef * i.eps_init * D) / sq,
            "kappa": (
                k["kappa0"]
                + i.kappa_init
                + i.beta_init**3 * i.eps_init * E / R
                - D * (b2 * i.eps_init**2 + E**2) / R
            ),
        }

    return ParameterFunctions("ermakov", init, kernels.t0, kernels.t_end, evaluate, kernels)


def combine_burgers(kernels: KernelSet, init: InitialData) -> ParameterFunctions:
    """General solution of the Burgers system

        alpha' + b + 4a alpha^2 = 0,  beta' + 4a alpha beta = 0,  gamma' = a beta^2,
        delta' + 4a alpha delta = f,  epsilon' + 2a delta beta = 0,

    with ``alpha = mu'/(4a mu)``.  The kernels must come from
    :func:`rkpp.kernel.kernel_functions_burgers`; alpha and epsilon change
    sign relative to the diffusion combination.
    """
    if kernels.flavor != "burgers":
        raise ValueError("combine_burgers needs Burgers-flavour kernels")
    mapped = init.replace(alpha0_init=-init.alpha0_init, eps_init=-init.eps_init)
    inner = combine_riccati(kernels, mapped)

    def evaluate(t):
        out = dict(inner.evaluate(t))
        out["alpha"] = -out["alpha"]
        out["epsilon"] = -out["epsilon"]
        return out

    return ParameterFunctions("burgers", init, kernels.t0, kernels.t_end, evaluate, kernels)


# ---------------------------------------------------------------------------
# Alternative system: a = 1, beta = 1, epsilon = 0, gamma = t


def solve_alternative(
    coeffs: CoefficientSet,
    init: InitialData,
    t_span: tuple[float, float],
    tol: float = 1e-12,
    *,
    integrate_c: bool = False,
    blowup: float = 1e8,
) -> ParameterFunctions:
    """Parameter functions of the reduced system with ``alpha = -c/4`` and ``delta = g/2``.

    ``c`` must satisfy ``c' = c^2 + 4(b - c0)``.  By default ``coeffs.c`` is
    taken as that closed-form solution; with ``integrate_c=True`` only
    ``c(t0)`` is used and the Riccati equation is integrated, raising
    :class:`RiccatiBlowUpError` if ``|c|`` exceeds ``blowup``.

    ``g`` follows from ``g' = 2f + c g`` with ``g(t0) = 2 delta(0)``, and
    ``kappa' = -g^2/4``.  ``init.alpha0_init``, ``beta_init`` and ``eps_init``
    are implied by the constraints and ignored.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    samples = np.linspace(t0, t1, 65)
    a_vals = np.asarray(eval_expr(coeffs.a, samples)) * np.ones_like(samples)
    if np.max(np.abs(a_vals - 1.0)) > 1e-12:
        raise ValueError("the alternative system needs a(t) = 1")
    g_t0 = float(eval_expr(coeffs.g, t0))
    if abs(g_t0 - 2.0 * init.delta_init) > 1e-9 * (1.0 + abs(g_t0)):
        raise ValueError(f"delta(0) = {init.delta_init!r} is inconsistent with g(0)/2 = {g_t0 / 2!r}")

    def val(e, t):
        return float(eval_expr(e, t))

    c0 = coeffs.c0

    def rhs(t, y):
        if integrate_c:
            c_t, (L, g, kap) = y[0], y[1:]
        else:
            c_t, (L, g, kap) = val(coeffs.c, t), y
        f_t, d_t = val(coeffs.f, t), val(coeffs.d, t)
        core = [c_t - 2.0 * d_t, 2.0 * f_t + c_t * g, -0.25 * g * g]
        if integrate_c:
            return [c_t * c_t + 4.0 * (val(coeffs.b, t) - c0)] + core
        return core

    y0 = [0.0, g_t0, init.kappa_init]
    events = None
    if integrate_c:
        y0 = [val(coeffs.c, t0)] + y0

        def escape(t, y):
            return blowup - abs(y[0])

        escape.terminal = True
        events = escape
    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=True, events=events)
    if integrate_c and sol.status == 1:
        t_b = float(sol.t_events[0][0])
        raise RiccatiBlowUpError(f"c(t) blows up near t={t_b:.6g}", t_b)
    if sol.status != 0:
        raise RuntimeError(f"alternative system: integration failed ({sol.message})")
    dense = sol.sol
    off = 1 if integrate_c else 0

    def evaluate(t):
        if np.any(t < t0 - 1e-12) or np.any(t > t1 + 1e-12):
            raise ValueError(f"t outside [{t0}, {t1}]")
        y = dense(t)
        c_t = y[0] if integrate_c else np.asarray(eval_expr(coeffs.c, t)) * np.ones_like(t)
        L, g, kap = y[off], y[off + 1], y[off + 2]
        one = np.ones_like(t)
        return {
            "mu": init.mu0_init * np.exp(L),
            "alpha": -0.25 * c_t,
            "beta": one,
            "gamma": init.gamma_init + (t - t0),
            "delta": 0.5 * g,
            "epsilon": 0.0 * one,
            "kappa": kap,
            "g": g,
            "c": c_t,
        }

    return ParameterFunctions("alternative", init, t0, t1, evaluate, None, {"integrate_c": integrate_c})


# ---------------------------------------------------------------------------
# Singularity times and audits


def find_singularity(kernels: KernelSet, alpha_init: float, bracket: tuple[float, float], tol: float = 1e-12) -> float:
    """Time ``T*`` with ``gamma0(T*) = -alpha(0)``, where ``mu`` of the Riccati solution vanishes."""
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError("bracket must be increasing")
    if lo <= kernels.t0 or hi > kernels.t_end:
        raise ValueError(
            f"bracket [{lo}, {hi}] must lie in ({kernels.t0}, {kernels.t_end}], the window free of mu0 zeros"
        )

    def fn(t):
        return kernels.gamma0(t) + alpha_init

    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise NoSignChangeError(
            f"gamma0 + alpha(0) has the same sign at both ends of [{lo}, {hi}] ({f_lo:.3g}, {f_hi:.3g})"
        )
    return float(brentq(fn, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


def _coefficient_arrays(coeffs: CoefficientSet, t):
    return {n: np.asarray(eval_expr(getattr(coeffs, n), t)) * np.ones_like(t) for n in "abcdfg"}


def residual_components(
    params: ParameterFunctions, coeffs: CoefficientSet, t_samples, h: float = 1e-4
) -> dict[str, float]:
    """Max |LHS - RHS| per equation, with central differences of step ``h``.

    Burgers-flavour parameters are checked against the Burgers system; all
    others against the diffusion system with ``c0`` taken from ``coeffs``.
    The ``mu`` entry checks the link between ``alpha`` and ``mu'/mu``.
    """
    t = np.asarray(t_samples, dtype=float)
    lo_ok = params.t0 if params.flavor == "alternative" else params.t0 + h
    if np.any(t - h < lo_ok - 1e-15) or np.any(t + h > params.t_end + 1e-15):
        raise ValueError(f"samples with +-h must lie inside the window ({params.t0}, {params.t_end}]")
    v = params.evaluate(t)
    vp, vm = params.evaluate(t + h), params.evaluate(t - h)
    dv = {n: (vp[n] - vm[n]) / (2.0 * h) for n in FIELDS}
    k = _coefficient_arrays(coeffs, t)
    a, b, c, d, f, g = (k[n] for n in "abcdfg")
    al, be, eps, de = v["alpha"], v["beta"], v["epsilon"], v["delta"]
    dmu_over_mu = dv["mu"] / v["mu"]
    if params.flavor == "burgers":
        eqs = {
            "alpha": dv["alpha"] + b + 4 * a * al**2,
            "beta": dv["beta"] + 4 * a * al * be,
            "gamma": dv["gamma"] - a * be**2,
            "delta": dv["delta"] + 4 * a * al * de - f,
            "epsilon": dv["epsilon"] + 2 * a * de * be,
            "mu": al - dmu_over_mu / (4 * a),
        }
    else:
        c0 = coeffs.c0
        l0 = params.init.l0
        eqs = {
            "alpha": dv["alpha"] - (-b + 2 * c * al + 4 * a * al**2 + c0 * a * be**4),
            "beta": dv["beta"] - (c + 4 * a * al) * be,
            "gamma": dv["gamma"] - l0 * a * be**2,
            "delta": dv["delta"] - ((c + 4 * a * al) * de + f - 2 * al * g + 2 * c0 * a * be**3 * eps),
            "epsilon": dv["epsilon"] + (g - 2 * a * de) * be,
            "kappa": dv["kappa"] - (-g * de + a * de**2 + c0 * a * eps**2 * be**2),
            "mu": al - (-dmu_over_mu / (4 * a) - d / (2 * a)),
        }
    return {n: float(np.max(np.abs(r))) for n, r in eqs.items()}


def residual_riccati_system(
    params: ParameterFunctions,
    coeffs: CoefficientSet,
    t_samples,
    h: float = 1e-4,
    *,
    include_mu: bool = True,
) -> float:
    """Largest residual over the system (and the mu link unless ``include_mu`` is False)."""
    comps = residual_components(params, coeffs, t_samples, h)
    if not include_mu:
        comps.pop("mu")
    return max(comps.values())


def characteristic_residual(params: ParameterFunctions, coeffs: CoefficientSet, t_samples, h: float = 1e-4) -> float:
    """FD residual of mu in the consistent c0 = 0 characteristic equation."""
    t = np.asarray(t_samples, dtype=float)
    m = params.mu(t)
    mp, mm = params.mu(t + h), params.mu(t - h)
    d1 = (mp - mm) / (2 * h)
    d2 = (mp - 2 * m + mm) / (h * h)
    k = _coefficient_arrays(coeffs, t)
    a, b, c, d = k["a"], k["b"], k["c"], k["d"]
    da = np.asarray(eval_expr(differentiate(coeffs.a), t)) * np.ones_like(t)
    dd = np.asarray(eval_expr(differentiate(coeffs.d), t)) * np.ones_like(t)
    sigma = a * b + c * d - d * d + 0.5 * d * da / a - 0.5 * dd
    r = d2 - (da / a + 2 * c - 4 * d) * d1 - 4 * sigma * m
    return float(np.max(np.abs(r) / (1.0 + np.abs(m) + np.abs(d1))))
