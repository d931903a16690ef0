"""Characteristic equations and the kernel functions built on them.

The fundamental pair ``mu0, mu1`` solves

    mu'' - (a'/a + 2c - 4d) mu' - 4 sigma mu = 0,
    sigma = a b + c d - d^2 + (d/2)(a'/a - d'/d),

from the standard data ``mu0(t0) = 0, mu0'(t0) = 2 a(t0)`` and
``mu1(t0) = 1, mu1'(t0) = 0``.  The kernels ``alpha0 .. kappa0`` are the
particular solution of the Riccati system that is singular at the anchor time
``t0``; every multiparameter solution is an algebraic combination of them
(see :mod:`rkpp.riccati`).

The Burgers flavour reuses the same machinery with ``b -> -b`` and
``c = d = g = 0``, which turns the characteristic equation into
``mu'' - (a'/a) mu' + 4 a b mu = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .expr import CoefficientSet, Const, Expr, differentiate, eval_expr

__all__ = [
    "KernelError",
    "CharacteristicPair",
    "KernelSet",
    "solve_characteristic",
    "solve_characteristic_burgers",
    "kernel_functions",
    "kernel_functions_burgers",
    "burgers_coefficients",
    "CONSISTENT",
    "PRINTED",
]

CONSISTENT = "consistent"
PRINTED = "printed"

DEFAULT_TOL = 1e-12
DEFAULT_GUARD = 1e-6


class KernelError(RuntimeError):
    pass


def _scalar(e: Expr, t: float) -> float:
    return float(eval_expr(e, t))


class _Coefficients:
    """Scalar callables for a..g and the derived ODE coefficients."""

    def __init__(self, coeffs: CoefficientSet, convention: str = CONSISTENT):
        if convention not in (CONSISTENT, PRINTED):
            raise ValueError(f"unknown convention {convention!r}")
        self.coeffs = coeffs
        self.convention = convention
        self.da = differentiate(coeffs.a)
        self.dd = differentiate(coeffs.d)

    def values(self, t: float):
        c = self.coeffs
        return tuple(_scalar(getattr(c, name), t) for name in "abcdfg")

    def sigma(self, t: float) -> float:
        a, b, c, d, _, _ = self.values(t)
        da, dd = _scalar(self.da, t), _scalar(self.dd, t)
        # (d/2)(a'/a - d'/d) written without dividing by d, which is 0 when d == 0
        return a * b + c * d - d * d + 0.5 * d * da / a - 0.5 * dd

    def char_coefficients(self, t: float) -> tuple[float, float]:
        """Return (P, Q) with mu'' = P mu' + Q mu."""
        a, b, c, d, _, _ = self.values(t)
        da, dd = _scalar(self.da, t), _scalar(self.dd, t)
        p_coef = da / a + 2.0 * c - 4.0 * d
        if self.convention == CONSISTENT:
            q_coef = 4.0 * (a * b + c * d - d * d + 0.5 * d * da / a - 0.5 * dd)
        else:
            q_coef = 4.0 * (a * b + c * d + d * d - 0.5 * d * da / a + 0.5 * dd)
        return p_coef, q_coef


# ---------------------------------------------------------------------------
# Characteristic pair


@dataclass(frozen=True)
class CharacteristicPair:
    """Dense fundamental pair of the characteristic equation on ``[t0, t_max]``."""

    t0: float
    t_max: float
    a_at_t0: float
    mu1_init: float
    flavor: str
    convention: str
    coeffs: CoefficientSet
    _solution: object = field(repr=False)
    _ode: object = field(repr=False)

    @property
    def a0_at_0(self) -> float:
        return self.a_at_t0

    def _states(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t0 - 1e-12) or np.any(t > self.t_max + 1e-12):
            raise KernelError(f"t outside the characteristic interval [{self.t0}, {self.t_max}]")
        return self._solution(t)

    def mu0(self, t):
        return self._pick(t, 0)

    def dmu0(self, t):
        return self._pick(t, 1)

    def mu1(self, t):
        return self._pick(t, 2)

    def dmu1(self, t):
        return self._pick(t, 3)

    def _pick(self, t, i):
        y = self._states(t)[i]
        return float(y) if np.ndim(t) == 0 else y

    def residual(self, t_samples) -> float:
        """Max relative residual of the ODE at the samples, using the stored derivatives."""
        worst = 0.0
        for t in np.asarray(t_samples, dtype=float):
            m0, dm0, m1, dm1 = self._states(t)
            p_coef, q_coef = self._ode.char_coefficients(t)
            # second derivative by differencing the dense first derivative
            h = 1e-5 * max(1.0, abs(t))
            lo, hi = max(self.t0, t - h), min(self.t_max, t + h)
            for j, (m, dm) in enumerate(((m0, dm0), (m1, dm1))):
                ddm = (self._states(hi)[2 * j + 1] - self._states(lo)[2 * j + 1]) / (hi - lo)
                r = abs(ddm - p_coef * dm - q_coef * m) / (1.0 + abs(m) + abs(dm))
                worst = max(worst, r)
        return worst

    def mu0_zeros(self, n_samples: int = 4001) -> list[float]:
        """Zeros of mu0 in ``(t0, t_max]``, located by sampling and bracketing."""
        ts = np.linspace(self.t0, self.t_max, n_samples)[1:]
        vals = self.mu0(ts)
        zeros = []
        for i in range(len(ts) - 1):
            if vals[i] == 0.0:
                zeros.append(float(ts[i]))
            elif vals[i] * vals[i + 1] < 0:
                zeros.append(brentq(self.mu0, ts[i], ts[i + 1], xtol=1e-14))
        return zeros

    def wronskian(self, t):
        """mu0 mu1' - mu0' mu1."""
        return self.mu0(t) * self.dmu1(t) - self.dmu0(t) * self.mu1(t)


def _solve(fun, t_span, y0, tol, what):
    sol = solve_ivp(fun, t_span, y0, method="DOP853", rtol=tol, atol=tol * 1e-2, dense_output=True)
    if sol.status != 0:
        raise KernelError(f"{what}: integration failed ({sol.message})")
    return sol


def solve_characteristic(
    coeffs: CoefficientSet,
    t_span: tuple[float, float],
    tol: float = DEFAULT_TOL,
    *,
    mu1_init: float = 1.0,
    convention: str = CONSISTENT,
    flavor: str = "diffusion",
) -> CharacteristicPair:
    """Integrate the characteristic equation from the standard data at ``t_span[0]``.

    ``convention="printed"`` uses the mu-coefficient exactly as displayed next to
    the Ermakov equation (``+d^2`` and the opposite sign on the ``d'/d`` term);
    it only differs from the consistent form when ``d`` is not identically 0.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    if mu1_init == 0:
        raise ValueError("mu1(t0) must be non-zero")
    ode = _Coefficients(coeffs, convention)
    samples = np.linspace(t0, t1, 257)
    a_vals = np.asarray(eval_expr(coeffs.a, samples))
    if flavor == "diffusion" and np.any(a_vals <= 0):
        raise KernelError("a(t) must be positive on the interval")
    if flavor == "burgers" and (np.any(a_vals == 0) or np.any(np.sign(a_vals) != np.sign(a_vals[0]))):
        raise KernelError("a(t) must not vanish on the interval")
    a0 = float(a_vals[0])

    def rhs(t, y):
        p_coef, q_coef = ode.char_coefficients(t)
        return [y[1], p_coef * y[1] + q_coef * y[0], y[3], p_coef * y[3] + q_coef * y[2]]

    sol = _solve(rhs, (t0, t1), [0.0, 2.0 * a0, float(mu1_init), 0.0], tol, "characteristic equation")
    return CharacteristicPair(
        t0=t0,
        t_max=t1,
        a_at_t0=a0,
        mu1_init=float(mu1_init),
        flavor=flavor,
        convention=convention,
        coeffs=coeffs,
        _solution=sol.sol,
        _ode=ode,
    )


def burgers_coefficients(a: Expr, b: Expr, f: Expr) -> CoefficientSet:
    """Diffusion-form coefficients whose Riccati system maps onto the Burgers one."""
    return CoefficientSet(a=a, b=-b if isinstance(b, Expr) else Const(-float(b)), f=f)


def solve_characteristic_burgers(
    a: Expr,
    b: Expr,
    t_span: tuple[float, float],
    tol: float = DEFAULT_TOL,
    *,
    mu1_init: float = 1.0,
) -> CharacteristicPair:
    """Fundamental pair of ``mu'' - (a'/a) mu' + 4 a b mu = 0``."""
    coeffs = burgers_coefficients(a, b, Const(0.0))
    return solve_characteristic(coeffs, t_span, tol, mu1_init=mu1_init, flavor="burgers")


# ---------------------------------------------------------------------------
# Kernels


@dataclass(frozen=True)
class KernelSet:
    """Kernel functions on ``(t0, t_end]``; all accessors accept arrays."""

    coeffs: CoefficientSet
    pair: CharacteristicPair
    flavor: str
    t_switch: float
    t_end: float
    _phase1: object = field(repr=False)
    _phase2: object = field(repr=False)
    _ode: object = field(repr=False)

    @property
    def t0(self) -> float:
        return self.pair.t0

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= self.t0) or np.any(t > self.t_end + 1e-12):
            raise KernelError(f"kernels are defined on ({self.t0}, {self.t_end}]")
        return t

    def _state(self, t):
        """(Lambda, I_delta, eps0, kappa0) stacked, switching phases at t_switch."""
        t = self._check(t)
        flat = np.atleast_1d(t)
        out = np.empty((4, flat.size))
        early = flat <= self.t_switch
        if np.any(early):
            y = self._phase1(flat[early])
            out[:, early] = self._phase1_to_state(flat[early], y)
        if np.any(~early):
            out[:, ~early] = self._phase2(flat[~early])
        return out

    def _phase1_to_state(self, t, y):
        lam_log, i_delta, _, i_e1, i_e2, i_k1, i_k2 = y
        c = self.coeffs
        a = np.asarray(eval_expr(c.a, t))
        lam = np.exp(lam_log)
        m0, dm0 = self.pair.mu0(t), self.pair.dmu0(t)
        delta0 = lam * i_delta / m0
        eps0 = -2.0 * a * lam * delta0 / dm0 - 8.0 * i_e1 + 2.0 * i_e2
        kappa0 = -a * m0 * delta0**2 / dm0 - 4.0 * i_k1 + 2.0 * i_k2
        return np.vstack([lam_log, i_delta, eps0, kappa0])

    @staticmethod
    def _out(t, v):
        return float(v[0]) if np.ndim(t) == 0 else v.reshape(np.shape(t))

    def lam(self, t):
        return self._out(t, np.exp(self._state(t)[0]))

    def alpha0(self, t):
        t = self._check(t)
        a = np.atleast_1d(eval_expr(self.coeffs.a, t))
        d = np.atleast_1d(eval_expr(self.coeffs.d, t))
        v = -np.atleast_1d(self.pair.dmu0(t)) / (4.0 * a * np.atleast_1d(self.pair.mu0(t))) - d / (2.0 * a)
        return self._out(t, v)

    def beta0(self, t):
        t = self._check(t)
        return self._out(t, np.exp(self._state(t)[0]) / np.atleast_1d(self.pair.mu0(t)))

    def gamma0(self, t):
        t = self._check(t)
        c = self.coeffs
        base = _scalar(c.d, self.t0) / (2.0 * _scalar(c.a, self.t0))
        v = base - np.atleast_1d(self.pair.mu1(t)) / (2.0 * self.pair.mu1_init * np.atleast_1d(self.pair.mu0(t)))
        return self._out(t, v)

    def gamma0_integral_form(self, t, *, lambda_power: int = 2):
        """gamma0 from its integral representation, by independent adaptive quadrature.

        ``lambda_power=1`` reproduces the integrand exactly as displayed, which
        disagrees with the mu1/mu0 form whenever c - 2d and sigma are both non-zero.
        """
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(self._check(t))
        c = self.coeffs
        ode = self._ode
        a0, d0 = _scalar(c.a, self.t0), _scalar(c.d, self.t0)

        def integrand(s):
            lam = math.exp(float(self._lam_scalar(s)))
            return _scalar(c.a, s) * ode.sigma(s) * lam**lambda_power / float(self.pair.dmu0(s)) ** 2

        out = []
        for ti in t:
            integral, _ = quad(integrand, self.t0, float(ti), epsabs=1e-13, epsrel=1e-12, limit=200)
            a, m0, dm0 = _scalar(c.a, ti), float(self.pair.mu0(ti)), float(self.pair.dmu0(ti))
            lam = math.exp(float(self._lam_scalar(ti)))
            out.append(d0 / (2.0 * a0) - a * lam**2 / (m0 * dm0) - 4.0 * integral)
        return out[0] if scalar else np.array(out)

    def _lam_scalar(self, s: float) -> float:
        if s <= self.t0:
            return 0.0
        return float(self._state(float(s))[0][0])

    def delta0(self, t):
        t = self._check(t)
        st = self._state(t)
        return self._out(t, np.exp(st[0]) * st[1] / np.atleast_1d(self.pair.mu0(t)))

    def epsilon0(self, t):
        return self._out(t, self._state(t)[2])

    def kappa0(self, t):
        return self._out(t, self._state(t)[3])

    def all(self, t) -> dict[str, np.ndarray]:
        """Evaluate every kernel at once (one dense-output lookup)."""
        t = np.atleast_1d(self._check(t))
        st = self._state(t)
        c = self.coeffs
        a = np.atleast_1d(eval_expr(c.a, t))
        d = np.atleast_1d(eval_expr(c.d, t))
        m0, dm0, m1 = self.pair.mu0(t), self.pair.dmu0(t), self.pair.mu1(t)
        lam = np.exp(st[0])
        base = _scalar(c.d, self.t0) / (2.0 * _scalar(c.a, self.t0))
        return {
            "alpha0": -dm0 / (4.0 * a * m0) - d / (2.0 * a),
            "beta0": lam / m0,
            "gamma0": base - m1 / (2.0 * self.pair.mu1_init * m0),
            "delta0": lam * st[1] / m0,
            "epsilon0": st[2],
            "kappa0": st[3],
            "lambda": lam,
            "mu0": m0,
            "dmu0": dm0,
        }


def _choose_switch(pair: CharacteristicPair, t_end: float) -> float:
    ts = pair.t0 + min(0.1, 0.25 * (t_end - pair.t0))
    probe = np.linspace(pair.t0, ts, 65)
    dm0 = pair.dmu0(probe)
    while np.any(np.sign(dm0) != np.sign(dm0[0])) or np.min(np.abs(dm0)) < 0.1 * abs(dm0[0]):
        ts = pair.t0 + 0.5 * (ts - pair.t0)
        probe = np.linspace(pair.t0, ts, 65)
        dm0 = pair.dmu0(probe)
        if ts - pair.t0 < 1e-8:
            raise KernelError("mu0' vanishes at the anchor time")
    return ts


def kernel_functions(
    coeffs: CoefficientSet,
    pair: CharacteristicPair,
    tol: float = DEFAULT_TOL,
    *,
    guard: float = DEFAULT_GUARD,
    flavor: str | None = None,
) -> KernelSet:
    """Build the six kernels plus ``lambda`` on ``(t0, t_end]``.

    ``t_end`` is the characteristic interval's end, pulled back by ``guard``
    before the first zero of ``mu0`` where the kernels blow up.

    Near the anchor the integral representations (with their 1/(mu0')^2
    weights) are integrated; past a short switch time the kernels'
    own first-order equations take over, so zeros of mu0' later in the
    window do no harm.
    """
    flavor = flavor or pair.flavor
    ode = _Coefficients(coeffs, pair.convention)
    zeros = pair.mu0_zeros()
    t_end = pair.t_max if not zeros else zeros[0] - guard
    if t_end <= pair.t0:
        raise KernelError("mu0 vanishes immediately after the anchor time")
    ts = _choose_switch(pair, t_end)

    def fdg(t):
        a, b, c, d, f, g = ode.values(t)
        return a, c, d, f, g, f + d * g / a

    def rhs1(t, y):
        lam = math.exp(y[0])
        m0, dm0 = float(pair.mu0(t)), float(pair.dmu0(t))
        a, c, d, f, g, fd = fdg(t)
        sig = ode.sigma(t)
        m_delta = lam * y[1]  # mu0 * delta0
        return [
            c - 2.0 * d,
            (fd * m0 + g * dm0 / (2.0 * a)) / lam,
            a * sig * lam * lam / dm0**2,
            a * sig * lam * m_delta / dm0**2,
            a * lam * fd / dm0,
            a * sig * m_delta**2 / dm0**2,
            a * m_delta * fd / dm0,
        ]

    phase1 = _solve(rhs1, (pair.t0, ts), [0.0] * 7, tol, "kernel quadrature")

    def rhs2(t, y):
        lam = math.exp(y[0])
        m0, dm0 = float(pair.mu0(t)), float(pair.dmu0(t))
        a, c, d, f, g, fd = fdg(t)
        delta0 = lam * y[1] / m0
        beta0 = lam / m0
        return [
            c - 2.0 * d,
            (fd * m0 + g * dm0 / (2.0 * a)) / lam,
            -(g - 2.0 * a * delta0) * beta0,
            -g * delta0 + a * delta0 * delta0,
        ]

    proto = KernelSet(coeffs, pair, flavor, ts, t_end, phase1.sol, None, ode)
    y_switch = proto._phase1_to_state(np.array([ts]), phase1.sol(np.array([ts])))[:, 0]
    if t_end > ts:
        phase2 = _solve(rhs2, (ts, t_end), list(y_switch), tol, "kernel continuation").sol
    else:  # pragma: no cover - only for windows shorter than the switch
        phase2 = lambda t: np.repeat(y_switch[:, None], np.size(t), axis=1)  # noqa: E731
    return KernelSet(coeffs, pair, flavor, ts, t_end, phase1.sol, phase2, ode)


def kernel_functions_burgers(
    a: Expr,
    b: Expr,
    f: Expr,
    pair: CharacteristicPair,
    tol: float = DEFAULT_TOL,
    *,
    guard: float = DEFAULT_GUARD,
) -> KernelSet:
    """Kernels for the Burgers flavour (lambda == 1, no d or g)."""
    return kernel_functions(burgers_coefficients(a, b, f), pair, tol, guard=guard, flavor="burgers")
