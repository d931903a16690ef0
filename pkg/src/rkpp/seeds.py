"""Closed-form seed solutions of the constant-coefficient model equations.

Fisher-type seeds solve ``v_tau = v_xixi + v (r0 + h0 v^p)``; Burgers seeds
solve ``u_tau + u u_xi - nu u_xixi = 0`` for the viscosity ``nu`` attached to
each seed.  All evaluators accept numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .specfun import SQRT2_OVER_2, erfc, heat_polynomial, jacobi_sd

__all__ = [
    "SeedPoleError",
    "SeedDomainError",
    "FisherId",
    "BurgersId",
    "FisherSeed",
    "BurgersSeed",
    "FISHER_BINDINGS",
    "BURGERS_VISCOSITY",
    "eval_fisher_seed",
    "eval_burgers_seed",
    "POLE_GUARD",
]

POLE_GUARD = 1e-12
_S2 = math.sqrt(2.0)
_SD_MODULUS = SQRT2_OVER_2


class SeedPoleError(ArithmeticError):
    pass


class SeedDomainError(ValueError):
    pass


class FisherId(str, Enum):
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    U4 = "U4"
    U5 = "U5"
    U6 = "U6"


class BurgersId(str, Enum):
    SHOCK = "SHOCK"
    TRIANGULAR = "TRIANGULAR"
    NWAVE = "NWAVE"
    KAMPE = "KAMPE"


# (r0, h0, p) each seed actually satisfies, confirmed by residual checks
FISHER_BINDINGS: dict[FisherId, tuple[float, float, float]] = {
    FisherId.U1: (1.0, -1.0, 1.0),
    FisherId.U2: (0.0, -1.0, 2.0),
    FisherId.U3: (0.0, 1.0, 2.0),
    FisherId.U4: (-1.0, -1.0, 2.0),
    FisherId.U5: (-2.0, 1.0, 2.0),
    FisherId.U6: (2.0, 1.0, 2.0),
}

# viscosity each printed Burgers seed solves, from the viscosity audit
BURGERS_VISCOSITY: dict[BurgersId, float] = {
    BurgersId.SHOCK: 1.0,
    BurgersId.TRIANGULAR: 0.5,
    BurgersId.NWAVE: 1.0,
    BurgersId.KAMPE: 0.5,
}


@dataclass(frozen=True)
class FisherSeed:
    id: FisherId
    k1: float = 1.0
    k2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "id", FisherId(self.id))

    @property
    def binding(self) -> tuple[float, float, float]:
        return FISHER_BINDINGS[self.id]

    @property
    def r0(self) -> float:
        return self.binding[0]

    @property
    def h0(self) -> float:
        return self.binding[1]

    @property
    def p(self) -> float:
        return self.binding[2]

    def __call__(self, xi, tau):
        return eval_fisher_seed(self, xi, tau)


@dataclass(frozen=True)
class BurgersSeed:
    """``params`` are (c, A, c0) for SHOCK, (A,) for TRIANGULAR, (a,) for NWAVE, (a_0, .., a_k) for KAMPE.

    ``nu`` defaults to the audited viscosity of the printed formula.
    """

    id: BurgersId
    params: tuple[float, ...] = ()
    nu: float | None = None
    _defaults = {
        BurgersId.SHOCK: (0.0, 1.0, 0.0),
        BurgersId.TRIANGULAR: (1.0,),
        BurgersId.NWAVE: (1.0,),
        BurgersId.KAMPE: (1.0, 1.0),
    }

    def __post_init__(self):
        sid = BurgersId(self.id)
        object.__setattr__(self, "id", sid)
        params = tuple(float(v) for v in (self.params or self._defaults[sid]))
        expected = {BurgersId.SHOCK: 3, BurgersId.TRIANGULAR: 1, BurgersId.NWAVE: 1}.get(sid)
        if expected is not None and len(params) != expected:
            raise ValueError(f"{sid.value} takes {expected} parameter(s), got {len(params)}")
        if sid is BurgersId.KAMPE and len(params) < 1:
            raise ValueError("KAMPE needs at least a_0")
        if sid is BurgersId.NWAVE and params[0] <= 0:
            raise ValueError("NWAVE needs a > 0")
        object.__setattr__(self, "params", params)
        nu = BURGERS_VISCOSITY[sid] if self.nu is None else float(self.nu)
        if not nu > 0:
            raise ValueError("viscosity must be positive")
        object.__setattr__(self, "nu", nu)

    @property
    def L(self) -> float:
        """Coefficient in ``u_tau + L u_xixi + u u_xi = 0``."""
        return -self.nu

    def __call__(self, xi, tau):
        return eval_burgers_seed(self, xi, tau)

    def normalized(self, xi, tau, nu_target: float = 1.0):
        """Seed rescaled to solve the equation with viscosity ``nu_target``."""
        k = nu_target / self.nu
        return k * np.asarray(eval_burgers_seed(self, xi, k * np.asarray(tau, dtype=float)))


def _guarded_div(num, den, what):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if np.any(np.abs(den) < POLE_GUARD * (1.0 + np.abs(num))):
        raise SeedPoleError(f"{what}: evaluation point at a pole")
    return num / den


def _out(v, *args):
    v = np.asarray(v, dtype=float)
    return float(v) if all(np.ndim(a) == 0 for a in args) else v


def eval_fisher_seed(seed: FisherSeed, xi, tau):
    x = np.asarray(xi, dtype=float)
    t = np.asarray(tau, dtype=float)
    k1, k2 = seed.k1, seed.k2
    sid = seed.id
    if sid is FisherId.U1:
        v = 1.0 / (1.0 + (_S2 - 1.0) * np.exp(x / math.sqrt(6.0) - 5.0 * t / 6.0)) ** 2
    elif sid is FisherId.U2:
        v = _guarded_div(_S2 * (2.0 * x + k1), x * x + k1 * x + 6.0 * t + k2, "U2")
    elif sid is FisherId.U3:
        v = SQRT2_OVER_2 * (x + k1) * jacobi_sd(0.5 * x * x + k1 * x + 3.0 * t, _SD_MODULUS)
    elif sid is FisherId.U4:
        v = _guarded_div(k2 * np.sin(x / _S2), k1 * np.exp(1.5 * t) + k2 * np.cos(x / _S2), "U4")
    elif sid is FisherId.U5:
        amp = k1 * np.exp(-3.0 * t)
        v = SQRT2_OVER_2 * amp * np.sin(x + k2) * jacobi_sd(amp * np.cos(x + k2), _SD_MODULUS)
    elif sid is FisherId.U6:
        amp = k1 * np.exp(3.0 * t)
        v = SQRT2_OVER_2 * amp * np.sinh(x + k2) * jacobi_sd(amp * np.cosh(x + k2), _SD_MODULUS)
    else:  # pragma: no cover
        raise ValueError(sid)
    return _out(v, xi, tau)


def eval_burgers_seed(seed: BurgersSeed, xi, tau):
    x = np.asarray(xi, dtype=float)
    t = np.asarray(tau, dtype=float)
    sid = seed.id
    if sid in (BurgersId.TRIANGULAR, BurgersId.NWAVE) and np.any(t <= 0):
        raise SeedDomainError(f"{sid.value} is only defined for tau > 0")
    if sid is BurgersId.SHOCK:
        c, A, c0 = seed.params
        v = c - A * np.tanh(0.5 * A * (x - c * t + c0))
    elif sid is BurgersId.TRIANGULAR:
        (A,) = seed.params
        g = np.expm1(A)
        num = g * np.exp(-x * x / (2.0 * t))
        den = 1.0 + 0.5 * g * erfc(x / np.sqrt(2.0 * t))
        v = _guarded_div(num, den, "TRIANGULAR") / np.sqrt(2.0 * math.pi * t)
    elif sid is BurgersId.NWAVE:
        (a,) = seed.params
        w = np.sqrt(a / t) * np.exp(-x * x / (4.0 * t))
        v = (x / t) * _guarded_div(w, 1.0 + w, "NWAVE")
    elif sid is BurgersId.KAMPE:
        coeffs = seed.params
        half = 0.5 * t
        den = sum(am * heat_polynomial(m, x, half) for m, am in enumerate(coeffs))
        num = sum(m * am * heat_polynomial(m - 1, x, half) for m, am in enumerate(coeffs) if m >= 1)
        v = -_guarded_div(np.asarray(num) + 0.0 * x, np.asarray(den) + 0.0 * x, "KAMPE")
    else:  # pragma: no cover
        raise ValueError(sid)
    return _out(v, xi, tau)
