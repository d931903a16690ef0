"""Finite-difference residual checks for constructed solutions and seeds."""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from .expr import CoefficientSet, Const, Expr, ExprError, eval_expr, parse_expr
from .seeds import BurgersSeed, FisherSeed, eval_burgers_seed, eval_fisher_seed
from .transform import BURGERS_SYMMETRY, GBE, GNLH, ConstructedSolution

__all__ = [
    "GridSpec",
    "ResidualReport",
    "GridError",
    "NoCandidateFitsError",
    "residual_gnlh",
    "residual_gbe",
    "residual_seed",
    "residual",
    "convergence_order",
    "viscosity_audit",
    "ABS_NONLINEARITY",
    "POWER_NONLINEARITY",
]

ABS_NONLINEARITY = "abs"
POWER_NONLINEARITY = "power"
ROUNDOFF_FLOOR = 1e-11


class GridError(ValueError):
    pass


class NoCandidateFitsError(ValueError):
    pass


_GRID_RE = re.compile(
    r"^\s*([^:\s]+):([^:\s]+):(\d+)\s*[xX]\s*([^:\s]+):([^:\s]+):(\d+)\s*$"
)


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    nx: int
    t_min: float
    t_max: float
    nt: int
    h_x: float = 1e-3
    h_t: float = 1e-3

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.t_max > self.t_min):
            raise GridError("grid ranges must be increasing")
        if self.nx < 8 or self.nt < 8:
            raise GridError("need at least 8 points per axis")
        if self.nx * self.nt > 10**7:
            raise GridError("grid too large (more than 1e7 points)")
        if not (self.h_x > 0 and self.h_t > 0):
            raise GridError("stencil steps must be positive")

    @classmethod
    def parse(cls, text: str, h_x: float = 1e-3, h_t: float | None = None) -> "GridSpec":
        """Parse ``"xmin:xmax:nx x tmin:tmax:nt"``; bounds may be expressions such as ``pi/2``."""
        m = _GRID_RE.match(text)
        if not m:
            raise GridError(f"cannot parse grid {text!r}; expected 'xmin:xmax:nx x tmin:tmax:nt'")
        try:
            vals = [float(eval_expr(parse_expr(g), 0.0)) for g in (m[1], m[2], m[4], m[5])]
        except ExprError as exc:
            raise GridError(f"bad grid bound in {text!r}: {exc}") from None
        return cls(vals[0], vals[1], int(m[3]), vals[2], vals[3], int(m[6]), h_x, h_x if h_t is None else h_t)

    def with_steps(self, h_x: float, h_t: float) -> "GridSpec":
        from dataclasses import replace

        return replace(self, h_x=h_x, h_t=h_t)

    def axes(self):
        return np.linspace(self.x_min, self.x_max, self.nx), np.linspace(self.t_min, self.t_max, self.nt)

    def interior(self):
        x, t = self.axes()
        return x[1:-1], t[1:-1]

    def to_text(self) -> str:
        return f"{self.x_min!r}:{self.x_max!r}:{self.nx} x {self.t_min!r}:{self.t_max!r}:{self.nt}"


@dataclass(frozen=True)
class ResidualReport:
    grid: GridSpec
    operator: str
    max_residual: float
    max_relative: float
    l2_residual: float
    worst_point: tuple[float, float]
    max_abs_u: float
    convergence_order: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def passes(self, tol: float = 1e-3) -> bool:
        """Pointwise relative test: ``|R| <= tol (1 + |u| + |u_x| + |u_xx|)`` everywhere."""
        return self.max_relative <= tol

    def passes_absolute(self, tol: float = 1e-4) -> bool:
        return self.max_residual <= tol * (1.0 + self.max_abs_u)

    def to_dict(self) -> dict:
        d = asdict(self)
        g = d.pop("grid")
        d["grid"] = {
            "x": [g["x_min"], g["x_max"], g["nx"]],
            "t": [g["t_min"], g["t_max"], g["nt"]],
            "h_x": g["h_x"],
            "h_t": g["h_t"],
        }
        d["worst_point"] = list(self.worst_point)
        d["notes"] = list(self.notes)
        return d


def _stencil(fn, grid: GridSpec):
    """u and its central differences on the interior grid."""
    x, t = grid.interior()
    X, T = np.meshgrid(x, t, indexing="xy")
    hx, ht = grid.h_x, grid.h_t
    u = np.asarray(fn(X, T), float)
    uxp, uxm = np.asarray(fn(X + hx, T), float), np.asarray(fn(X - hx, T), float)
    utp, utm = np.asarray(fn(X, T + ht), float), np.asarray(fn(X, T - ht), float)
    ux = (uxp - uxm) / (2 * hx)
    uxx = (uxp - 2 * u + uxm) / (hx * hx)
    ut = (utp - utm) / (2 * ht)
    return X, T, u, ux, uxx, ut


def _report(grid, operator, X, T, u, ux, uxx, R, notes=()) -> ResidualReport:
    absr = np.abs(R)
    if not np.all(np.isfinite(absr)):
        raise GridError("non-finite residual; the grid touches a singular region")
    rel = absr / (1.0 + np.abs(u) + np.abs(ux) + np.abs(uxx))
    i = np.unravel_index(int(np.argmax(absr)), absr.shape)
    return ResidualReport(
        grid=grid,
        operator=operator,
        max_residual=float(absr.max()),
        max_relative=float(rel.max()),
        l2_residual=float(math.sqrt(np.mean(absr**2))),
        worst_point=(float(X[i]), float(T[i])),
        max_abs_u=float(np.abs(u).max()),
        notes=tuple(notes),
    )


def _coef(e: Expr, T):
    return np.asarray(eval_expr(e, T.ravel())).reshape(-1) * np.ones(T.size)


def _check_window(sol: ConstructedSolution, grid: GridSpec):
    lo, hi = sol.valid_t
    x, t = grid.interior()
    if t[0] - grid.h_t <= lo or t[-1] + grid.h_t > hi:
        raise GridError(f"grid interior with stencil must lie inside the validity window ({lo}, {hi}]")


def residual_gnlh(
    sol: ConstructedSolution,
    coeffs: CoefficientSet,
    grid: GridSpec,
    *,
    nonlinearity: str = ABS_NONLINEARITY,
    corrupt: str | None = None,
) -> ResidualReport:
    """Residual of ``u_t - a u_xx + (g - c x) u_x - (d + L + M x - B x^2 + h N(u)) u``.

    ``N(u) = |u|^p`` by default, ``u^p`` with ``nonlinearity="power"``.
    ``corrupt="flip_nonlinearity"`` negates h as a negative control.
    """
    if sol.kind != GNLH or sol.induced is None:
        raise ValueError("residual_gnlh needs a reaction-diffusion solution built with coefficients")
    _check_window(sol, grid)
    X, T, u, ux, uxx, ut = _stencil(sol, grid)
    ind = sol.induced
    shape = T.shape
    tt = T.ravel()
    a, c, d, g = (_coef(getattr(coeffs, n), T).reshape(shape) for n in "acdg")
    uniq, inv = np.unique(tt, return_inverse=True)
    B = np.asarray(ind.B(uniq))[inv].reshape(shape)
    M = np.asarray(ind.M(uniq))[inv].reshape(shape)
    L = np.asarray(ind.L(uniq))[inv].reshape(shape)
    h = np.asarray(ind.h(X, T))
    if corrupt == "flip_nonlinearity":
        h = -h
    elif corrupt is not None:
        raise ValueError(f"unknown corruption {corrupt!r}")
    p = ind.p
    if nonlinearity == ABS_NONLINEARITY:
        N = np.abs(u) ** p
    elif nonlinearity == POWER_NONLINEARITY:
        N = u**p
    else:
        raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
    R = ut - a * uxx + (g - c * X) * ux - (d + L + M * X - B * X**2 + h * N) * u
    notes = (f"nonlinearity={nonlinearity}",) + ((f"corrupt={corrupt}",) if corrupt else ())
    return _report(grid, GNLH, X, T, u, ux, uxx, R, notes)


def _as_expr(e) -> Expr:
    if isinstance(e, Expr):
        return e
    if isinstance(e, str):
        return parse_expr(e)
    return Const(float(e))


def residual_gbe(
    sol: ConstructedSolution, a, b, f, grid: GridSpec, *, corrupt: str | None = None
) -> ResidualReport:
    """Residual of ``v_t + 4a (v v_x + L v_xx) + b x - f`` with the solution's L."""
    if sol.kind not in (GBE, BURGERS_SYMMETRY):
        raise ValueError("residual_gbe needs a Burgers-type solution")
    _check_window(sol, grid)
    X, T, v, vx, vxx, vt = _stencil(sol, grid)
    shape = T.shape
    a, b, f = (_coef(_as_expr(e), T).reshape(shape) for e in (a, b, f))
    L = sol.L
    if corrupt == "flip_advection":
        R = vt + 4 * a * (-v * vx + L * vxx) + b * X - f
    elif corrupt is None:
        R = vt + 4 * a * (v * vx + L * vxx) + b * X - f
    else:
        raise ValueError(f"unknown corruption {corrupt!r}")
    return _report(grid, sol.kind, X, T, v, vx, vxx, R, (f"corrupt={corrupt}",) if corrupt else ())


def residual_seed(
    seed: FisherSeed | BurgersSeed,
    grid: GridSpec,
    *,
    nu: float | None = None,
    r0: float | None = None,
    h0: float | None = None,
    p: float | None = None,
) -> ResidualReport:
    """Residual of a seed against its own constant-coefficient equation.

    Fisher seeds: ``v_tau - v_xixi - v (r0 + h0 |v|^p)`` with the seed's binding
    unless overridden.  Burgers seeds: ``u_tau + u u_xi - nu u_xixi`` with the
    seed's raw printed formula and ``nu`` defaulting to the seed's.
    """
    if isinstance(seed, FisherSeed):
        b_r0, b_h0, b_p = seed.binding
        r0 = b_r0 if r0 is None else r0
        h0 = b_h0 if h0 is None else h0
        p = b_p if p is None else p
        X, T, u, ux, uxx, ut = _stencil(lambda x, t: eval_fisher_seed(seed, x, t), grid)
        R = ut - uxx - u * (r0 + h0 * np.abs(u) ** p)
        note = f"r0={r0},h0={h0},p={p}"
    else:
        nu = seed.nu if nu is None else nu
        X, T, u, ux, uxx, ut = _stencil(lambda x, t: eval_burgers_seed(seed, x, t), grid)
        R = ut + u * ux - nu * uxx
        note = f"nu={nu}"
    return _report(grid, "seed", X, T, u, ux, uxx, R, (note,))


def residual(sol: ConstructedSolution, operator, grid: GridSpec, **kw) -> ResidualReport:
    """Dispatch on the solution kind; ``operator`` is a CoefficientSet for GNLH, (a, b, f) otherwise."""
    if sol.kind == GNLH:
        return residual_gnlh(sol, operator, grid, **kw)
    if operator is None:
        operator = (0.25, 0.0, 0.0)
    a, b, f = operator
    return residual_gbe(sol, a, b, f, grid, **kw)


def convergence_order(sol, operator, grid: GridSpec, refinements: int = 2, **kw) -> tuple[float, list[float]]:
    """Observed order ``log2(R(h)/R(h/2))`` of the max residual under stencil halving.

    Returns the order from the last refinement pair and all residuals.  The
    order is ``nan`` (with residuals still returned) when the residual is at
    the roundoff floor.  ``sol`` may also be a seed, in which case
    ``operator`` is ignored.
    """
    if refinements < 2:
        raise ValueError("need at least 2 refinement levels")
    res = []
    for j in range(refinements):
        g = grid.with_steps(grid.h_x / 2**j, grid.h_t / 2**j)
        if isinstance(sol, (FisherSeed, BurgersSeed)):
            rep = residual_seed(sol, g, **kw)
        else:
            rep = residual(sol, operator, g, **kw)
        res.append(rep.max_residual)
    if res[-1] < ROUNDOFF_FLOOR * (1.0 + rep.max_abs_u) or res[-2] == 0.0:
        return float("nan"), res
    return math.log2(res[-2] / res[-1]), res


def viscosity_audit(seed: BurgersSeed, grid: GridSpec, *, threshold: float = 1e-3) -> float:
    """Pick nu in {1/2, 1} that best fits the seed's printed formula (ties go to 1)."""
    scores = {}
    for nu in (1.0, 0.5):
        rep = residual_seed(seed, grid, nu=nu)
        scores[nu] = rep.max_relative
    best = min(scores, key=lambda n: (scores[n], -n))
    if abs(scores[1.0] - scores[0.5]) <= 1e-12 + 1e-6 * max(scores.values()):
        best = 1.0
    if scores[best] > threshold:
        raise NoCandidateFitsError(f"no candidate fits: residuals {scores}")
    return best
