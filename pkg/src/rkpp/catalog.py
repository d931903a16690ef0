"""Registry of the named equation families shipped with the library.

Families live in ``data/catalog.json`` (override with the ``RKPP_CATALOG``
environment variable).  Each entry carries its coefficient expressions, a
parameter schema with defaults, the seed it is built from and the
construction route; :func:`instantiate_family` resolves parameters and
:meth:`ProblemInstance.construct` runs the route.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

import numpy as np

from .expr import CoefficientSet, Expr, ExprError, eval_expr, parse_expr
from .kernel import (
    kernel_functions,
    kernel_functions_burgers,
    solve_characteristic,
    solve_characteristic_burgers,
)
from .riccati import InitialData, combine_burgers, combine_ermakov, combine_riccati, solve_alternative
from .seeds import FISHER_BINDINGS, BurgersSeed, FisherId, FisherSeed
from .transform import GBE, GNLH, ConstructedSolution, build_gbe_solution, build_gnlh_solution
from .verify import GridSpec, ResidualReport, convergence_order, residual

__all__ = [
    "CatalogError",
    "UnknownFamilyError",
    "ParameterError",
    "FamilyEntry",
    "Window",
    "ProblemInstance",
    "load_catalog",
    "list_families",
    "get_family",
    "instantiate_family",
    "free_heat_instance",
    "ROUTES",
    "CATALOG_ENV",
]

CATALOG_ENV = "RKPP_CATALOG"
ROUTES = ("ermakov", "alternative", "burgers")
FUNCTION_NAMES = ("mu", "alpha", "beta", "gamma", "delta", "epsilon", "kappa")
_INIT_FIELDS = {
    "mu": "mu0_init",
    "alpha": "alpha0_init",
    "beta": "beta_init",
    "gamma": "gamma_init",
    "delta": "delta_init",
    "epsilon": "eps_init",
    "kappa": "kappa_init",
}
# room past t_max for the time stencil of the residual check
_T_MARGIN = 0.05


class CatalogError(ValueError):
    pass


class UnknownFamilyError(CatalogError, KeyError):
    def __str__(self):
        return self.args[0] if self.args else "unknown family"


class ParameterError(CatalogError):
    pass


@dataclass(frozen=True)
class Window:
    anchor: float
    t_min: float
    t_max: float
    x_min: float
    x_max: float

    def grid(self, nx: int = 21, nt: int = 21, h: float = 1e-3) -> GridSpec:
        return GridSpec(self.x_min, self.x_max, nx, self.t_min, self.t_max, nt, h, h)


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: Any
    domain: Mapping[str, Any] = field(default_factory=dict)

    def coerce(self, value) -> Any:
        d = self.domain
        if "choices" in d:
            v = str(value).strip()
            if v not in d["choices"]:
                raise ParameterError(f"{self.name}={v!r} not in {list(d['choices'])}")
            return v
        if self.name == "seed_params":
            try:
                vals = tuple(float(s) for s in str(value).replace(";", ",").split(",") if s.strip())
            except ValueError as exc:
                raise ParameterError(f"seed_params must be comma-separated numbers, got {value!r}") from exc
            return vals
        try:
            v = float(value)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"{self.name} must be a number, got {value!r}") from exc
        if not math.isfinite(v):
            raise ParameterError(f"{self.name} must be finite")
        if d.get("integer") and v != int(v):
            raise ParameterError(f"{self.name} must be an integer, got {v}")
        if "min" in d:
            lo = float(d["min"])
            if v < lo or (d.get("open_min") and v == lo):
                raise ParameterError(f"{self.name}={v} outside its domain (min {lo}{', exclusive' if d.get('open_min') else ''})")
        if "max" in d and v > float(d["max"]):
            raise ParameterError(f"{self.name}={v} above its maximum {d['max']}")
        if v in [float(e) for e in d.get("exclude", ())]:
            raise ParameterError(f"{self.name}={v} is excluded")
        return v


@dataclass(frozen=True)
class FamilyEntry:
    id: str
    kind: str
    route: str
    paper_row: str
    coefficients: Mapping[str, Any]
    params: tuple[ParamSpec, ...]
    seed: Mapping[str, Any]
    window: Window
    singular: bool = False
    notes: tuple[str, ...] = ()
    init: Mapping[str, str] = field(default_factory=dict)
    init_from_printed: bool = False
    printed_functions: Mapping[str, str] = field(default_factory=dict)
    printed_functions_as_displayed: Mapping[str, str] = field(default_factory=dict)
    printed: Mapping[str, str] = field(default_factory=dict)
    synthetic: bool = False

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FamilyEntry":
        try:
            entry = cls(
                id=d["id"],
                kind=d["kind"],
                route=d["route"],
                paper_row=d.get("paper_row", ""),
                coefficients=dict(d["coefficients"]),
                params=tuple(ParamSpec(p["name"], p["default"], dict(p.get("domain", {}))) for p in d.get("params", ())),
                seed=dict(d["seed"]),
                window=Window(**d["window"]),
                singular=bool(d.get("singular", False)),
                notes=tuple(d.get("notes", ())),
                init=dict(d.get("init", {})),
                init_from_printed=bool(d.get("init_from_printed", False)),
                printed_functions=dict(d.get("printed_functions", {})),
                printed_functions_as_displayed=dict(d.get("printed_functions_as_displayed", {})),
                printed=dict(d.get("printed", {})),
                synthetic=bool(d.get("synthetic", False)),
            )
        except (KeyError, TypeError) as exc:
            raise CatalogError(f"malformed catalog entry {d.get('id', '?')}: {exc}") from exc
        entry._validate()
        return entry

    def _validate(self):
        if self.kind not in (GNLH, GBE):
            raise CatalogError(f"{self.id}: unknown kind {self.kind}")
        if self.route not in ROUTES + ("riccati",):
            raise CatalogError(f"{self.id}: unknown route {self.route}")
        if (self.kind == GBE) != (self.route == "burgers"):
            raise CatalogError(f"{self.id}: GBE families use the burgers route and only they do")
        for p in self.params:
            p.coerce(p.default)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def defaults(self) -> dict[str, Any]:
        return {p.name: p.coerce(p.default) for p in self.params}

    def to_dict(self) -> dict[str, Any]:
        d = {
            "id": self.id,
            "kind": self.kind,
            "route": self.route,
            "singular": self.singular,
            "paper_row": self.paper_row,
            "coefficients": dict(self.coefficients),
            "params": [{"name": p.name, "default": p.default, "domain": dict(p.domain)} for p in self.params],
            "seed": dict(self.seed),
            "window": dict(vars(self.window)),
            "notes": list(self.notes),
        }
        # optional fields only when set, matching the on-disk layout
        for key in ("init", "printed_functions", "printed_functions_as_displayed", "printed"):
            if getattr(self, key):
                d[key] = dict(getattr(self, key))
        if self.init_from_printed:
            d["init_from_printed"] = True
        if self.synthetic:
            d["synthetic"] = True
        return d


_FREE_HEAT = {
    "id": "FREE",
    "kind": GNLH,
    "route": "riccati",
    "paper_row": "synthetic: free heat equation",
    "synthetic": True,
    "coefficients": {"a": "1", "b": "0", "c": "0", "d": "0", "f": "0", "g": "0", "c0": 0},
    "params": [
        {"name": "alpha0", "default": -1.0, "domain": {}},
        {"name": "mu0", "default": 1.0, "domain": {"min": 0.0, "open_min": True}},
        {"name": "k1", "default": 1.0, "domain": {}},
        {"name": "k2", "default": 1.0, "domain": {}},
    ],
    "seed": {"id": "U1", "k1": "k1", "k2": "k2"},
    "init": {"mu0_init": "mu0", "alpha0_init": "alpha0"},
    "window": {"anchor": 0.0, "t_min": 0.1, "t_max": 10.0, "x_min": -2.0, "x_max": 2.0},
    "notes": ["u_t = u_xx; gamma0 = -1/(4t), so a positive alpha(0) blows up at T* = 1/(4 alpha(0))."],
}


def _catalog_path() -> str | None:
    return os.environ.get(CATALOG_ENV) or None


@lru_cache(maxsize=8)
def _load(path: str | None) -> tuple[FamilyEntry, ...]:
    if path is None:
        text = resources.files("rkpp").joinpath("data/catalog.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    raw = doc["families"] if isinstance(doc, dict) else doc
    entries = [FamilyEntry.from_dict(d) for d in raw]
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise CatalogError("duplicate family ids in catalog")
    return tuple(sorted(entries, key=lambda e: e.id))


def load_catalog(path: str | None = None) -> tuple[FamilyEntry, ...]:
    """All entries of the catalog at ``path`` (default: env override, then the bundled file)."""
    return _load(path if path is not None else _catalog_path())


def list_families(
    kind: str | None = None, route: str | None = None, singular: bool | None = None, *, path: str | None = None
) -> list[FamilyEntry]:
    if kind is not None and kind.upper() not in (GNLH, GBE):
        raise CatalogError(f"unknown kind {kind!r}")
    if route is not None and route not in ROUTES:
        raise CatalogError(f"unknown route {route!r}")
    out = []
    for e in load_catalog(path):
        if kind is not None and e.kind != kind.upper():
            continue
        if route is not None and e.route != route:
            continue
        if singular is not None and e.singular != singular:
            continue
        out.append(e)
    return out


def get_family(family_id: str, *, path: str | None = None) -> FamilyEntry:
    if family_id == _FREE_HEAT["id"]:
        return FamilyEntry.from_dict(_FREE_HEAT)
    for e in load_catalog(path):
        if e.id == family_id:
            return e
    raise UnknownFamilyError(f"unknown family id {family_id!r}")


@dataclass(frozen=True)
class ProblemInstance:
    entry: FamilyEntry
    values: Mapping[str, Any]
    coeffs: CoefficientSet
    init: InitialData
    seed: FisherSeed | BurgersSeed
    window: Window
    printed: bool = False
    route_coeffs: CoefficientSet | None = None

    @property
    def t0(self) -> float:
        return self.window.anchor

    def printed_function(self, name: str, *, as_displayed: bool = False) -> Expr:
        src = self.entry.printed_functions_as_displayed if as_displayed else {}
        text = src.get(name) or self.entry.printed_functions.get(name)
        if text is None:
            raise KeyError(f"{self.entry.id} has no printed {name}")
        return parse_expr(text, _numeric(self.values))

    @property
    def operator(self):
        """What the residual check compares against: coefficients or (a, b, f)."""
        if self.entry.kind == GNLH:
            return self.coeffs
        return (self.coeffs.a, self.coeffs.b, self.coeffs.f)

    def construct(self, tol: float = 1e-12, *, t_max: float | None = None) -> ConstructedSolution:
        """Run the entry's route; ``t_max`` extends the horizon beyond the catalog window."""
        hi = self.window.t_max if t_max is None else max(float(t_max), self.window.t_max)
        t_span = (self.t0, hi + _T_MARGIN)
        route = self.entry.route
        # parameter functions always come from the corrected coefficients; a
        # printed instance only swaps the operator they are checked against
        c = self.route_coeffs or self.coeffs
        if route == "burgers":
            pair = solve_characteristic_burgers(c.a, c.b, t_span, tol)
            kern = kernel_functions_burgers(c.a, c.b, c.f, pair, tol)
            return build_gbe_solution(combine_burgers(kern, self.init), self.seed, L=-1.0)
        if route == "alternative":
            params = solve_alternative(c, self.init, t_span, tol)
        else:
            pair = solve_characteristic(c, t_span, tol)
            kern = kernel_functions(c, pair, tol)
            params = combine_ermakov(kern, self.init) if c.c0 == 1 else combine_riccati(kern, self.init)
        return build_gnlh_solution(params, self.seed, self.coeffs)

    def kernels(self, t_max: float | None = None, tol: float = 1e-12):
        """Kernel set of a diffusion-route family (the c0 = 0 Riccati path)."""
        if self.entry.route not in ("ermakov", "riccati") or self.coeffs.c0 != 0:
            raise ParameterError(f"{self.entry.id} does not go through the c0 = 0 Riccati path")
        hi = self.window.t_max if t_max is None else float(t_max)
        pair = solve_characteristic(self.coeffs, (self.t0, hi + _T_MARGIN), tol)
        return kernel_functions(self.coeffs, pair, tol)

    def default_grid(self, nx: int = 21, nt: int = 21, h: float = 1e-3) -> GridSpec:
        return self.window.grid(nx, nt, h)

    def verify(
        self, grid: GridSpec | None = None, *, solution: ConstructedSolution | None = None, order: bool = True, **kw
    ) -> ResidualReport:
        """Residual report on ``grid`` (default window grid), with the observed order attached."""
        grid = grid or self.default_grid()
        sol = solution or self.construct(t_max=grid.t_max)
        rep = residual(sol, self.operator, grid, **kw)
        if not order:
            return rep
        p, _ = convergence_order(sol, self.operator, grid, **kw)
        from dataclasses import replace

        return replace(rep, convergence_order=p)


def _numeric(values: Mapping[str, Any]) -> dict[str, float]:
    return {k: float(v) for k, v in values.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}


def _scalar(text, params, t) -> float:
    try:
        return float(eval_expr(parse_expr(str(text), params), t))
    except ExprError as exc:
        raise ParameterError(f"cannot evaluate {text!r} at t={t}: {exc}") from exc


def _pick_seed_for_binding(entry: FamilyEntry, values: dict, r0, h0, p):
    choices = next((s.domain["choices"] for s in entry.params if s.name == "seed"), None)
    current = values.get("seed", entry.seed["id"])
    want = tuple(float(v) if v is not None else None for v in (r0, h0, p))

    def fits(sid):
        return all(w is None or w == b for w, b in zip(want, FISHER_BINDINGS[FisherId(sid)]))

    if fits(current):
        return current
    if choices is None:
        raise ParameterError(f"{entry.id} is bound to seed {current}, which solves (r0, h0, p) = "
                             f"{FISHER_BINDINGS[FisherId(current)]}")
    matches = [s for s in choices if fits(s)]
    if not matches:
        raise ParameterError(f"no seed solves (r0, h0, p) = {want}")
    return matches[0]


def instantiate_family(
    family_id: str | FamilyEntry, params: Mapping[str, Any] | None = None, *, printed: bool = False
) -> ProblemInstance:
    """Resolve parameters (defaults, then ``params``) into a ready-to-construct instance.

    ``r0``, ``h0`` and ``p`` may be given for families with a seed choice; the
    first seed whose binding matches is selected.  ``printed=True`` makes the
    instance check the corrected construction against the entry's as-printed
    coefficients (flagged misprints); such instances are expected to fail.
    """
    entry = family_id if isinstance(family_id, FamilyEntry) else get_family(family_id)
    params = dict(params or {})
    binding = {k: params.pop(k) for k in ("r0", "h0", "p") if k in params}
    specs = {s.name: s for s in entry.params}
    unknown = sorted(set(params) - set(specs))
    if unknown:
        raise ParameterError(f"{entry.id} has no parameter(s) {', '.join(unknown)}; known: {', '.join(specs)}")
    values = entry.defaults()
    for k, v in params.items():
        values[k] = specs[k].coerce(v)
    if binding and entry.kind == GNLH:
        sid = _pick_seed_for_binding(entry, values, *(binding.get(k) for k in ("r0", "h0", "p")))
        if "seed" in specs:
            values["seed"] = sid
    elif binding:
        raise ParameterError(f"{entry.id} is a Burgers family; r0/h0/p do not apply")

    num = _numeric(values)
    t0 = entry.window.anchor
    if printed and not entry.printed:
        raise ParameterError(f"{entry.id} has no printed variant")

    seed_ref = entry.seed
    sid = values.get(seed_ref["id"], seed_ref["id"]) if seed_ref["id"] in specs else seed_ref["id"]
    if entry.kind == GNLH:
        k1 = _scalar(seed_ref.get("k1", "1"), num, t0)
        k2 = _scalar(seed_ref.get("k2", "1"), num, t0)
        seed = FisherSeed(FisherId(sid), k1, k2)
        r0, h0, p = seed.binding
    else:
        sp = values.get(seed_ref.get("params", ""), ())
        try:
            seed = BurgersSeed(sid, tuple(sp))
        except ValueError as exc:
            raise ParameterError(f"seed {sid}: {exc}") from exc
        r0, h0, p = 0.0, 1.0, 1.0

    def build(src):
        try:
            return CoefficientSet.from_strings(
                num, **{k: str(src[k]) for k in "abcdfg"}, c0=int(src.get("c0", 0)), r0=r0, h0=h0, p=p
            )
        except ExprError as exc:
            raise CatalogError(f"{entry.id}: bad coefficient expression: {exc}") from exc

    coeffs = build(entry.coefficients)

    env = dict(num, t0=t0)
    init_kw: dict[str, float] = {}
    if entry.init_from_printed:
        for name, text in entry.printed_functions.items():
            init_kw[_INIT_FIELDS[name]] = _scalar(text, num, t0)
    for fname, text in entry.init.items():
        if isinstance(text, str) and text.startswith("printed:"):
            init_kw[fname] = _scalar(entry.printed_functions[text.split(":", 1)[1]], num, t0)
        else:
            init_kw[fname] = _scalar(text, env, t0)
    if entry.route == "alternative":
        init_kw["delta_init"] = 0.5 * float(eval_expr(coeffs.g, t0))
    try:
        init = InitialData(**init_kw)
    except ValueError as exc:
        raise ParameterError(f"{entry.id}: {exc}") from exc
    if printed:
        return ProblemInstance(entry, values, build({**entry.coefficients, **entry.printed}), init, seed,
                               entry.window, True, route_coeffs=coeffs)
    return ProblemInstance(entry, values, coeffs, init, seed, entry.window)


def free_heat_instance(alpha0: float = -1.0, mu0: float = 1.0) -> ProblemInstance:
    """Synthetic ``u_t = u_xx`` family used for singularity checks (not listed)."""
    return instantiate_family("FREE", {"alpha0": alpha0, "mu0": mu0})


def sample_printed(instance: ProblemInstance, t) -> dict[str, np.ndarray]:
    """Printed parametric functions of an entry evaluated at ``t``."""
    t = np.asarray(t, dtype=float)
    return {n: np.asarray(eval_expr(instance.printed_function(n), t)) * np.ones_like(t)
            for n in FUNCTION_NAMES if n in instance.entry.printed_functions}
