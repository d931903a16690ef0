"""Command-line front end: ``rkpp families|solve|verify|singularity|sweep``.

Grids are written ``xmin:xmax:nx x tmin:tmax:nt`` (a literal ``x`` between
the two axes, e.g. ``-5:5:200x0.01:10:200``).  Exit codes: 0 success,
1 verification failure or no root, 2 usage or instantiation error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from .catalog import CatalogError, instantiate_family, list_families
from .expr import ExprError
from .kernel import KernelError
from .riccati import NoSignChangeError, SingularTimeError, find_singularity
from .seeds import SeedDomainError, SeedPoleError
from .transform import GNLH
from .verify import GridError, GridSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# errors that mean "these inputs do not describe a computable instance"
_INPUT_ERRORS = (CatalogError, ExprError, GridError, KernelError, SingularTimeError, SeedPoleError,
                 SeedDomainError, ValueError)


class UsageError(Exception):
    pass


def _num(v: float) -> str:
    v = float(v)
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def dumps(obj: Any, indent: int | None = None, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + ",".join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ",".join(dumps(v) for v in seq) + "]"
        return "[" + ",".join(f"{pad}{dumps(v, indent, _level + 1)}" for v in seq) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _parse_sets(items: Sequence[str] | None) -> dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _parse_bracket(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(s) for s in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--bracket expects a:b, got {text!r}") from exc
    return lo, hi


def _instance(args, **extra):
    params = _parse_sets(getattr(args, "set", None))
    params.update(extra)
    return instantiate_family(args.family, params, printed=getattr(args, "printed", False))


def _grid(args, inst, h: float = 1e-3) -> GridSpec:
    if args.grid:
        return GridSpec.parse(args.grid, h_x=h)
    return inst.default_grid(h=h)


def _out(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_list(args) -> int:
    singular = True if args.singular else (False if args.regular else None)
    entries = list_families(kind=args.kind, route=args.route, singular=singular)
    if args.json:
        print(dumps([e.to_dict() for e in entries], indent=1))
        return EXIT_OK
    for e in entries:
        flag = " singular" if e.singular else ""
        print(f"{e.id:8s} {e.kind:5s} {e.route:12s}{flag:9s} {e.paper_row}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _instance(args)
    grid = _grid(args, inst)
    sol = inst.construct(t_max=grid.t_max)
    x, t = grid.axes()
    X, T = np.meshgrid(x, t, indexing="xy")
    U = np.asarray(sol(X, T), float)
    if args.json:
        doc = {
            "family": inst.entry.id,
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in inst.values.items()},
            "grid": {"x": [grid.x_min, grid.x_max, grid.nx], "t": [grid.t_min, grid.t_max, grid.nt]},
            "x": x,
            "t": t,
            "values": [list(row) for row in U],
        }
        _out(args, dumps(doc) + "\n")
        return EXIT_OK
    buf = io.StringIO()
    buf.write("x,t,u\n")
    for i in range(grid.nt):
        for j in range(grid.nx):
            buf.write(f"{_num(X[i, j])},{_num(T[i, j])},{_num(U[i, j])}\n")
    _out(args, buf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _instance(args)
    grid = _grid(args, inst, h=args.h)
    kw = {}
    if args.corrupt:
        kw["corrupt"] = "flip_nonlinearity" if inst.entry.kind == GNLH else "flip_advection"
    rep = inst.verify(grid, order=not args.no_order, **kw)
    ok = rep.passes(args.tol)
    doc = {"family": inst.entry.id, "printed": inst.printed, "tol": args.tol, "pass": ok, **rep.to_dict()}
    print(dumps(doc, indent=1))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_singularity(args) -> int:
    extra = {}
    if args.alpha0 is not None and args.family == "FREE":
        extra["alpha0"] = args.alpha0
    inst = _instance(args, **extra)
    alpha0 = inst.init.alpha0_init if args.alpha0 is None else float(args.alpha0)
    if args.bracket:
        lo, hi = _parse_bracket(args.bracket)
    else:
        lo, hi = inst.t0 + 1e-9, inst.window.t_max
    kern = inst.kernels(t_max=hi)
    hi = min(hi, kern.t_end)
    try:
        t_star = find_singularity(kern, alpha0, (lo, hi))
    except NoSignChangeError as exc:
        print(dumps({"family": inst.entry.id, "alpha0": alpha0, "error": f"no sign change: {exc}"}, indent=1))
        return EXIT_FAIL
    check = float(kern.gamma0(t_star)) + alpha0
    mu = -2.0 * inst.init.mu0_init * float(kern.pair.mu0(t_star)) * check
    print(dumps({"family": inst.entry.id, "alpha0": alpha0, "bracket": [lo, hi], "t_star": t_star,
                 "gamma0_plus_alpha0": check, "mu_at_t_star": mu}, indent=1))
    return EXIT_OK


def _sweep_values(text: str) -> list[str]:
    if ":" in text:
        a, b, n = text.split(":")
        return [repr(float(v)) for v in np.linspace(float(a), float(b), int(n))]
    return [v.strip() for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    rows = ["param,value,status,max_abs_u,argmax_x,argmax_t,residual_max,max_relative,t_star"]
    base = _parse_sets(args.set)
    for value in _sweep_values(args.values):
        params = dict(base, **{args.param: value})
        inst = instantiate_family(args.family, params)
        grid = _grid(args, inst)
        status, umax, ax, at, rmax, rrel, tstar = "ok", math.nan, math.nan, math.nan, math.nan, math.nan, math.nan
        try:
            kern = inst.kernels(t_max=grid.t_max)
        except CatalogError:
            kern = None
        if kern is not None:
            try:
                tstar = find_singularity(kern, inst.init.alpha0_init, (inst.t0 + 1e-9, min(grid.t_max, kern.t_end)))
            except NoSignChangeError:
                pass
        if math.isfinite(tstar) and tstar <= grid.t_max:
            # summarize on the part of the grid before the blow-up
            t_hi = inst.t0 + 0.9 * (tstar - inst.t0)
            if t_hi > grid.t_min:
                from dataclasses import replace

                grid = replace(grid, t_max=t_hi)
                status = "truncated"
        try:
            sol = inst.construct(t_max=grid.t_max)
            x, t = grid.axes()
            X, T = np.meshgrid(x, t, indexing="xy")
            U = np.abs(np.asarray(sol(X, T), float))
            k = np.unravel_index(int(np.argmax(U)), U.shape)
            umax, ax, at = float(U[k]), float(X[k]), float(T[k])
            rep = inst.verify(grid, solution=sol, order=False)
            rmax, rrel = rep.max_residual, rep.max_relative
        except (SingularTimeError, GridError) as exc:
            status = "singular" if isinstance(exc, SingularTimeError) else "outside-window"
        rows.append(",".join([args.param, value, status] + [_num(v) if math.isfinite(v) else "" for v in
                                                            (umax, ax, at, rmax, rrel, tstar)]))
    _out(args, "\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_instance_args(p: argparse.ArgumentParser, family_required: bool = True):
    p.add_argument("--family", required=family_required, default=None if family_required else "FREE",
                   help="catalog family id (see `families`)")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="override a family parameter (repeatable)")
    p.add_argument("--defaults", action="store_true", help="use the catalog defaults for everything not --set")
    p.add_argument("--grid", help="xmin:xmax:nx x tmin:tmax:nt (default: the family window, 21x21)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rkpp", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("families", help="list catalog families")
    p.add_argument("--kind", type=str.upper, choices=["GNLH", "GBE"])
    p.add_argument("--route", choices=["ermakov", "alternative", "burgers"])
    g = p.add_mutually_exclusive_group()
    g.add_argument("--singular", action="store_true", help="only singular-flagged families")
    g.add_argument("--regular", action="store_true", help="only families not flagged singular")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("solve", help="sample a constructed solution on a grid (CSV x,t,u or JSON)")
    _add_instance_args(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="finite-difference residual check; exit 0 iff it passes")
    _add_instance_args(p)
    p.add_argument("--tol", type=float, default=1e-3, help="pointwise relative tolerance (default 1e-3)")
    p.add_argument("--h", type=float, default=1e-3, help="finite-difference step (default 1e-3)")
    p.add_argument("--corrupt", action="store_true", help="negative control: flip the sign of the nonlinear term")
    p.add_argument("--printed", action="store_true", help="check against the as-printed coefficient variant")
    p.add_argument("--no-order", action="store_true", help="skip the convergence-order measurement")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("singularity", help="blow-up time T* where gamma0(T*) = -alpha(0)")
    _add_instance_args(p, family_required=False)
    p.add_argument("--alpha0", type=float, help="alpha(0); for FREE it sets the family parameter")
    p.add_argument("--bracket", help="a:b search interval (default: the family window)")
    p.set_defaults(func=cmd_singularity)

    p = sub.add_parser("sweep", help="summary statistics over one swept parameter (CSV)")
    _add_instance_args(p)
    p.add_argument("--param", required=True, help="parameter to sweep")
    p.add_argument("--values", required=True, help="comma list v1,v2,... or a:b:n")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return ap


_VALUE_FLAGS = ("--grid", "--bracket", "--values", "--set")


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-5:5:200x..." as an option; glue such values to their flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rkpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as exc:
        print(f"rkpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
