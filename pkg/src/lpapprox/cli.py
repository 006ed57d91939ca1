"""Command-line interface.

Exit codes: 0 success, 2 validation / parse / domain error, 3 capacity error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import CapacityError, LpApproxError, ParseError

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY = 0, 2, 3


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(args, text):
    if getattr(args, "out", None) and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)

    return json.dumps(obj, indent=2, default=default, allow_nan=True) + "\n"


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", position=exc.pos) from exc


# --- subcommands -------------------------------------------------------------------

def cmd_compile(args):
    from .compiler import PiecewiseConstantFn, compile_cubes
    from .network import to_json

    fn = PiecewiseConstantFn.from_json(_read(args.input))
    net = compile_cubes(fn)
    _emit(args, to_json(net) + "\n")


def cmd_approx_monotone(args):
    from .compiler import compile_cubes
    from .monotone import (DecompositionParams, build_approximant, corpus, decompose,
                           decomposition_error_bound, predicted_weight_budget)
    from .network import to_json

    funcs = corpus(args.d, seed=args.seed)
    if args.func not in funcs:
        from .errors import ValidationError
        raise ValidationError("function", f"unknown function {args.func!r}; choose from {sorted(funcs)}")
    f = funcs[args.func]
    params = DecompositionParams(args.N, args.p, args.d)
    dec = decompose(f, params)
    approx = build_approximant(dec, f)
    regime, c, bound = decomposition_error_bound(params)
    doc = {
        "func": args.func, "d": args.d, "p": args.p, "N": args.N,
        "K": params.K, "beta": params.beta, "l": params.l,
        "counts": dec.counts, "remaining": list(dec.remaining),
        "compiled_weight_count": dec.compiled_weight_count,
        "predicted_weight_budget": predicted_weight_budget(params),
        "cube_counts_ok": dec.cube_counts_ok(),
        "certified_error": dec.certified_error(),
        "bound_regime": regime, "bound_constant": c, "error_bound": bound,
        "oracle_calls": dec.oracle_calls,
    }
    if args.network_out:
        with open(args.network_out, "w", encoding="utf-8") as fh:
            fh.write(to_json(compile_cubes(approx)) + "\n")
    if args.cubes_out:
        with open(args.cubes_out, "w", encoding="utf-8") as fh:
            fh.write(approx.to_json() + "\n")
    _emit(args, _json(doc))


def cmd_packing(args):
    from .holder import build_packing

    fam = build_packing(args.s, args.d, args.p, args.N, sampled=args.sampled, seed=args.seed)
    doc = fam.to_dict()
    if not args.include_code:
        doc.pop("code")
    _emit(args, _json(doc))


def cmd_dims(args):
    from .dims import FiniteFunctionClass, fat_dim, packing_number, pseudo_dim, vc_dim

    cls = FiniteFunctionClass.from_json(_read(args.input))
    if args.kind == "vc":
        r = vc_dim(cls)
    elif args.kind == "pdim":
        r = pseudo_dim(cls)
    elif args.kind == "fat":
        r = fat_dim(cls, args.gamma)
    else:
        r = packing_number(cls, args.eps, args.p)
    _emit(args, _json({"kind": args.kind, "value": int(r), "exact": r.exact,
                       "witness": list(r.witness) if r.witness is not None else None}))


def _rate_kwargs(args):
    return dict(L=args.L, nu=args.nu, d=args.d, p=args.p, s=args.s, gamma=args.gamma, c=args.c,
                c1=args.c1, c2=args.c2, c3=args.c3)


def cmd_bounds(args):
    from . import bounds

    if args.action == "eval":
        r = bounds.rate_table(args.cls, args.W, **_rate_kwargs(args))
        doc = r.to_dict()
    elif args.action == "sweep":
        from .experiments import ExperimentConfig, run_bound_sweep

        params = {"classes": [args.cls], "d": args.d, "p": args.p, "s": args.s,
                  "nu": [args.nu] if args.nus is None else args.nus,
                  "L": [args.L] if args.Ls is None else args.Ls,
                  "W_min": args.W_min, "W_max": args.W_max, "n_W": args.n_W,
                  "c": args.c, "c1": args.c1, "c2": args.c2, "c3": args.c3}
        if args.gamma is not None:
            params["gamma"] = args.gamma
        cfg = ExperimentConfig("bound_sweep", args.seed, params)
        res = run_bound_sweep(cfg, write=False)
        if args.format == "json":
            _emit(args, _json({"rows": res.rows, "summary": res.summary}))
        else:
            _emit(args, res.csv)
        return
    elif args.action == "implicit":
        q = bounds.BoundQuery(args.p, args.a, args.b,
                              bounds.ParametricPacking(args.c0, args.eps0, args.alpha), args.P, args.c)
        doc = {"value": bounds.implicit_lower_bound(q), "cap": (args.b - args.a) / 3}
    elif args.action == "closed-form":
        doc = bounds.closed_form_lower_bound(args.P, args.alpha, args.c1, args.eps1).to_dict()
    elif args.action == "solve":
        eps = bounds.solve_inequation(args.c, args.alpha, args.r, args.P)
        doc = {"value": eps, "empty": eps is None}
    elif args.action == "pdim":
        doc = bounds.pdim_upper_bound(args.W, args.L, args.nu, args.c1, args.c2, args.c3).to_dict()
    else:  # mendelson
        doc = {"value": bounds.mendelson_rhs(args.eps, args.fat, args.b - args.a, args.c)}
    _emit(args, _json(doc))


def cmd_demo(args):
    from .experiments import ExperimentConfig, run_impossibility_demo

    cfg = ExperimentConfig("impossibility_demo", args.seed,
                           {"N": args.N, "grid": args.grid, "p": args.p, "d": args.d})
    res = run_impossibility_demo(cfg, write=False)
    if args.format == "json":
        _emit(args, _json({"rows": res.rows, "summary": res.summary}))
    else:
        _emit(args, res.csv)


def cmd_experiment(args):
    from .experiments import DEFAULTS, ExperimentConfig, default_config_text, run, run_all

    if args.print_config:
        if args.name and args.name != "all":
            sys.stdout.write(_json(ExperimentConfig(args.name, args.seed or 0).to_dict()))
        else:
            sys.stdout.write(default_config_text())
        return
    formats = tuple(args.format.split(",")) if args.format else ("csv", "svg")
    if args.config:
        doc = _load_json(_read(args.config))
        cfg = ExperimentConfig.from_dict(doc)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out:
            cfg.out = args.out
        if args.format:
            cfg.formats = formats
        results = {cfg.experiment: run(cfg)}
    elif args.name in (None, "all"):
        results = run_all(args.out or "results", args.seed or 0, formats)
    else:
        if args.name not in DEFAULTS:
            from .errors import ValidationError
            raise ValidationError("experiment", f"unknown experiment {args.name!r}")
        results = {args.name: run(ExperimentConfig(args.name, args.seed or 0, {},
                                                   args.out or "results", formats))}
    for name, res in results.items():
        for path in res.files:
            print(path)
        if res.summary:
            print(name + ": " + json.dumps(res.summary, default=str))


# --- parser ----------------------------------------------------------------------

def _int_list(text):
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer list like 2..6 or 1,2,3: {text!r}") from exc


def _add_rate_args(p):
    p.add_argument("--class", dest="cls", required=True,
                   choices=["holder", "monotone_lower", "monotone_upper", "barron"])
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--nu", type=int, default=0)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--c3", type=float, default=1.0)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output file (or directory for experiments)")

    ap = argparse.ArgumentParser(prog="lpapprox", description="L^p approximation bounds toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="compile piecewise-constant JSON to a network")
    p.add_argument("input", help="piecewise-constant function JSON ('-' for stdin)")
    p.set_defaults(handler=cmd_compile)

    p = sub.add_parser("approx-monotone", parents=[common], help="monotone cube decomposition")
    p.add_argument("--func", default="mean")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--network-out", default=None)
    p.add_argument("--cubes-out", default=None)
    p.set_defaults(handler=cmd_approx_monotone)

    p = sub.add_parser("packing", parents=[common], help="Hölder packing certificate")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--sampled", action="store_true")
    p.add_argument("--include-code", action="store_true")
    p.set_defaults(handler=cmd_packing)

    p = sub.add_parser("dims", parents=[common], help="dimensions of a finite class")
    p.add_argument("input", help="class JSON with a 'values' matrix")
    p.add_argument("--kind", choices=["vc", "pdim", "fat", "packing"], default="pdim")
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(handler=cmd_dims)

    p = sub.add_parser("bounds", help="evaluate and solve bound formulas")
    bsub = p.add_subparsers(dest="action", required=True)
    q = bsub.add_parser("eval", parents=[common])
    _add_rate_args(q)
    q.add_argument("--W", type=float, required=True)
    q = bsub.add_parser("sweep", parents=[common])
    _add_rate_args(q)
    q.add_argument("--nus", type=_int_list, default=None)
    q.add_argument("--Ls", type=_int_list, default=None)
    q.add_argument("--W-min", dest="W_min", type=float, default=16)
    q.add_argument("--W-max", dest="W_max", type=float, default=1e8)
    q.add_argument("--n-W", dest="n_W", type=int, default=8)
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    q = bsub.add_parser("implicit", parents=[common])
    for name, default in [("p", 1.0), ("a", 0.0), ("b", 1.0), ("c0", 1.0), ("eps0", 1.0),
                          ("alpha", 1.0), ("c", 1.0)]:
        q.add_argument(f"--{name}", type=float, default=default)
    q.add_argument("--P", type=int, required=True)
    q = bsub.add_parser("closed-form", parents=[common])
    q.add_argument("--P", type=int, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--c1", type=float, default=1.0)
    q.add_argument("--eps1", type=float, default=math.inf)
    q = bsub.add_parser("solve", parents=[common])
    q.add_argument("--c", type=float, default=1.0)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--r", type=float, default=1.0)
    q.add_argument("--P", type=int, required=True)
    q = bsub.add_parser("pdim", parents=[common])
    q.add_argument("--W", type=float, required=True)
    q.add_argument("--L", type=int, default=1)
    q.add_argument("--nu", type=int, default=0)
    for name in ("c1", "c2", "c3"):
        q.add_argument(f"--{name}", type=float, default=1.0)
    q = bsub.add_parser("mendelson", parents=[common])
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--fat", type=float, required=True)
    q.add_argument("--a", type=float, default=0.0)
    q.add_argument("--b", type=float, default=1.0)
    q.add_argument("--c", type=float, default=1.0)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("demo-impossibility", parents=[common], help="sup versus L^1 error of the disk indicator")
    p.add_argument("--N", type=_int_list, default=[2, 3, 4, 5, 6])
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(handler=cmd_demo)

    p = sub.add_parser("experiment", parents=[common], help="run configured experiments")
    p.add_argument("name", nargs="?", default=None,
                   help="monotone_scaling, impossibility_demo, packing_cert, bound_sweep or all")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--format", default=None, help="comma list of csv,json,svg")
    p.add_argument("--print-config", action="store_true")
    p.set_defaults(handler=cmd_experiment)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command != "experiment":
        args.seed = 0
    try:
        args.handler(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except LpApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
