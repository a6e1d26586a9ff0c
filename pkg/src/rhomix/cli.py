"""Command-line front end.

Exit codes: 0 success, 1 input/validation error, 2 algorithmic failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import ensembles as ens
from .errors import AlgorithmFailure
from .explore import (
    ExploreConfig,
    bloch_coordinates,
    records_csv,
    run_explore,
    simplex_corners,
)
from .majorization import majorization_margin, majorizes, sort_descending, uniform
from .serialize import (
    SchemaError,
    complex_matrix_to_json,
    density_to_json,
    dumps,
    load_json,
    outcome_to_json,
    parse_density,
    parse_ensemble,
    parse_real_matrix,
    parse_vector,
    write_csv,
)
from .stochmat import SearchOptions, as_bistochastic, certify_unistochastic, chain_links


def _finite(x):
    return float(x) if x is not None and math.isfinite(x) else None


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _require_json(args) -> None:
    if args.format == "csv":
        raise SchemaError(f"--format csv is not available for '{args.command}'")


def _eps(args) -> float:
    return args.tol if args.tol is not None else ens.DEGENERACY_EPS


def cmd_mix(args) -> int:
    _require_json(args)
    obj = load_json(args.input)
    if isinstance(obj, dict) and "ensemble" in obj:
        obj = obj["ensemble"]
    rho = ens.DensityMatrix(ens.mix(parse_ensemble(obj)))
    _emit(args, dumps(density_to_json(rho)))
    return 0


def cmd_construct(args) -> int:
    _require_json(args)
    rho = parse_density(load_json(args.rho))
    eps = _eps(args)
    if args.uniform is not None:
        if args.uniform < 1:
            raise SchemaError("--uniform N needs N >= 1")
        p = uniform(args.uniform)
    elif args.p is not None:
        p = parse_vector(load_json(args.p), "p")
    else:
        raise SchemaError("give either --p or --uniform N")

    if args.algorithm == "uniform":
        if np.max(np.abs(p - 1.0 / p.size)) > 1e-12:
            raise SchemaError("the uniform construction needs uniform weights")
        out = ens.uniform_ensemble(rho, p.size, eps)
    elif args.algorithm == "nielsen":
        out = ens.nielsen_ensemble(rho, p, eps)
    else:
        opts = ens.SweepOptions(eps=eps, search=SearchOptions(seed=args.seed or 0))
        out = ens.ratio_sweep(rho, p, opts)
    _emit(args, dumps(outcome_to_json(out, args.algorithm)))
    return 0


def _chain_links_json(report) -> dict:
    pair = None
    if report.violating_pair is not None:
        axis, (i, j) = report.violating_pair
        pair = {"axis": axis, "pair": [i, j]}
    return {
        "satisfied": report.satisfied,
        "worst_margin": report.worst_margin,
        "violating_pair": pair,
        "links": list(report.links) if report.links is not None else None,
    }


def cmd_check(args) -> int:
    _require_json(args)
    kind = args.kind
    if kind == "majorize":
        p = parse_vector(load_json(args.p), "p")
        q = parse_vector(load_json(args.q), "q")
        result = {
            "kind": kind,
            "majorized": majorizes(p, q),
            "margin": majorization_margin(p, q),
            "p_sorted": sort_descending(p)[0].tolist(),
            "q_sorted": sort_descending(q)[0].tolist(),
        }
    elif kind == "chain-links":
        b = as_bistochastic(parse_real_matrix(load_json(args.matrix), "B"))
        result = {"kind": kind, **_chain_links_json(chain_links(b))}
    elif kind == "unistochastic":
        b = as_bistochastic(parse_real_matrix(load_json(args.matrix), "B"))
        cert = certify_unistochastic(b, SearchOptions(seed=args.seed or 0))
        result = {
            "kind": kind,
            "verdict": cert.verdict,
            "residual": _finite(cert.residual),
            "witness": complex_matrix_to_json(cert.witness) if cert.witness is not None else None,
            "chain_links": _chain_links_json(cert.chain_links) if cert.chain_links else None,
        }
    else:
        p = parse_vector(load_json(args.p), "p")
        rho = parse_density(load_json(args.rho))
        result = {
            "kind": kind,
            "verdict": ens.conjecture2_admissible(p, rho),
            "rank": rho.rank,
            "lambda": rho.spectrum().tolist(),
            "p": p.tolist(),
        }
    _emit(args, dumps(result))
    return 0


def cmd_explore(args) -> int:
    obj = load_json(args.config)
    if args.seed is not None and isinstance(obj, dict):
        obj = {**obj, "master_seed": args.seed}
    if args.tol is not None and isinstance(obj, dict):
        obj = {**obj, "tolerances": {**obj.get("tolerances", {}), "degeneracy_eps": args.tol}}
    config = ExploreConfig.from_dict(obj)
    records, summary = run_explore(config)
    table = records_csv(records)
    if args.format == "csv":
        _emit(args, table)
        return 0
    if args.csv:
        Path(args.csv).write_text(table)
    _emit(args, dumps(summary))
    return 0


def cmd_figdata(args) -> int:
    if args.which == "bloch-ring":
        if args.ensemble is not None:
            states = parse_ensemble(load_json(args.ensemble)).states
        else:
            if args.rho is None or args.n is None:
                raise SchemaError("bloch-ring needs --rho and --n (or --ensemble)")
            rho = parse_density(load_json(args.rho))
            states = ens.uniform_ensemble(rho, args.n).ensemble.states
        if states.shape[1] != 2:
            raise SchemaError(f"bloch-ring needs qubit states, got dimension {states.shape[1]}")
        header = ["index", "x", "y", "z"]
        rows = [(i, *bloch_coordinates(s)) for i, s in enumerate(states)]
    else:
        if args.vector is None:
            raise SchemaError("simplex-polytope needs --vector")
        v = parse_vector(load_json(args.vector), "vector")
        if v.size != 3:
            raise SchemaError(f"simplex-polytope needs a length-3 vector, got {v.size}")
        header = ["index", "p1", "p2", "p3", "x", "y"]
        rows = [(i, *r) for i, r in enumerate(simplex_corners(v))]
    if args.format == "json":
        _emit(args, dumps([dict(zip(header, r)) for r in rows]))
    else:
        _emit(args, write_csv(header, rows))
    return 0


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommand copies must not clobber values given before the subcommand
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="random seed (u64)")
    parser.add_argument("--tol", type=float, default=default, help="degeneracy epsilon override")
    parser.add_argument("--output", default=default, help="write the result here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rhomix", description="Construct pure-state ensembles realizing a density matrix."
    )
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mix", parents=[common], help="density matrix of an ensemble")
    p.add_argument("input", help="ensemble JSON (file, '-' or inline)")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("construct", parents=[common], help="build an ensemble for given weights")
    p.add_argument("algorithm", choices=("uniform", "nielsen", "ratio-sweep"))
    p.add_argument("--rho", required=True, help="density-matrix JSON")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", help="weight vector JSON")
    g.add_argument("--uniform", type=int, metavar="N", help="N equal weights")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check", parents=[common], help="majorization / chain-links / unistochastic / admissibility")
    p.add_argument("kind", choices=("majorize", "chain-links", "unistochastic", "admissible"))
    p.add_argument("--p")
    p.add_argument("--q")
    p.add_argument("--rho")
    p.add_argument("--matrix")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("explore", parents=[common], help="seeded batch exploration")
    p.add_argument("config", help="explore config JSON")
    p.add_argument("--csv", help="write trial records CSV here")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("figdata", parents=[common], help="coordinates for figures")
    p.add_argument("which", choices=("bloch-ring", "simplex-polytope"))
    p.add_argument("--rho")
    p.add_argument("--n", type=int)
    p.add_argument("--ensemble")
    p.add_argument("--vector")
    p.set_defaults(func=cmd_figdata)
    return parser


_REQUIRED = {
    "majorize": ("p", "q"),
    "chain-links": ("matrix",),
    "unistochastic": ("matrix",),
    "admissible": ("p", "rho"),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    if args.format is None:
        args.format = "csv" if args.command == "figdata" else "json"
    if args.command == "check":
        missing = [f"--{k}" for k in _REQUIRED[args.kind] if getattr(args, k) is None]
        if missing:
            print(f"error: check {args.kind} needs {' '.join(missing)}", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except AlgorithmFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
