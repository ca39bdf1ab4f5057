"""Command-line front end.

    modsym field info FIELD [--n N] [--seed S --samples K]
    modsym reduce FIELD MATRIX [--C auto|INT] [--force] [--jobs J] [--out CERT]
    modsym verify FIELD CERT [--C INT]
    modsym enumerate-hnf --n N --C C [--list]

FIELD is a field file or the name of a shipped one (Q, Qi, Qsqrt2, Qsqrt5,
Qsqrtm5). Exit codes: 0 ok, 2 bad input, 3 bound below the spanning bound,
4 node budget exhausted, 5 verification failed, 6 no pivot found (only
reachable with --force).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .errors import (
    BoundTooSmall,
    CapExceeded,
    FieldError,
    FieldMismatch,
    ModsymError,
    NodeBudgetExceeded,
    NotFound,
    ParseError,
)
from .field_arith import load_field, parse_rational
from .minkowski import monte_carlo_volume, octahedron, octahedron_volume, spanning_bound
from .pivot_search import PivotConfig
from .reduction import ReduceConfig, enumerate_hnf_classes, integralize, reduce
from .verify import verify

EXIT_OK, EXIT_INPUT, EXIT_BOUND, EXIT_BUDGET, EXIT_VERIFY, EXIT_NOTFOUND = 0, 2, 3, 4, 5, 6

DEFAULTS = {"node_budget": 10**5, "precision": 128, "jobs": 1, "C": "auto", "force": False}
ENV = {"node_budget": "MODSYM_NODE_BUDGET", "precision": "MODSYM_PRECISION"}

log = logging.getLogger("modsym")


class InputError(Exception):
    pass


def resolve_settings(args: argparse.Namespace, environ=os.environ) -> dict:
    """flags > MODSYM_* environment > --config file > defaults."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        settings.update(cfg)
    for key, var in ENV.items():
        if var in environ:
            try:
                settings[key] = int(environ[var])
            except ValueError as exc:
                raise InputError(f"{var} must be an integer") from exc
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            settings[key] = val
    return settings


def _emit(payload: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print("\n".join(lines))


def read_matrix(path: str):
    """A JSON square matrix: rows of entries, each an int, "p/q" or a coordinate list."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("matrix")
    if not isinstance(data, list) or not data or any(not isinstance(r, list) or len(r) != len(data) for r in data):
        raise InputError("matrix must be a non-empty square list of rows")
    rows = []
    for row in data:
        ents = []
        for e in row:
            coords = e if isinstance(e, list) else [e]
            try:
                ents.append([parse_rational(c) for c in coords])
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise InputError(f"bad matrix entry {e!r}") from exc
        rows.append(ents)
    return rows


# --- commands ----------------------------------------------------------------------

def cmd_field_info(args) -> int:
    settings = resolve_settings(args)
    order = load_field(args.field)
    order.embed(order.one(), settings["precision"])
    rep = spanning_bound(order, args.n)
    payload = {
        "field": order.spec.name,
        "d": order.d,
        "r": order.r,
        "s": order.s,
        "disc": order.disc,
        "n": args.n,
        **rep.to_json(),
    }
    lines = [
        f"field        {order.spec.name}",
        f"degree       {order.d}  signature ({order.r}, {order.s})",
        f"disc         {order.disc}",
        f"M_K          {rep.mink_const} = {float(rep.mink_const):.12g}",
        f"ratio^n      {rep.ratio_power} = {float(rep.ratio_power):.12g}",
        f"bound (n={args.n}) {rep.c_min}",
    ]
    if args.seed is not None:
        octa = octahedron(order)
        est, err = monte_carlo_volume(octa, args.samples, args.seed)
        exact = octahedron_volume(octa)
        payload["volume"] = {"exact": str(exact), "estimate": est, "stderr": err,
                             "samples": args.samples, "seed": args.seed}
        lines.append(f"vol Q(p)     {float(exact):.6g} (Monte Carlo {est:.6g} +- {err:.2g})")
    _emit(payload, args.json, lines)
    return EXIT_OK


def cmd_reduce(args) -> int:
    settings = resolve_settings(args)
    order = load_field(args.field)
    rows = read_matrix(args.matrix)
    n = len(rows)
    if args.n is not None and args.n != n:
        raise InputError(f"--n {args.n} does not match the {n}x{n} matrix")
    if n < 2:
        raise InputError("n must be at least 2")
    if any(len(e) != order.d for row in rows for e in row):
        if order.d == 1 or any(len(e) != 1 for row in rows for e in row):
            raise InputError(f"entries must have {order.d} coordinates")
        rows = [[[e[0]] + [Fraction(0)] * (order.d - 1) for e in row] for row in rows]
    m = integralize(order, [[rows[i][j] for i in range(n)] for j in range(n)])

    C = settings["C"]
    if C != "auto":
        try:
            C = int(C)
        except ValueError as exc:
            raise InputError("--C must be 'auto' or an integer") from exc
    else:
        C = None
    config = ReduceConfig(
        node_budget=int(settings["node_budget"]),
        force=bool(settings["force"]),
        jobs=int(settings["jobs"]),
        pivot=replace(PivotConfig(), precision=int(settings["precision"]),
                      escalation=args.escalation, lll_delta=args.lll_delta),
    )
    chain, cert = reduce(order, m, C, config)
    text = json.dumps(cert.to_json(), sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    summary = {
        "C": cert.C,
        "forced": cert.forced,
        "leaves": len(chain),
        "max_leaf_norm": chain.max_norm(),
        "nodes": len(cert.nodes),
        "norm": m.norm,
    }
    if args.json:
        payload = dict(summary)
        if not args.out:
            payload["certificate"] = cert.to_json()
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(f"norm {m.norm}  C {cert.C}{'  (forced)' if cert.forced else ''}")
        print(f"nodes {len(cert.nodes)}  leaves {len(chain)}  max leaf norm {chain.max_norm()}")
        if args.out:
            print(f"certificate written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    order = load_field(args.field)
    res = verify(args.cert, order, args.C)
    lines = [f"{'OK' if res.ok else 'FAILED'}: {res.nodes} nodes, {res.leaves} leaves"]
    lines += [f"  {v}" for v in res.violations]
    _emit(res.to_json(), args.json, lines)
    return EXIT_OK if res.ok else EXIT_VERIFY


def cmd_enumerate(args) -> int:
    if args.n not in (2, 3):
        raise InputError("enumerate-hnf supports n = 2 or 3")
    reps = enumerate_hnf_classes(args.n, args.C, args.cap)
    payload = {"n": args.n, "C": args.C, "count": len(reps)}
    lines = [f"{len(reps)} classes with 1 <= det <= {args.C} (n = {args.n})"]
    if args.list:
        payload["representatives"] = reps
        lines += [str(r) for r in reps]
    _emit(payload, args.json, lines)
    return EXIT_OK


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modsym", description="Reduce modular symbols over number fields.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    field = sub.add_parser("field", help="field inspection")
    fsub = field.add_subparsers(dest="field_command", required=True)
    info = fsub.add_parser("info", help="degree, signature, discriminant and spanning bound")
    info.add_argument("field")
    info.add_argument("--n", type=int, default=2)
    info.add_argument("--precision", type=int)
    info.add_argument("--seed", type=int, help="also estimate vol Q(p) by Monte Carlo")
    info.add_argument("--samples", type=int, default=10**6)
    info.add_argument("--config")
    info.add_argument("--json", action="store_true")
    info.set_defaults(func=cmd_field_info)

    red = sub.add_parser("reduce", help="reduce a symbol to norm <= C and write a certificate")
    red.add_argument("field")
    red.add_argument("matrix")
    red.add_argument("--n", type=int)
    red.add_argument("--C")
    red.add_argument("--force", action="store_true")
    red.add_argument("--jobs", type=int)
    red.add_argument("--node-budget", dest="node_budget", type=int)
    red.add_argument("--precision", type=int)
    red.add_argument("--escalation", type=float, default=PivotConfig.escalation,
                     help="pivot search radius factor for the second ball")
    red.add_argument("--lll-delta", dest="lll_delta", type=float, default=PivotConfig.lll_delta)
    red.add_argument("--out")
    red.add_argument("--config")
    red.add_argument("--json", action="store_true")
    red.set_defaults(func=cmd_reduce)

    ver = sub.add_parser("verify", help="check a reduction certificate")
    ver.add_argument("field")
    ver.add_argument("cert")
    ver.add_argument("--C", type=int, help="require this bound")
    ver.add_argument("--json", action="store_true")
    ver.set_defaults(func=cmd_verify)

    hnf = sub.add_parser("enumerate-hnf", help="HNF classes of integer matrices with 1 <= det <= C")
    hnf.add_argument("--n", type=int, required=True)
    hnf.add_argument("--C", type=int, required=True)
    hnf.add_argument("--cap", type=int, default=10**6)
    hnf.add_argument("--list", action="store_true")
    hnf.add_argument("--json", action="store_true")
    hnf.set_defaults(func=cmd_enumerate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BoundTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except NodeBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOTFOUND
    except (InputError, ParseError, FieldMismatch, FieldError, CapExceeded, ModsymError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
