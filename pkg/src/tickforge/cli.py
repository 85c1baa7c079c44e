"""Command-line front end.

Exit codes: 0 property holds / success, 1 property fails, 2 usage or parse
error, 3 node budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import checkers, generators, oracle
from .engine import run_lts
from .syntax import SpecError, analyze, load_spec, print_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _load(path: str):
    try:
        return load_spec(path)
    except SpecError as e:
        for d in e.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except OSError as e:
        print(f"{path}: {e.strerror}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def cmd_validate(args) -> int:
    spec = _load(args.file)
    stats = analyze(spec)
    out = {"spec": spec.name, **stats.to_json()}
    if spec.expansion:
        out["expansion"] = spec.expansion
    if spec.progressing_pragma and not stats.progressing:
        out["warning"] = "pragma progressing given but the rules are not progressing"
    print(_dump(out))
    return EXIT_OK


def cmd_check(args) -> int:
    spec = _load(args.file)
    stats = analyze(spec)
    if not stats.balanced:
        print("error: specification is not balanced; its state space is unbounded", file=sys.stderr)
        return EXIT_USAGE
    prop = args.property.upper()
    if args.ticks is not None and prop == "V":
        print("error: V has no time-bounded form", file=sys.stderr)
        return EXIT_USAGE
    v = checkers.check(spec, prop, ticks=args.ticks, budget=args.budget, stats=stats)
    payload = v.to_json(timing=not args.no_timing)
    text = _dump(payload)
    print(text)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.dot and v.graph is not None:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(checkers.to_dot(v.graph))
    if v.status == "resource":
        return EXIT_RESOURCE
    return EXIT_OK if v.holds else EXIT_FAIL


def cmd_trace(args) -> int:
    spec = _load(args.file)
    policy = "random" if args.seed is not None else args.policy
    trace = run_lts(spec, policy=policy, budget=args.steps, seed=args.seed)
    if args.json:
        print(_dump(trace.to_json()))
    else:
        print("\n".join(trace.to_lines()))
    return EXIT_OK


def _parse_cnf(text: str):
    clauses = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            clauses.append(tuple(int(x) for x in chunk.replace(",", " ").split()))
    return clauses


def _write(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    try:
        if args.kind == "drone":
            points = [tuple(int(v) for v in p.split(",")) for p in args.points.split(";") if p.strip()]
            base = tuple(int(v) for v in args.base.split(","))
            text = generators.drone_source(args.x_max, args.y_max, args.e_max, None, points, base,
                                           args.M, args.drones, args.wind)
            _write(args.output, text)
        elif args.kind == "sat":
            cnf = _parse_cnf(args.cnf)
            text = generators.sat_source(cnf, args.conp)
            _write(args.output, text)
            print(f"n_ticks = {2 * len(cnf)}", file=sys.stderr)
        else:
            outdir = args.output or "corpus"
            os.makedirs(outdir, exist_ok=True)
            for name, e in generators.corpus().items():
                with open(os.path.join(outdir, f"{name}.tmsr"), "w", encoding="utf-8") as fh:
                    fh.write(e.source)
                side = {"expected": e.expected,
                        "bounded": {f"{p}@{n}": b for (p, n), b in e.bounded.items()},
                        "note": e.note}
                with open(os.path.join(outdir, f"{name}.expected.json"), "w", encoding="utf-8") as fh:
                    fh.write(_dump(side) + "\n")
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _load(args.file)
    try:
        holds = oracle.oracle_check(spec, None, args.property, args.horizon)
    except oracle.OracleBudget as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(_dump({"property": args.property.upper(), "horizon": args.horizon, "holds": holds}))
    return EXIT_OK if holds else EXIT_FAIL


def cmd_print(args) -> int:
    sys.stdout.write(print_spec(_load(args.file)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tickforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("validate", help="parse and analyze a spec")
    p.add_argument("file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("check", help="decide a property")
    p.add_argument("file")
    p.add_argument("--property", "-p", required=True, type=str.lower, choices=["z", "s", "v", "l"])
    p.add_argument("--ticks", type=int, help="check the n-time-bounded form")
    p.add_argument("--json", metavar="OUT", help="also write the verdict JSON here")
    p.add_argument("--dot", metavar="OUT", help="write the explored graph as DOT")
    p.add_argument("--no-timing", action="store_true", help="report elapsed_ms as 0 for byte-stable output")
    p.add_argument("--threads", type=int, default=1, help="accepted; exploration is sequential")
    p.add_argument("--budget", type=int, help="node budget (default from TICKFORGE_NODE_BUDGET)")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("trace", help="simulate under lazy time sampling")
    p.add_argument("file")
    p.add_argument("--steps", type=int, default=20)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--seed", type=int)
    g.add_argument("--policy", choices=["first"], default="first")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("gen", help="generate specs")
    p.add_argument("kind", choices=["drone", "sat", "corpus"])
    p.add_argument("-o", "--output")
    p.add_argument("--x-max", type=int, default=2)
    p.add_argument("--y-max", type=int, default=2)
    p.add_argument("--e-max", type=int, default=3)
    p.add_argument("--points", default="1,1", help="'x,y;x,y'")
    p.add_argument("--base", default="0,0")
    p.add_argument("-M", type=int, default=1)
    p.add_argument("--drones", type=int, default=1)
    p.add_argument("--wind", action="store_true")
    p.add_argument("--cnf", default="1 2 3", help="clauses as '1 -2 3; -1 2 2'")
    p.add_argument("--conp", action="store_true")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("oracle", help="brute-force reference verdict")
    p.add_argument("file")
    p.add_argument("--property", "-p", required=True, type=str.lower, choices=["z", "s", "v", "l"])
    p.add_argument("--horizon", type=int, help="tick bound; omit for the unbounded property")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("print", help="print the canonical form of a spec")
    p.add_argument("file")
    p.set_defaults(fn=cmd_print)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "oracle" and args.horizon is not None and args.property == "v":
        print("error: V has no time-bounded form", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except SystemExit as e:
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
