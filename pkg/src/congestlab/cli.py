"""``congestlab`` command line: generate | verify | run | scaling-report | solve.

Every flag can also come from a TOML file given with ``--config``; keys of
the table named after the subcommand (dashes or underscores) become flag
defaults, and explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import algos
from .experiments import (FAMILIES, MODELS, RANDOM_GRAPHS, ExperimentError, ExperimentSpec,
                          cmd_generate, cmd_run, cmd_scaling_report, cmd_verify)
from .graph import GraphError, read_graph
from .oracles import PROBLEMS, OracleRefusal, solve


def int_list(text: str) -> list[int]:
    """``"0-9"``, ``"1,4,7"`` or a mix such as ``"0-2,10"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def key_values(items: Sequence[str] | None) -> dict[str, Any]:
    """``key=value`` pairs; values are parsed as JSON when possible."""
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ExperimentError(f"expected key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="congestlab", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="TOML file with flag defaults")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an instance and its JSON sidecar")
    g.add_argument("family", choices=sorted(FAMILIES) + list(RANDOM_GRAPHS))
    for name in ("k", "l", "n", "t", "c", "d", "i", "j", "q"):
        g.add_argument(f"--{name}", type=int)
    g.add_argument("--p", help="edge probability (gnp) or crossing row p (mds-crossed)")
    g.add_argument("--x", help="hex bit string, MSB first (random if omitted)")
    g.add_argument("--y", help="hex bit string, MSB first (random if omitted)")
    g.add_argument("--eps")
    g.add_argument("--seed", type=int, help="randomise IDs and ports (and random bits)")
    g.add_argument("--count", type=int, default=1, help="write a numbered batch")
    g.add_argument("--out", help="graph path; the sidecar goes to <out>.json")

    v = sub.add_parser("verify", help="check instances against their predicted optimum")
    v.add_argument("paths", nargs="+")
    v.add_argument("--max-vertices", type=int)
    v.add_argument("--strict", action="store_true", help="treat oracle refusals as failures")

    r = sub.add_parser("run", help="seed sweep of one algorithm, CSV rows to --out")
    r.add_argument("--name", default="run")
    r.add_argument("--algorithm", choices=sorted(algos.REGISTRY))
    r.add_argument("--generator", default="gnp")
    r.add_argument("--sizes", type=int_list, default=[])
    r.add_argument("--seeds", type=int_list, default=[0])
    r.add_argument("--problem", choices=PROBLEMS)
    r.add_argument("--gen", action="append", metavar="KEY=VALUE",
                   help="generator parameter, e.g. c=40 or p=0.2 or path=g.txt")
    r.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="algorithm parameter, e.g. eps=1/2 or alpha=0.5")
    r.add_argument("--knowledge", choices=("KT0", "KT1"))
    r.add_argument("--bandwidth", help="LOCAL, CONGEST or CONGEST:<c>")
    r.add_argument("--round-cap", type=int)
    r.add_argument("--oracle", action="store_true", help="compare with the exact optimum")
    r.add_argument("--max-vertices", type=int)
    r.add_argument("--workers", type=int, help="processes (default from CONGESTLAB_WORKERS)")
    r.add_argument("--out", help="CSV file to append to (default: stdout)")

    s = sub.add_parser("scaling-report", help="log-log fit of messages against n")
    s.add_argument("csv")
    s.add_argument("--model", choices=sorted(MODELS), default="n")
    s.add_argument("--name", help="only rows of this experiment")
    s.add_argument("--json", help="write the fit and plot data here")

    o = sub.add_parser("solve", help="exact optimum of a graph file")
    o.add_argument("graph")
    o.add_argument("--problem", choices=PROBLEMS, required=True)
    o.add_argument("--max-vertices", type=int)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    with open(args.config, "rb") as fh:
        data = tomllib.load(fh)
    table = data.get(args.command, {})
    defaults = {k.replace("-", "_"): val for k, val in table.items()}
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    parser = sub.choices[args.command]
    known = {a.dest for a in parser._actions}
    unknown = sorted(set(defaults) - known)
    if unknown:
        ap.error(f"unknown key(s) in [{args.command}] of {args.config}: {', '.join(unknown)}")
    for act in parser._actions:
        if act.dest in defaults:
            val = defaults[act.dest]
            if act.type is int_list and not isinstance(val, list):
                val = int_list(val)
            if act.required:
                act.required = False
            if act.nargs == "+" and isinstance(val, list):
                act.nargs = "*"
            defaults[act.dest] = val
    parser.set_defaults(**defaults)
    return ap.parse_args(argv)


def _generate(args) -> int:
    params = {k: getattr(args, k) for k in
              ("k", "l", "n", "t", "c", "d", "i", "j", "q", "p", "x", "y", "eps", "seed")}
    params = {k: v for k, v in params.items() if v is not None}
    out = args.out or f"{args.family}.pg"
    for path in cmd_generate(args.family, params, out, args.count):
        print(path)
    return 0


def _verify(args) -> int:
    rows, code = cmd_verify(args.paths, args.max_vertices, args.strict)
    for row in rows:
        print(row.line())
    passed = sum(r.status == "PASS" for r in rows)
    print(f"{passed}/{len(rows)} pass")
    return code


def _run(args) -> int:
    if not args.algorithm:
        raise ExperimentError("--algorithm is required")
    algo_params = key_values(args.param)
    if args.problem:
        algo_params["problem"] = args.problem
    spec = ExperimentSpec(
        name=args.name, algorithm=args.algorithm, generator=args.generator,
        seeds=list(args.seeds), sizes=list(args.sizes), gen_params=key_values(args.gen),
        algo_params=algo_params, knowledge=args.knowledge, bandwidth=args.bandwidth,
        round_cap=args.round_cap, oracle=args.oracle, max_vertices=args.max_vertices,
        out=args.out)
    rows = cmd_run(spec, workers=args.workers)
    if not args.out:
        from .experiments import CSV_COLUMNS, format_row
        sys.stdout.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            sys.stdout.write(format_row(row))
    bad = sum(1 for r in rows if not r.valid)
    print(f"{len(rows)} rows, {bad} invalid, {sum(r.failed for r in rows)} failed",
          file=sys.stderr)
    return 0


def _scaling(args) -> int:
    fit = cmd_scaling_report(args.csv, args.model, args.name)
    print(f"fitted exponent {fit.exponent:.3f} (model {fit.model}, constant {fit.model_constant:.4g})")
    for n, msgs, fitted in fit.points:
        print(f"{n},{msgs:.1f},{fitted:.1f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(fit.to_json(), fh, indent=1)
            fh.write("\n")
    return 0


def _solve(args) -> int:
    g = read_graph(args.graph)
    sol = solve(g, args.problem, args.max_vertices)
    print(json.dumps(sol.to_json(g), sort_keys=True))
    return 0


COMMANDS = {"generate": _generate, "verify": _verify, "run": _run,
            "scaling-report": _scaling, "solve": _solve}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = _apply_config(ap, sys.argv[1:] if argv is None else list(argv))
    try:
        return COMMANDS[args.command](args)
    except (ExperimentError, GraphError, OracleRefusal, algos.RegistryError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"congestlab {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
