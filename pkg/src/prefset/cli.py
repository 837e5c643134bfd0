"""Command-line front end: ``prefset solve|oracle|gen|bench|explain-class``.

Exit codes: 0 success, 1 bad input, 2 no feasible subset, 3 timeout.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .catalog import AttributeSchema, load_catalog
from .csp_search import VARIANTS, CSPSearchConfig, solve_csp_bnb
from .prefmodel import load_model, model_to_json
from .problem import Problem, SearchResult
from .properties import dump_properties, load_properties
from .subset_search import solve_subset_bnb
from .tractable import ClassError, check_class, solve_atomic_greedy, solve_onevee

EXIT_OK, EXIT_INPUT, EXIT_UNSAT, EXIT_TIMEOUT = 0, 1, 2, 3
INSTANCE_FILES = ("catalog.json", "props.json", "model.json")


# ---------------------------------------------------------------------------
# loading and saving


def load_problem(catalog: str, props: str, model: str, schema: str | None = None) -> Problem:
    text = Path(catalog).read_text()
    sch = AttributeSchema.from_json(json.loads(Path(schema).read_text())) if schema else None
    fmt = "csv" if catalog.endswith(".csv") else "json"
    cat = load_catalog(text, fmt, sch)
    ps = load_properties(Path(props).read_text(), cat.schema)
    m = load_model(Path(model).read_text(), ps, len(cat))
    return Problem(cat, ps, m)


def save_problem(problem: Problem, out: Path, provenance: dict | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "catalog.json").write_text(json.dumps(problem.catalog.to_json(), indent=1))
    (out / "props.json").write_text(dump_properties(problem.props))
    (out / "model.json").write_text(json.dumps(model_to_json(problem.model), indent=1))
    if provenance:
        (out / "provenance.json").write_text(json.dumps(provenance, indent=1, default=str))


def _problem_from_args(args) -> Problem:
    if args.instance:
        d = Path(args.instance)
        return load_problem(*(str(d / f) for f in INSTANCE_FILES))
    if args.example:
        return _example(args.example)
    missing = [f for f in ("catalog", "props", "model") if not getattr(args, f)]
    if missing:
        raise SystemExit(f"missing --{' --'.join(missing)} (or give --instance DIR / --example NAME)")
    return load_problem(args.catalog, args.props, args.model, args.schema)


def _example(name: str) -> Problem:
    from .harness.fixtures import senators_gai, senators_tcp

    if name == "senators-gai":
        return senators_gai()
    if name == "senators-tcp":
        return senators_tcp()
    if name.startswith("movies"):
        from .harness.movies import festival_problem

        _, _, suite = name.partition(":")
        return festival_problem(suite or "P14")
    raise SystemExit(f"unknown example {name!r}")


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--catalog", help="catalog file (.json with schema, or .csv with --schema)")
    p.add_argument("--schema", help="schema JSON for CSV catalogs")
    p.add_argument("--props", help="property list JSON")
    p.add_argument("--model", help="preference model JSON")
    p.add_argument("--instance", help="directory holding catalog.json, props.json, model.json")
    p.add_argument("--example", help="built-in instance: senators-gai, senators-tcp, movies[:SUITE]")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


# ---------------------------------------------------------------------------
# commands


def _print_result(res: SearchResult, problem: Problem, as_json: bool) -> None:
    if as_json:
        print(json.dumps(res.to_json(problem.catalog), indent=2, default=str))
        return
    if res.timed_out:
        print(f"timed out; best found value {res.value}")
    elif not res.proven_optimal:
        print(f"no feasible subset: {res.diagnostic}")
        return
    print(f"engine:     {res.engine}")
    print(f"value:      {res.value}")
    print(f"witness:    {' '.join(res.item_ids(problem.catalog))}")
    print("assignment: " + ", ".join(f"{k}={v}" for k, v in res.assignment.items()))


def _exit_code(res: SearchResult) -> int:
    if res.timed_out:
        return EXIT_TIMEOUT
    return EXIT_OK if res.proven_optimal else EXIT_UNSAT


def cmd_solve(args) -> int:
    problem = _problem_from_args(args)
    engine = args.engine
    if args.explain_class or engine == "auto":
        prof = check_class(problem)
        if args.explain_class:
            print(json.dumps(prof.to_json(), indent=2), file=sys.stderr)
        if engine == "auto":
            engine = "greedy" if prof.greedy_eligible else "twosat" if prof.twosat_eligible else "csp"
    try:
        if engine == "subset":
            res = solve_subset_bnb(problem, strategy=args.strategy, timeout=args.timeout,
                                   node_budget=args.node_budget)
        elif engine == "csp":
            cfg = CSPSearchConfig(**VARIANTS[args.variant]) if args.variant else CSPSearchConfig()
            cfg.mode = args.mode
            cfg.strategy = args.strategy
            cfg.timeout = args.timeout
            if args.no_warm_start:
                cfg.warm_start = False
            if args.no_sibling:
                cfg.sibling = False
            if args.no_nogoods:
                cfg.nogoods = False
            if args.no_fc:
                cfg.fc = False
            if args.no_can_must:
                cfg.can_must = False
            res = solve_csp_bnb(problem, cfg)
        elif engine == "greedy":
            res = solve_atomic_greedy(problem)
        elif engine == "twosat":
            res = solve_onevee(problem)
        else:
            raise SystemExit(f"unknown engine {engine!r}")
    except ClassError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    _print_result(res, problem, args.json)
    return _exit_code(res)


def cmd_oracle(args) -> int:
    from .harness.oracle import GuardExceeded, brute_force_gai, brute_force_tcp

    problem = _problem_from_args(args)
    kind = args.kind or problem.model.kind
    try:
        res = brute_force_tcp(problem, args.n_guard) if kind == "tcp" else brute_force_gai(problem, args.n_guard)
    except GuardExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    out = {
        "value": res.value,
        "assignment": res.assignment,
        "witness": None if res.witness is None else problem.catalog.ids(res.witness),
        "optimal_count": res.optimal_count,
    }
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for k, v in out.items():
            print(f"{k}: {v}")
    return EXIT_OK if res.feasible else EXIT_UNSAT


def _parse_edges(text: str) -> list:
    return [tuple(int(v) for v in e.split("-")) for e in text.split(",") if e.strip()]


def _parse_cnf(text: str) -> list:
    return [[int(x) for x in c.split()] for c in text.split(";") if c.strip()]


def cmd_gen(args) -> int:
    from .harness import generators as g

    kind = args.kind
    if kind == "random":
        inst = g.gen_random({"n": args.n, "m": args.m, "model": args.model_kind}, args.seed)
    elif kind == "vertex-cover":
        edges = _parse_edges(args.edges or "0-1,1-2,0-2")
        verts = sorted({v for e in edges for v in e})
        inst = g.gen_vertex_cover(verts, edges)
    elif kind in ("ksat", "max2sat"):
        clauses = _parse_cnf(args.cnf or "1 -2 3; 2; -1 3")
        nv = max(abs(l) for c in clauses for l in c)
        inst = (g.gen_ksat if kind == "ksat" else g.gen_max2sat)(clauses, nv)
    elif kind == "atomic":
        inst = g.gen_atomic(args.n, args.m, args.seed)
    elif kind == "onevee":
        inst = g.gen_onevee(args.n, args.m, args.seed)
    elif kind == "movies":
        from .harness.movies import festival_problem

        inst = g.GeneratedInstance(festival_problem(args.suite, n=args.n, seed=args.seed),
                                   {"movies": {"suite": args.suite, "n": args.n, "seed": args.seed}})
    else:
        raise SystemExit(f"unknown generator {kind!r}")
    save_problem(inst.problem, Path(args.out), inst.provenance)
    print(f"wrote {args.out}/ ({inst.problem.n} items, {len(inst.problem.props)} properties)")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .harness.bench import ALL_VARIANTS, run_benchmark
    from .harness.fixtures import senators_gai, senators_tcp
    from .harness.generators import gen_random

    if args.suite == "senators":
        instances = [("senators-gai", senators_gai()), ("senators-tcp", senators_tcp())]
    elif args.suite == "random":
        instances = [(f"random-{s}", gen_random({"n": args.n, "m": args.m, "model": args.model_kind}, s).problem)
                     for s in range(args.seed, args.seed + args.count)]
    else:
        from .harness.movies import SUITES, festival_problem

        suites = args.movie_suites.split(",") if args.movie_suites else list(SUITES)
        instances = [(f"{s}/n={args.n}", festival_problem(s, n=args.n, seed=args.seed)) for s in suites]
    variants = args.variants.split(",") if args.variants else list(ALL_VARIANTS)
    report = run_benchmark(instances, variants, budget=args.timeout, mode=args.mode)
    text = report.to_json() if args.json else report.to_tsv()
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="" if text.endswith("\n") else "\n")
    for line in report.mismatches():
        print(f"MISMATCH {line}", file=sys.stderr)
    return EXIT_OK if report.consistent else EXIT_INPUT


def cmd_explain_class(args) -> int:
    prof = check_class(_problem_from_args(args))
    if args.json:
        print(json.dumps(prof.to_json(), indent=2))
    else:
        print(f"attributes={prof.a} connectives={prof.k} domain={prof.d} max-share={prof.mu} "
              f"properties={prof.m} items={prof.n}")
        for cls in ("greedy", "twosat"):
            why = prof.reasons[cls]
            print(f"{cls}: {'eligible' if not why else 'not eligible: ' + '; '.join(why)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prefset", description="Optimal subset selection under set preferences.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a most preferred subset")
    _add_inputs(p)
    p.add_argument("--engine", choices=["subset", "csp", "auto", "greedy", "twosat"], default="csp")
    p.add_argument("--strategy", choices=["dfs", "bfs"], default="dfs")
    p.add_argument("--mode", choices=["tcp", "gai"], help="CSP engine target (default: the model's kind)")
    p.add_argument("--variant", choices=list(VARIANTS), help="named CSP engine variant")
    for flag in ("warm-start", "sibling", "nogoods", "fc", "can-must"):
        p.add_argument(f"--no-{flag}", action="store_true")
    p.add_argument("--timeout", type=float)
    p.add_argument("--node-budget", type=int, default=10**12)
    p.add_argument("--seed", type=int, default=0, help="unused by the deterministic engines")
    p.add_argument("--explain-class", action="store_true", help="also print the tractable-class profile")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive reference answer (small catalogs only)")
    _add_inputs(p)
    p.add_argument("--kind", choices=["tcp", "gai"])
    p.add_argument("--n-guard", type=int, default=20)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write a generated instance to a directory")
    p.add_argument("kind", choices=["random", "vertex-cover", "ksat", "max2sat", "atomic", "onevee", "movies"])
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--model-kind", choices=["tcp", "gai"], default="tcp")
    p.add_argument("--edges", help="graph as '0-1,1-2'")
    p.add_argument("--cnf", help="clauses as '1 -2 3; 2; -1 3'")
    p.add_argument("--suite", default="P14")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="compare engine variants")
    p.add_argument("--suite", choices=["senators", "random", "movies"], default="senators")
    p.add_argument("--variants", help="comma list, e.g. subset-dfs,BB-S,BB-S+ng")
    p.add_argument("--movie-suites", help="comma list of P5,P9,P14,P14',P14''")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--model-kind", choices=["tcp", "gai"], default="tcp")
    p.add_argument("--mode", choices=["tcp", "gai"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float, default=60.0, help="budget per run, seconds")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("explain-class", help="report whether a tractable solver applies")
    _add_inputs(p)
    p.set_defaults(func=cmd_explain_class)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
