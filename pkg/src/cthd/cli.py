"""Command line: ``cthd solve | encode | roundtrip | validate | bench``.

Exit codes: 0 solved or valid, 1 unsolved or invalid, 2 usage or input
error, 3 resource limit reached.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .errors import HddlError, MissingTrace, PlanningError, ResourceExhausted, UnknownAction

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


def _deepen(text: str) -> tuple:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected MIN:MAX, e.g. 2:8") from None
    if lo < 1 or lo > hi:
        raise argparse.ArgumentTypeError("need 1 <= MIN <= MAX")
    return lo, hi


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return value

    return parse


def _load(args):
    from .grounding import load
    from .normalize import normalize

    return normalize(load(Path(args.domain).read_text(), Path(args.problem).read_text()))


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_solve(args) -> int:
    from .bench import MetricsRecord
    from .pipeline import format_plan, plan_to_json
    from .search import SearchConfig, cpfd_solve

    start = time.perf_counter()
    problem = _load(args)
    cfg = SearchConfig(args.mode, args.objective, args.node_limit, args.time_limit)
    s0 = time.perf_counter()
    plan = cpfd_solve(problem, cfg)
    end = time.perf_counter()
    record = MetricsRecord(
        problem.name, "cpfd", "solved" if plan else "unsolved", end - start, end - s0,
        plan.makespan if plan else None, len(problem.propositions), len(problem.actions) + len(problem.methods),
    )
    if args.format == "json":
        payload = {"metrics": asdict(record)}
        if plan is not None:
            payload["plan"] = json.loads(plan_to_json(plan, problem))
        _emit(args, json.dumps(payload, indent=2))
    elif plan is None:
        _emit(args, ";; no solution")
    else:
        _emit(args, format_plan(plan, problem) + f";; search time {record.search_time:.3f}s\n")
    return EXIT_OK if plan else EXIT_FAIL


def cmd_encode(args) -> int:
    from .encoding import EncodingConfig, encode
    from .pddl import write_pddl

    problem = _load(args)
    enc = encode(problem, EncodingConfig(args.bound, not args.compile, args.compile_threshold))
    domain, prob = write_pddl(enc)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{enc.problem.name}"
    (out / f"{stem}_domain.pddl").write_text(domain)
    (out / f"{stem}_problem.pddl").write_text(prob)
    stats = {"propositions": enc.stats["propositions"], "operators": enc.stats["operators"], "bound": enc.bound}
    if args.stats:
        (out / f"{stem}_stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    if args.format == "json":
        print(json.dumps(enc.stats, indent=2))
    else:
        print(f"wrote {out / (stem + '_domain.pddl')} and {out / (stem + '_problem.pddl')}")
        print(" ".join(f"{k}={v}" for k, v in stats.items()))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    from .encoding import EncodingConfig
    from .pipeline import format_plan, plan_to_json, roundtrip

    if args.bound is None and args.deepen is None:
        raise argparse.ArgumentTypeError("give --bound N or --deepen MIN:MAX")
    problem = _load(args)
    cfg = EncodingConfig(args.bound or args.deepen[0], not args.compile, args.compile_threshold,
                         None if args.bound else args.deepen)
    plan_text = Path(args.plan_in).read_text() if args.plan_in else None
    result = roundtrip(problem, cfg, args.solver, args.node_limit, args.time_limit, plan_text)
    ok = result.solved and bool(result.verdict)
    if args.format == "json":
        payload = {
            "bound": result.bound,
            "tried": list(result.tried),
            "verdict": None if result.verdict is None else str(result.verdict),
            "plan": json.loads(plan_to_json(result.plan, problem)) if result.plan else None,
        }
        _emit(args, json.dumps(payload, indent=2))
    elif not result.solved:
        _emit(args, f";; no classical plan for bounds {list(result.tried)}")
    else:
        _emit(args, format_plan(result.plan, problem) + f";; bound {result.bound}: {result.verdict}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_validate(args) -> int:
    from .pipeline import parse_plan, plan_from_json, validate

    problem = _load(args)
    text = Path(args.plan).read_text()
    plan = plan_from_json(text, problem) if text.lstrip().startswith("{") else parse_plan(text, problem)
    verdict = validate(problem, plan)
    if args.format == "json":
        print(json.dumps({"valid": verdict.valid, "reason": verdict.reason, "step": verdict.step,
                          "message": verdict.message}))
    else:
        print(verdict)
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_bench(args) -> int:
    from .bench import ScoreTable, read_manifest, records_to_csv, run_bench

    jobs = read_manifest(args.manifest)
    systems = [s.strip() for s in args.systems.split(",") if s.strip()]
    options = {
        "mode": args.mode, "objective": args.objective, "time_limit": args.time_limit,
        "node_limit": args.node_limit, "bound": args.bound, "deepen": args.deepen, "solver": args.solver,
    }
    records = run_bench(jobs, systems, options, args.jobs)
    if args.csv:
        Path(args.csv).write_text(records_to_csv(records))
    table = ScoreTable.from_records(records)
    if args.format == "json":
        print(json.dumps({"records": [asdict(r) for r in records], "scores": table.scores}, indent=2))
    else:
        for r in records:
            span = "-" if r.makespan is None else r.makespan
            print(f"{r.problem:<30} {r.system:<5} {r.status:<8} makespan={span} time={r.solving_time:.3f}s")
        print()
        print(table.format())
    return EXIT_OK if all(r.status == "solved" for r in records) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cthd", description="Concurrent HTN planning and HTN-to-STRIPS compilation")
    sub = parser.add_subparsers(dest="command", required=True)

    def limits(p):
        p.add_argument("--time-limit", type=_positive(float), metavar="S")
        p.add_argument("--node-limit", type=_positive(int), metavar="N")

    def search_opts(p):
        p.add_argument("--mode", choices=("literal", "voluntary"), default="voluntary")
        p.add_argument("--objective", choices=("first", "min-makespan"), default="min-makespan")

    def encoding_opts(p):
        p.add_argument("--compile", action="store_true", help="compile conditional effects away")
        p.add_argument("--compile-threshold", type=_positive(int), default=8, metavar="B")

    def problem_args(p):
        p.add_argument("domain")
        p.add_argument("problem")

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("solve", help="solve with the layered progression search")
    problem_args(p), search_opts(p), limits(p), fmt(p)
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("encode", help="write the taskholder encoding as PDDL")
    problem_args(p), encoding_opts(p), fmt(p)
    p.add_argument("--bound", type=_positive(int), required=True, metavar="N")
    p.add_argument("--out-dir", default=".", metavar="DIR")
    p.add_argument("--stats", action="store_true", help="also write a JSON stats sidecar")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("roundtrip", help="encode, solve classically, decode and validate")
    problem_args(p), encoding_opts(p), limits(p), fmt(p)
    p.add_argument("--bound", type=_positive(int), metavar="N")
    p.add_argument("--deepen", type=_deepen, metavar="MIN:MAX")
    p.add_argument("--solver", choices=("bfs", "greedy"), default="bfs")
    p.add_argument("--plan-in", metavar="FILE", help="classical plan from an external planner")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("validate", help="check a plan file (JSON with trace)")
    problem_args(p), fmt(p)
    p.add_argument("plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a manifest of problems and score the systems")
    p.add_argument("manifest")
    p.add_argument("--systems", default="cpfd,cthd")
    p.add_argument("--jobs", type=_positive(int), default=1)
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--bound", type=_positive(int), metavar="N")
    p.add_argument("--deepen", type=_deepen, metavar="MIN:MAX")
    p.add_argument("--solver", choices=("bfs", "greedy"), default="bfs")
    search_opts(p), limits(p), fmt(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ResourceExhausted as exc:
        print(f"cthd: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except MissingTrace as exc:
        print(f"cthd: {exc} (plans in the text format carry no trace; use --format json)", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, HddlError, UnknownAction, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"cthd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PlanningError as exc:
        print(f"cthd: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
