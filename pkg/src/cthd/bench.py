"""Benchmark harness: per-problem metrics and IPC-style scores."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import EmptyProblemSet, ResourceExhausted

SYSTEMS = ("cpfd", "cthd")
METRICS = ("solving_time", "search_time", "makespan", "propositions", "operators")


@dataclass
class MetricsRecord:
    problem: str
    system: str
    status: str  # solved | unsolved | timeout
    solving_time: float
    search_time: float
    makespan: int | None = None
    propositions: int | None = None
    operators: int | None = None
    bound: int | None = None

    def __post_init__(self):
        if self.status not in ("solved", "unsolved", "timeout"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status != "solved":
            self.makespan = None

    def cost(self, metric: str):
        """Cost used for scoring; ``None`` when the problem was not solved."""
        if self.status != "solved":
            return None
        return getattr(self, metric)


CSV_FIELDS = [f.name for f in fields(MetricsRecord)]


def ipc_score(costs: dict) -> dict:
    """``costs[system]`` lists one cost per problem (``None`` = unsolved).

    Per problem a system earns ``best / own`` where ``best`` is the lowest
    cost any system reached; unsolved problems earn 0.  Scores are averaged
    over the problem set.
    """
    if not costs:
        raise EmptyProblemSet("no systems to score")
    sizes = {len(v) for v in costs.values()}
    if len(sizes) != 1:
        raise ValueError("every system needs one cost per problem")
    (n,) = sizes
    if n == 0:
        raise EmptyProblemSet("no problems to score")
    for system, values in costs.items():
        if any(c is not None and c < 0 for c in values):
            raise ValueError(f"negative cost for {system}")
    scores = {s: 0.0 for s in costs}
    for i in range(n):
        solved = [v[i] for v in costs.values() if v[i] is not None]
        if not solved:
            continue
        best = min(solved)
        for s, values in costs.items():
            c = values[i]
            if c is None:
                continue
            scores[s] += 1.0 if c <= best else best / c
    return {s: total / n for s, total in scores.items()}


@dataclass
class ScoreTable:
    scores: dict = field(default_factory=dict)  # metric -> system -> score

    @classmethod
    def from_records(cls, records: list, metrics=METRICS) -> ScoreTable:
        problems = sorted({r.problem for r in records})
        systems = sorted({r.system for r in records})
        if not problems:
            raise EmptyProblemSet("no records")
        by_key = {(r.problem, r.system): r for r in records}
        table = {}
        for metric in metrics:
            costs = {
                s: [by_key[(p, s)].cost(metric) if (p, s) in by_key else None for p in problems]
                for s in systems
            }
            table[metric] = ipc_score(costs)
        return cls(table)

    def format(self) -> str:
        systems = sorted({s for row in self.scores.values() for s in row})
        head = f"{'metric':<14}" + "".join(f"{s:>10}" for s in systems)
        lines = [head]
        for metric, row in self.scores.items():
            lines.append(f"{metric:<14}" + "".join(f"{row.get(s, 0.0):>10.3f}" for s in systems))
        return "\n".join(lines)


# running --------------------------------------------------------------------------

@dataclass(frozen=True)
class Job:
    domain: str
    problem: str
    bound: int | None = None

    @property
    def id(self) -> str:
        return f"{Path(self.domain).stem}/{Path(self.problem).stem}"


def read_manifest(path) -> list:
    """One problem per line: ``domain.hddl problem.hddl [bound]``; ``#`` comments.

    Relative paths are resolved against the manifest's directory.
    """
    base = Path(path).parent
    jobs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: expected 'domain problem [bound]'")
        bound = int(parts[2]) if len(parts) == 3 else None
        jobs.append(Job(str(base / parts[0]), str(base / parts[1]), bound))
    return jobs


def run_job(job: Job, system: str, options: dict) -> MetricsRecord:
    """Solve one problem with one system; never raises on search failure."""
    from .encoding import EncodingConfig
    from .grounding import load
    from .normalize import normalize
    from .pipeline import roundtrip
    from .search import SearchConfig, cpfd_solve

    if system not in SYSTEMS:
        raise ValueError(f"unknown system {system!r}")
    time_limit = options.get("time_limit")
    node_limit = options.get("node_limit")
    start = time.perf_counter()
    problem = normalize(load(Path(job.domain).read_text(), Path(job.problem).read_text()))
    if system == "cpfd":
        cfg = SearchConfig(
            mode=options.get("mode", "voluntary"),
            objective=options.get("objective", "min-makespan"),
            node_limit=node_limit,
            time_limit=time_limit,
        )
        s0 = time.perf_counter()
        try:
            plan = cpfd_solve(problem, cfg)
            status = "solved" if plan is not None else "unsolved"
        except ResourceExhausted:
            plan, status = None, "timeout"
        end = time.perf_counter()
        return MetricsRecord(
            job.id, system, status, end - start, end - s0,
            plan.makespan if plan else None,
            len(problem.propositions), len(problem.actions) + len(problem.methods),
        )
    bound = job.bound or options.get("bound")
    deepen = options.get("deepen")
    if bound is None and deepen is None:
        deepen = (1, 8)
    cfg = EncodingConfig(bound or deepen[0], deepening=None if bound else deepen)
    s0 = time.perf_counter()
    try:
        result = roundtrip(problem, cfg, options.get("solver", "bfs"), node_limit, time_limit)
        status = "solved" if result.solved and result.verdict else "unsolved"
    except ResourceExhausted:
        result, status = None, "timeout"
    end = time.perf_counter()
    enc = result.encoding if result else None
    return MetricsRecord(
        job.id, system, status, end - start, end - s0,
        result.plan.makespan if status == "solved" else None,
        enc.stats["propositions"] if enc else None,
        enc.stats["operators"] if enc else None,
        result.bound if result and result.solved else (enc.bound if enc else None),
    )


def _run(args):
    return run_job(*args)


def run_bench(jobs: list, systems=SYSTEMS, options: dict | None = None, workers: int = 1) -> list:
    """Run every job with every system; results are ordered by problem id then system."""
    options = options or {}
    tasks = [(job, s, options) for job in jobs for s in systems]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run, tasks))
    else:
        records = [_run(t) for t in tasks]
    return sorted(records, key=lambda r: (r.problem, r.system))


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()
