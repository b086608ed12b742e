"""Concurrent layered HTN planning and its compilation to classical planning.

Typical use::

    from cthd import load, normalize, cpfd_solve, SearchConfig

    problem = normalize(load(domain_text, problem_text))
    plan = cpfd_solve(problem, SearchConfig(mode="voluntary", objective="min-makespan"))
"""

from __future__ import annotations

from .bench import MetricsRecord, ScoreTable, ipc_score
from .encoding import (
    CthdEncoding,
    EncodingConfig,
    crescent_assignments,
    crescent_count,
    encode,
    encode_propositions,
    unordered_count,
)
from .grounding import ground, load
from .hddl import parse_domain, parse_problem
from .model import (
    GroundAction,
    GroundHtnProblem,
    LayeredPlan,
    Method,
    Task,
    TaskNetwork,
    TraceStep,
    apply,
    apply_layer,
    dependent_set,
    independent,
    progress_action,
    progress_method,
)
from .normalize import is_normalized, normalize
from .oracle import oracle_enumerate, oracle_min_makespan, oracle_solvable
from .pddl import read_pddl, write_pddl
from .pipeline import Verdict, decode, roundtrip, validate
from .search import SearchConfig, cpfd_enumerate, cpfd_solve
from .strips import ClassicalProblem, solve_bfs, solve_greedy

__version__ = "0.1.0"

__all__ = [
    "ClassicalProblem", "CthdEncoding", "EncodingConfig", "GroundAction", "GroundHtnProblem",
    "LayeredPlan", "Method", "MetricsRecord", "ScoreTable", "SearchConfig", "Task", "TaskNetwork",
    "TraceStep", "Verdict", "apply", "apply_layer", "cpfd_enumerate", "cpfd_solve",
    "crescent_assignments", "crescent_count", "decode", "dependent_set", "encode",
    "encode_propositions", "ground", "independent", "ipc_score", "is_normalized", "load",
    "normalize", "oracle_enumerate", "oracle_min_makespan", "oracle_solvable", "parse_domain",
    "parse_problem", "progress_action", "progress_method", "read_pddl", "roundtrip",
    "solve_bfs", "solve_greedy", "unordered_count", "validate", "write_pddl",
]
