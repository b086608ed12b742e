from __future__ import annotations

import pytest

from cthd.encoding import encode
from cthd.errors import MissingTrace, UnknownAction
from cthd.generators import instances
from cthd.model import LayeredPlan, TraceStep
from cthd.oracle import oracle_enumerate, oracle_min_makespan, oracle_solvable
from cthd.pipeline import (
    decode,
    decode_names,
    format_plan,
    parse_plan,
    plan_from_json,
    plan_to_json,
    roundtrip,
    validate,
)
from cthd.search import SearchConfig, cpfd_solve
from cthd.strips import solve_bfs

from .conftest import names


def best(problem):
    return cpfd_solve(problem, SearchConfig(mode="voluntary", objective="min-makespan"))


def test_decode_bfs_plan(concurrent):
    enc = encode(concurrent, 4)
    plan = decode(solve_bfs(enc.problem), enc)
    assert names(plan, concurrent) == [["a1", "a3"], ["a2"]]
    assert validate(concurrent, plan)


def test_decode_edge_cases(concurrent):
    enc = encode(concurrent, 4)
    empty = decode_names(["m0_split(th0,th1,th2,th3)", "switch", "switch"], enc)
    assert empty.layers == ()
    plan = decode_names(
        ["m0_split(th0,th1,th2,th3)", "switch", "p0_a1(th1)", "switch", "switch", "p2_a3(th3)", "switch"], enc
    )
    assert names(plan, concurrent) == [["a1"], ["a3"]]
    with pytest.raises(UnknownAction):
        decode([10_000], enc)
    with pytest.raises(UnknownAction):
        decode_names(["p0_a1(th1)"], enc)  # holder still empty


def _move_action(trace, resolver, target_layer):
    """Move the action step for ``resolver`` to the end of layer ``target_layer``."""
    steps = [s for s in trace if not (s.kind == "action" and s.resolver == resolver)]
    moved = next(s for s in trace if s.kind == "action" and s.resolver == resolver)
    layer, out = 0, []
    for s in steps:
        if s.kind == "switch":
            if layer == target_layer:
                out.append(moved)
            layer += 1
        out.append(s)
    return out


def test_validate_rejects_moved_action(concurrent):
    plan = best(concurrent)
    a2 = concurrent.action("a2").id
    bad = LayeredPlan(plan.layers, _move_action(plan.trace, a2, 0))
    verdict = validate(concurrent, bad)
    assert not verdict and verdict.reason in ("NotIndependent", "Inapplicable")


def test_validate_rejects_missing_action(concurrent):
    plan = best(concurrent)
    # without a3 the method's closing no-op can never run either
    drop = {concurrent.action("a3").id} | {a.id for a in concurrent.actions if a.dummy}
    trace = [s for s in plan.trace if not (s.kind == "action" and s.resolver in drop)]
    trace = trace[:-1]  # the no-op's layer is now empty
    verdict = validate(concurrent, LayeredPlan.from_trace(concurrent, trace))
    assert verdict.reason == "UnresolvedTasks"


def test_validate_other_failures(sequential):
    plan = cpfd_solve(sequential)
    assert validate(sequential, plan)
    assert validate(sequential, LayeredPlan(((0,),), plan.trace)).reason == "LayerMismatch"
    trace = list(plan.trace)
    doubled = trace[:2] + [TraceStep("switch")] + trace[2:]
    assert validate(sequential, LayeredPlan.from_trace(sequential, doubled)).reason == "EmptyLayer"
    wrong = [TraceStep("action", 0, 0)] + trace
    assert validate(sequential, LayeredPlan(plan.layers, wrong)).reason == "WrongTask"
    bad_kids = [TraceStep("method", 0, 0, (0, 1, 2, 3))] + trace[1:]
    assert validate(sequential, LayeredPlan(plan.layers, bad_kids)).reason == "BadTrace"
    with pytest.raises(MissingTrace):
        validate(sequential, LayeredPlan(plan.layers))


def test_validate_trailing_violation(sequential):
    plan = cpfd_solve(sequential)
    noop = next(a for a in sequential.actions if a.dummy)
    trace = _move_action(plan.trace, noop.id, 0)
    assert validate(sequential, LayeredPlan.from_trace(sequential, trace)).reason == "NotTrailing"


def test_oracle_examples(sequential, concurrent):
    plans = oracle_enumerate(sequential, 3)
    assert [names(p, sequential) for p in plans] == [[["a1"], ["a2"], ["a3"]]]
    keys = {tuple(map(tuple, names(p, concurrent))) for p in oracle_enumerate(concurrent, 2)}
    assert (("a1", "a3"), ("a2",)) in keys
    assert oracle_min_makespan(concurrent, 4) == 2
    assert oracle_solvable(concurrent) and not oracle_solvable(concurrent, bound=3)


def test_oracle_unsolvable_compound_without_method():
    from cthd.grounding import load
    from cthd.normalize import normalize

    d = "(define (domain d) (:task t :parameters ()) (:task u :parameters ()) (:action a :parameters ()) (:method m :parameters () :task (t) :subtasks (and (x (u)) (y (a)))))"
    q = "(define (problem q) (:domain d) (:init) (:htn :subtasks (t)))"
    p = normalize(load(d, q))
    assert oracle_enumerate(p, 4) == []
    assert not oracle_solvable(p)


def test_oracle_plans_validate():
    for inst in instances(30, start=300):
        for plan in oracle_enumerate(inst.problem, 3):
            assert validate(inst.problem, plan), inst.seed


def test_plan_text_and_json(nested):
    plan = best(nested)
    text = format_plan(plan, nested)
    assert text.startswith(f";; makespan {plan.makespan}\n")
    assert parse_plan(text, nested).layers == plan.layers
    again = plan_from_json(plan_to_json(plan, nested), nested)
    assert again == plan and validate(nested, again)
    with pytest.raises(UnknownAction):
        parse_plan("{zz}", nested)


def test_roundtrip_deepening(concurrent):
    from cthd.encoding import EncodingConfig

    result = roundtrip(concurrent, EncodingConfig(1, deepening=(1, 6)))
    assert result.bound == 4 and result.tried == (1, 2, 3, 4)
    assert result.plan.makespan == 2 and result.verdict
    greedy = roundtrip(concurrent, 4, solver="greedy")
    assert greedy.verdict
    assert not roundtrip(concurrent, 3).solved
