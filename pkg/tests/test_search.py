from __future__ import annotations

import threading

import pytest

from cthd.errors import EmptyLayer, ResourceExhausted
from cthd.generators import instances
from cthd.pipeline import validate
from cthd.search import SearchConfig, SearchNode, cpfd_enumerate, cpfd_solve, search_statistics, switch_layer

from .conftest import names

MODES = [("literal", "first"), ("voluntary", "first"), ("literal", "min-makespan"), ("voluntary", "min-makespan")]


@pytest.mark.parametrize("mode,objective", MODES)
def test_sequential_variant_any_mode(sequential, mode, objective):
    plan = cpfd_solve(sequential, SearchConfig(mode=mode, objective=objective))
    assert names(plan, sequential) == [["a1"], ["a2"], ["a3"]]


def test_concurrent_variant_min_makespan(concurrent):
    plan = cpfd_solve(concurrent, SearchConfig(mode="voluntary", objective="min-makespan"))
    assert names(plan, concurrent) == [["a1", "a3"], ["a2"]]
    assert validate(concurrent, plan)


def test_enumeration_is_sorted_and_unique(concurrent):
    plans = cpfd_enumerate(concurrent, SearchConfig(mode="voluntary"), 4)
    keys = [p.key for p in plans]
    assert len(keys) == len(set(keys)) == 5
    assert [p.makespan for p in plans] == sorted(p.makespan for p in plans)


def test_memo_and_reduction_do_not_change_answers():
    for inst in instances(40, start=500):
        p = inst.problem
        base = cpfd_solve(p, SearchConfig(mode="voluntary", objective="min-makespan", reduce=False))
        fast = cpfd_solve(p, SearchConfig(mode="voluntary", objective="min-makespan", memoize=True))
        assert (base is None) == (fast is None)
        if base is not None:
            assert base.makespan == fast.makespan


def test_budgets_and_cancel(nested):
    with pytest.raises(ResourceExhausted):
        cpfd_solve(nested, SearchConfig(node_limit=2))
    cancel = threading.Event()
    cancel.set()
    with pytest.raises(ResourceExhausted):
        cpfd_solve(nested, SearchConfig(cancel=cancel))
    with pytest.raises(ValueError):
        SearchConfig(mode="eager")
    assert search_statistics(nested)["solved"]


def test_unnormalized_input_rejected():
    from cthd.samples import three_tasks

    with pytest.raises(ValueError):
        cpfd_solve(three_tasks(normalized=False))


def test_switch_on_empty_layer(concurrent):
    with pytest.raises(EmptyLayer):
        switch_layer(concurrent, SearchNode.initial(concurrent))


def test_unsolvable_returns_none():
    from cthd.grounding import load
    from cthd.normalize import normalize

    d = "(define (domain d) (:predicates (p)) (:task t :parameters ()) (:action a :parameters () :precondition (p)) (:method m :parameters () :task (t) :subtasks (a)))"
    q = "(define (problem q) (:domain d) (:init) (:htn :subtasks (t)))"
    p = normalize(load(d, q))
    for mode, objective in MODES:
        assert cpfd_solve(p, SearchConfig(mode=mode, objective=objective)) is None
