from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cthd.errors import (
    ConflictingEffects,
    CyclicOrdering,
    Inapplicable,
    NotCompound,
    NotIndependent,
    NotPrimitive,
    NotTrailing,
    WrongTask,
)
from cthd.model import (
    ConditionalAction,
    ConditionalEffect,
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
    erase_dummies,
    independent,
    progress_action,
    progress_method,
    trace_layers,
)


def act(i, pre=(), add=(), delete=(), task=0, dummy=False):
    return GroundAction(i, f"a{i}", task, pre, add, delete, dummy)


def test_add_delete_clash_rejected():
    with pytest.raises(ConflictingEffects):
        act(0, add={1}, delete={1})


def test_independence_is_symmetric_and_checks_both_directions():
    a = act(0, pre={0}, add={1})
    b = act(1, delete={0})
    c = act(2, pre={3}, add={4})
    assert not independent(a, b) and not independent(b, a)
    assert independent(a, c) and independent(c, a)
    assert not independent(act(3, add={5}), act(4, delete={5}))


def test_dependent_set_contains_self_even_without_deletes():
    a = act(0, pre={1})
    assert dependent_set(a, [a, act(1)]) == {0}


def test_apply_checks_preconditions():
    assert apply(frozenset({0}), act(0, pre={0}, add={1}, delete={0})) == {1}
    with pytest.raises(Inapplicable):
        apply(frozenset(), act(0, pre={0}))


def test_apply_layer_rejects_interference_and_duplicates():
    a, b = act(0, add={1}), act(1, delete={1})
    with pytest.raises(NotIndependent):
        apply_layer(frozenset(), [a, b])
    with pytest.raises(NotIndependent):
        apply_layer(frozenset(), [a, a])
    with pytest.raises(Inapplicable):
        apply_layer(frozenset(), [act(2, pre={0})])


def test_conditional_effects_fire_on_condition():
    a = ConditionalAction(0, "c", effects=(ConditionalEffect({0}, {1}, {0}),))
    assert apply(frozenset({0}), a) == {1}
    assert apply(frozenset({2}), a) == {2}


literal_sets = st.frozensets(st.integers(0, 4), max_size=3)


@st.composite
def actions(draw, n):
    out = []
    for i in range(n):
        add = draw(literal_sets)
        out.append(act(i, draw(literal_sets), add, draw(literal_sets) - add))
    return out


@given(actions(4), st.frozensets(st.integers(0, 4)))
def test_independent_layers_commute(acts, state):
    layer = [a for a in acts if a.pre <= state]
    layer = [a for i, a in enumerate(layer) if all(independent(a, b) for b in layer[:i])]
    layer = [a for a in layer if all(independent(a, b) for b in layer if b is not a)]
    expected = apply_layer(state, layer)
    for perm in itertools.permutations(layer):
        s = state
        for a in perm:
            s = apply(s, a)
        assert s == expected


def test_network_create_rejects_cycles_and_unknown_nodes():
    with pytest.raises(CyclicOrdering) as info:
        TaskNetwork.create({0: 0, 1: 0}, {(0, 1), (1, 0)})
    assert info.value.witness[0] == info.value.witness[-1]
    with pytest.raises(KeyError):
        TaskNetwork.create({0: 0}, {(0, 5)})


def test_network_queries():
    net = TaskNetwork.create({0: 0, 1: 1, 2: 2}, {(0, 1), (1, 2)})
    assert net.trailing() == {0}
    assert net.last_nodes() == {2}
    assert net.precedes(0, 2) and not net.precedes(2, 0)
    assert (0, 2) in net.closure()
    assert net.remove([0]).trailing() == {1}


def test_decompose_children_inherit_successors():
    net = TaskNetwork.create({0: 0, 1: 1}, {(0, 1)})
    sub = TaskNetwork.create({0: 2, 1: 3}, {(0, 1)})
    new, mapping = net.decompose(0, sub)
    assert set(new.alpha) == {1, 2, 3} and mapping == {0: 2, 1: 3}
    assert {(2, 3), (2, 1), (3, 1)} <= new.edges
    assert new.trailing() == {2}


def small_problem():
    tasks = [Task(0, "top", False), Task(1, "t1", True), Task(2, "t2", True)]
    actions = [GroundAction(0, "a1", 1, (), {0}), GroundAction(1, "a2", 2, {0})]
    methods = [Method(0, "m", 0, TaskNetwork.create({0: 1, 1: 2}, {(0, 1)}))]
    return GroundHtnProblem(["p"], tasks, actions, methods, (), TaskNetwork({0: 0}), "small")


def test_progression_errors():
    p = small_problem()
    with pytest.raises(NotPrimitive):
        progress_action(p, 0, p.actions[0])
    with pytest.raises(NotTrailing):
        progress_action(p, 9, p.actions[0])
    q = progress_method(p, 0, p.methods[0])
    with pytest.raises(NotCompound):
        progress_method(q, 1, p.methods[0])
    with pytest.raises(WrongTask):
        progress_action(q, 1, p.actions[1])
    with pytest.raises(NotTrailing):
        progress_action(q, 2, p.actions[1])
    r = progress_action(q, 1, p.actions[0])
    assert r.init == {0} and r.network.trailing() == {2}


def test_problem_validation():
    p = small_problem()
    with pytest.raises(ValueError):
        p.evolve(actions=[GroundAction(0, "bad", 0)])  # compound task
    with pytest.raises(ValueError):
        p.evolve(init=frozenset({7}))
    assert p.action("a2").id == 1 and p.method("m").id == 0


def test_trace_helpers_and_plan_key():
    p = small_problem().evolve(actions=[
        GroundAction(0, "a1", 1, (), {0}), GroundAction(1, "a2", 2, {0}, dummy=True),
    ])
    trace = [TraceStep("method", 0, 0, (1, 2)), TraceStep("action", 1, 0), TraceStep("switch"),
             TraceStep("action", 2, 1), TraceStep("switch")]
    assert trace_layers(trace) == [[0], [1]]
    assert erase_dummies(p, [[0], [1]]) == [[0]]
    plan = LayeredPlan.from_trace(p, trace)
    assert plan.layers == ((0,),) and plan.makespan == 1
    assert TraceStep.from_dict(trace[0].as_dict()) == trace[0]
