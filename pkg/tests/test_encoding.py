from __future__ import annotations

import math
import random
import re

import pytest

from cthd.encoding import (
    CthdEncoder,
    EncodingConfig,
    crescent_assignments,
    crescent_count,
    encode,
    encode_propositions,
    unordered_count,
)
from cthd.errors import CompileThresholdExceeded, NonCrescentAssignment, NotEnoughHolders
from cthd.model import GroundAction, GroundHtnProblem, Method, Task, TaskNetwork, apply


def one_action_problem():
    tasks = [Task(0, "t", True)]
    actions = [GroundAction(0, "a", 0, (), {0})]
    return GroundHtnProblem(["p"], tasks, actions, [], (), TaskNetwork({0: 0}), "one")


def test_proposition_counts():
    props = encode_propositions(one_action_problem(), 2)
    # 1 fact + nc 4 + prec_th 4 + empty 2 + resolved 2 + in 2 + not_planned 1
    assert len(props) == 1 + 15


def test_in_propositions_for_three_tasks(sequential):
    props = encode_propositions(sequential, 4)
    assert len([p for p in props if p.startswith("in(")]) == len(sequential.tasks) * 4 == 20


def test_bound_must_be_positive(sequential):
    with pytest.raises(ValueError):
        encode(sequential, 0)
    with pytest.raises(ValueError):
        EncodingConfig(2, deepening=(3, 2))


def test_crescent_example_single_assignment():
    # b = 4, decomposed task fixed in the first holder, three new holders
    fixed = [h for h in crescent_assignments(4, 4) if h[0] == 0]
    assert fixed == [(0, 1, 2, 3)]
    assert math.perm(3, 3) == 6


@pytest.mark.parametrize("seed", range(20))
def test_crescent_law_random(seed):
    rng = random.Random(seed)
    b, k = rng.randint(1, 8), rng.randint(1, 5)
    listed = list(crescent_assignments(k, b))
    assert len(listed) == crescent_count(k, b)
    assert len(set(listed)) == len(listed)
    if k <= b:
        assert unordered_count(k, b) == crescent_count(k, b) * math.factorial(k - 1)


def test_method_assignment_errors(sequential):
    enc = CthdEncoder(sequential, 4)
    m = sequential.methods[0]
    with pytest.raises(NonCrescentAssignment):
        enc.encode_method(m, (0, 3, 2, 1))
    with pytest.raises(NonCrescentAssignment):
        enc.encode_method(m, (1, 1, 2, 3))
    with pytest.raises(NotEnoughHolders):
        CthdEncoder(sequential, 2).encode_method(m, (0, 1))


def test_method_action_moves_subtasks(sequential):
    enc = CthdEncoder(sequential, 4)
    pre, add, delete = enc.method_parts(sequential.methods[0], (0, 1, 2, 3))
    assert "in(t0_top,th0)" in pre and "empty(th1)" in pre and "prec_th(th1,th2)" in pre
    assert "in(t4_noop_split,th0)" in add and "in(t1_a1,th1)" in add
    assert {"not_constraint(th1,th0)", "empty(th2)", "in(t0_top,th0)"} <= delete


def test_primitive_action_guards(sequential):
    enc = CthdEncoder(sequential, 4)
    a2 = sequential.action("a2")
    pre, add, delete = enc.primitive_parts(a2, 2)
    assert {"not_planned(a1_a2)", "not_planned(a2_a3)"} <= pre
    assert "resolved(th2)" in add and "not_planned(a1_a2)" in delete


def test_switch_semantics(sequential):
    enc = encode(sequential, 3)
    cp = enc.problem
    (sw,) = [cp.actions[i] for i in enc.switch_ids()]
    pid = cp.proposition_ids
    state = frozenset({pid["resolved(th1)"]})
    after = apply(state, sw)
    assert pid["empty(th1)"] in after and pid["resolved(th1)"] not in after
    assert pid["not_constraint(th1,th2)"] in after
    # nothing resolved: only the layer bookkeeping is reset
    assert {cp.propositions[i] for i in apply(frozenset(), sw)} == {
        f"not_planned({n})" for n in ("a0_a1", "a1_a2", "a2_a3", "a3_noop_split")
    }


def test_compiled_switch(sequential):
    enc = encode(sequential, EncodingConfig(3, conditional_effects=False))
    assert len(enc.switch_ids()) == 2 ** 3
    assert all(not a.effects for a in enc.problem.actions)
    with pytest.raises(CompileThresholdExceeded):
        encode(sequential, EncodingConfig(4, conditional_effects=False, compile_threshold=3))


def test_operator_count_matches_enumeration(nested):
    b = 5
    enc = encode(nested, b)
    expected_methods = sum(crescent_count(len(m.network), b) for m in nested.methods)
    assert enc.stats["method_operators"] == expected_methods
    assert enc.stats["operators"] == len(enc.problem.actions) == len(enc.origin)
    assert enc.stats["primitive_operators"] == b * len(nested.actions)


def test_initial_state_and_goal(sequential):
    enc = encode(sequential, 3)
    cp = enc.problem
    init = {cp.propositions[i] for i in cp.init}
    assert "in(t0_top,th0)" in init and "empty(th0)" not in init
    assert "prec_th(th0,th1)" in init and "prec_th(th1,th0)" not in init
    assert "not_constraint(th2,th2)" in init
    assert {cp.propositions[i] for i in cp.goal} == {"empty(th0)", "empty(th1)", "empty(th2)"}


def test_statically_inapplicable_primitives_skipped():
    tasks = [Task(0, "t", True)]
    actions = [GroundAction(0, "a", 0, {0})]  # needs p, which nothing adds and init lacks
    p = GroundHtnProblem(["p"], tasks, actions, [], (), TaskNetwork({0: 0}), "dead")
    assert encode(p, 2).stats["primitive_operators"] == 0


def test_names_are_pddl_safe(nested):
    enc = encode(nested, 4)
    for a in enc.problem.actions:
        assert re.fullmatch(r"[a-z0-9_]+(\([a-z0-9_,]*\))?", a.name)
