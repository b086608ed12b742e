from __future__ import annotations

import pytest

from cthd.encoding import EncodingConfig, encode
from cthd.errors import ResourceExhausted, UnknownAction
from cthd.generators import instances
from cthd.model import apply
from cthd.pddl import read_pddl, write_pddl
from cthd.strips import ClassicalProblem, execute, is_solution, make_action, read_plan, solve_bfs, solve_greedy, write_plan


def chain(n):
    acts = [make_action(i, f"s{i}", {i}, {i + 1}, {i}) for i in range(n)]
    return ClassicalProblem([f"p{i}" for i in range(n + 1)], acts, {0}, {n})


def test_bfs_shortest_and_trivial():
    assert solve_bfs(chain(4)) == [0, 1, 2, 3]
    assert solve_bfs(ClassicalProblem(["p"], [], {0}, {0})) == []
    assert solve_bfs(ClassicalProblem(["p", "q"], [make_action(0, "x", {1}, {0})], set(), {0})) is None


def test_greedy_and_budgets():
    assert is_solution(chain(5), solve_greedy(chain(5)))
    assert solve_greedy(ClassicalProblem(["p"], [], {0}, {0})) == []
    with pytest.raises(ResourceExhausted):
        solve_greedy(chain(3), node_limit=0)
    with pytest.raises(ResourceExhausted):
        solve_bfs(chain(30), node_limit=3)


def test_executor_agrees_with_model_apply():
    p = chain(3)
    s = p.init
    for a in [0, 1, 2]:
        s = apply(s, p.actions[a])
    assert execute(p, [0, 1, 2]) == s


def test_plan_io_round_trip(concurrent):
    enc = encode(concurrent, 4)
    plan = solve_bfs(enc.problem)
    text = "; produced elsewhere\n" + write_plan(plan, enc.problem).upper()
    assert read_plan(text, enc.problem) == plan
    with pytest.raises(UnknownAction):
        read_plan("(nope th0)", enc.problem)


@pytest.mark.parametrize("b", [3, 4, 5])
def test_conditional_and_compiled_switch_agree(b, concurrent, sequential):
    for p in (concurrent, sequential):
        adl = solve_bfs(encode(p, EncodingConfig(b)).problem)
        flat = solve_bfs(encode(p, EncodingConfig(b, conditional_effects=False)).problem)
        assert (adl is None) == (flat is None)
        if adl is not None:
            assert len(adl) == len(flat)


def test_pddl_round_trip(concurrent, nested):
    for p, b in ((concurrent, 4), (nested, 5)):
        for ce in (True, False):
            enc = encode(p, EncodingConfig(b, conditional_effects=ce))
            domain, problem = write_pddl(enc)
            assert ("(when" in domain) == ce
            back = read_pddl(domain, problem)
            assert back.canonical() == enc.problem.canonical()


def test_pddl_output_shape(sequential):
    domain, problem = write_pddl(encode(sequential, 4))
    assert "(:objects th0 th1 th2 th3 - taskholder)" in problem
    assert domain == write_pddl(encode(sequential, 4))[0]  # deterministic
    assert "(not_planned a2_a3)" in domain


def test_pddl_round_trip_random():
    for inst in instances(15, start=900):
        enc = encode(inst.problem, 3)
        assert read_pddl(*write_pddl(enc)).canonical() == enc.problem.canonical()
