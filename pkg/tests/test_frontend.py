from __future__ import annotations

import pytest

from cthd.errors import HddlSyntaxError, OrderingCycle, ResolutionError, UnsupportedFeature
from cthd.grounding import load
from cthd.hddl import And, Atom, ForAll, Not, When, parse_domain, parse_formula, parse_problem, parse_sexpr
from cthd.normalize import ROOT_TASK, is_normalized, normalize
from cthd.samples import NESTED_DOMAIN, NESTED_PROBLEM, three_tasks_text

DOMAIN = """
(define (domain d)
  (:types item)
  (:predicates (at ?x - item) (link ?x ?y - item))
  (:task go :parameters (?x - item))
  (:method via :parameters (?x ?y - item) :task (go ?y)
    :precondition (link ?x ?y)
    :ordered-subtasks (and (step ?x ?y)))
  (:action step :parameters (?x ?y - item)
    :precondition (and (at ?x) (link ?x ?y))
    :effect (and (at ?y) (not (at ?x)))))
"""

PROBLEM = """
(define (problem p) (:domain d)
  (:objects a b c - item)
  (:init (at a) (link a b))
  (:htn :subtasks (t (go b))))
"""


def test_sexpr_reports_positions():
    with pytest.raises(HddlSyntaxError) as info:
        parse_sexpr("(define\n  (domain x)")
    assert "line" in str(info.value)
    with pytest.raises(HddlSyntaxError):
        parse_sexpr("(a))")


def test_formula_forms():
    f = parse_formula(parse_sexpr("(and (p ?x) (not (q)) (forall (?h - t) (when (r ?h) (s ?h))))"))
    assert isinstance(f, And) and f.parts[0] == Atom("p", ("?x",))
    assert isinstance(f.parts[1], Not) and isinstance(f.parts[2], ForAll)
    assert isinstance(f.parts[2].body, When)
    for bad in ("(or (p) (q))", "(exists (?x) (p ?x))", "(increase (c) 1)"):
        with pytest.raises(UnsupportedFeature):
            parse_formula(parse_sexpr(bad))


def test_unsupported_sections():
    with pytest.raises(UnsupportedFeature):
        parse_domain("(define (domain d) (:functions (f)))")
    with pytest.raises(UnsupportedFeature):
        parse_domain("(define (domain d) (:types a - (either b c)))")
    with pytest.raises(UnsupportedFeature):
        parse_problem("(define (problem p) (:domain d) (:metric minimize (x)))")


def test_ordering_cycle_has_witness():
    text = """(define (domain d) (:task t :parameters ()) (:action a :parameters ())
      (:method m :parameters () :task (t) :subtasks (and (x (a)) (y (a)))
        :ordering (and (< x y) (< y x))))"""
    with pytest.raises(OrderingCycle) as info:
        parse_domain(text)
    assert info.value.witness[0] == info.value.witness[-1]


def test_undeclared_references():
    with pytest.raises(ResolutionError):
        parse_domain("(define (domain d) (:task t :parameters ()) (:method m :parameters () :task (t) :subtasks (zz)))")
    with pytest.raises(ResolutionError):
        load(DOMAIN, PROBLEM.replace("(at a)", "(at q)"))


def test_grounding_uses_static_facts_and_prunes():
    p = load(DOMAIN, PROBLEM)
    assert [a.name for a in p.actions] == ["step(a,b)"]
    assert [m.name for m in p.methods] == ["via(a,b)"]
    assert p.propositions == ("at(a)", "at(b)")  # static link() facts are compiled away
    assert p.state_names(p.init) == {"at(a)"}


def test_grounding_rejects_state_goals_and_negative_fluent_preconditions():
    with pytest.raises(UnsupportedFeature):
        load(DOMAIN, PROBLEM.replace("(:htn", "(:goal (at b)) (:htn"))
    with pytest.raises(UnsupportedFeature):
        load(DOMAIN.replace("(and (at ?x) (link ?x ?y))", "(and (not (at ?y)) (link ?x ?y))"), PROBLEM)


def test_primitive_root_task():
    text = three_tasks_text()[1].replace("(t0 (top))", "(t0 (a1))")
    p = load(three_tasks_text()[0], text)
    assert p.tasks[p.network.alpha[0]].primitive


def test_normalize_adds_noop_and_root():
    d, q = three_tasks_text()
    raw = load(d, q)
    assert not is_normalized(raw)
    p = normalize(raw)
    assert is_normalized(p) and normalize(p) is p
    noop = [a for a in p.actions if a.dummy]
    assert len(noop) == 1 and noop[0].name.startswith("__noop_")
    two_roots = load(d, q.replace("(t0 (top))", "(and (t0 (top)) (t1 (a1)))"))
    q2 = normalize(two_roots)
    assert q2.tasks[q2.network.alpha[0]].name == ROOT_TASK


def test_method_preconditions_become_dummy_actions():
    p = normalize(load(DOMAIN, PROBLEM.replace("(link a b)", "(link a b) (at b)")))
    assert all(not m.pre for m in p.methods)
    p = normalize(load(DOMAIN.replace(":precondition (link ?x ?y)", ":precondition (at ?x)"), PROBLEM))
    checks = [a for a in p.actions if a.name.startswith("__pre_")]
    assert checks and checks[0].dummy and checks[0].pre


def test_nested_sample_loads():
    p = normalize(load(NESTED_DOMAIN, NESTED_PROBLEM))
    assert {t.name for t in p.tasks} >= {"top", "first_half", "second_half", "prepare(x)", "finish(y)"}
