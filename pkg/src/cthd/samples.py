"""Small hand-written HDDL problems used by tests, tutorials and the CLI docs.

``three_tasks(concurrent=False)``
    A root task split into three unordered primitive tasks ``a1 a2 a3``.
    ``a2`` needs ``p1`` (added by ``a1``) and ``p2``.  In the sequential
    variant ``a3`` deletes ``p2``, so the only plan is ``a1; a2; a3``.  In the
    concurrent variant ``a3`` merely requires ``p2`` and ``{a1, a3}; {a2}`` is
    a plan of makespan 2.

``nested()``
    Two levels of compound tasks with alternative methods and one ordering
    constraint between a primitive and a compound sibling.
"""

from __future__ import annotations

from .grounding import load
from .model import GroundHtnProblem
from .normalize import normalize

THREE_TASKS_DOMAIN = """\
(define (domain three_tasks)
  (:requirements :hierarchy)
  (:predicates (p1) (p2))
  (:task top :parameters ())
  (:method split
    :parameters ()
    :task (top)
    :subtasks (and (s1 (a1)) (s2 (a2)) (s3 (a3))))
  (:action a1 :parameters () :effect (p1))
  (:action a2 :parameters () :precondition (and (p1) (p2)))
  (:action a3 :parameters () :effect (not (p2))))
"""

THREE_TASKS_CONCURRENT_DOMAIN = THREE_TASKS_DOMAIN.replace(
    "(:action a3 :parameters () :effect (not (p2)))",
    "(:action a3 :parameters () :precondition (p2))",
)

THREE_TASKS_PROBLEM = """\
(define (problem three_tasks_{variant})
  (:domain three_tasks)
  (:init (p2))
  (:htn :subtasks (t0 (top))))
"""

NESTED_DOMAIN = """\
(define (domain nested)
  (:requirements :hierarchy :typing)
  (:types item)
  (:predicates (ready ?x - item) (done ?x - item))
  (:task top :parameters ())
  (:task first_half :parameters ())
  (:task second_half :parameters ())
  (:method m1
    :parameters ()
    :task (top)
    :subtasks (and (u1 (first_half)) (u2 (prepare x)) (u3 (second_half)))
    :ordering (< u2 u1))
  (:method m2 :parameters () :task (first_half) :subtasks (finish x))
  (:method m3 :parameters () :task (first_half) :subtasks (finish y))
  (:method m4
    :parameters ()
    :task (second_half)
    :ordered-subtasks (and (prepare y) (finish y)))
  (:action prepare
    :parameters (?x - item)
    :effect (ready ?x))
  (:action finish
    :parameters (?x - item)
    :precondition (ready ?x)
    :effect (done ?x)))
"""

NESTED_PROBLEM = """\
(define (problem nested_1)
  (:domain nested)
  (:objects x y - item)
  (:init)
  (:htn :subtasks (t0 (top))))
"""


def three_tasks_text(concurrent: bool = False) -> tuple[str, str]:
    domain = THREE_TASKS_CONCURRENT_DOMAIN if concurrent else THREE_TASKS_DOMAIN
    variant = "concurrent" if concurrent else "sequential"
    return domain, THREE_TASKS_PROBLEM.format(variant=variant)


def three_tasks(concurrent: bool = False, normalized: bool = True) -> GroundHtnProblem:
    problem = load(*three_tasks_text(concurrent))
    return normalize(problem) if normalized else problem


def nested(normalized: bool = True) -> GroundHtnProblem:
    problem = load(NESTED_DOMAIN, NESTED_PROBLEM)
    return normalize(problem) if normalized else problem
