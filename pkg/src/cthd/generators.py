"""Random small recursion-free HTN instances, emitted as HDDL text.

Instances go through the regular reader and grounder, so property tests
exercise the whole front end too.  Compound task ``c{i}`` only decomposes into
compound tasks with a larger index, which rules out recursion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

from .grounding import load
from .model import GroundHtnProblem
from .normalize import normalize


@dataclass(frozen=True)
class GeneratedInstance:
    seed: int
    domain: str
    problem_text: str
    ordered: bool

    @cached_property
    def raw(self) -> GroundHtnProblem:
        return load(self.domain, self.problem_text)

    @cached_property
    def problem(self) -> GroundHtnProblem:
        return normalize(self.raw)


def _conj(parts: list) -> str:
    if not parts:
        return "()"
    return parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"


def _subtask_block(labels_tasks: list, edges: list, ordered: bool) -> str:
    items = [f"({lab} ({task}))" for lab, task in labels_tasks]
    body = _conj(items)
    if ordered:
        return f"    :ordered-subtasks {body}"
    text = f"    :subtasks {body}"
    if edges:
        text += f"\n    :ordering {_conj([f'(< {a} {b})' for a, b in edges])}"
    return text


def _random_order(rng: random.Random, n: int, density: float) -> list:
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]


def random_instance(
    seed: int,
    max_props: int = 6,
    max_actions: int = 6,
    max_methods: int = 4,
    max_subtasks: int = 3,
    ordered: bool = False,
) -> GeneratedInstance:
    rng = random.Random(seed)
    n_props = rng.randint(1, max_props)
    n_actions = rng.randint(1, max_actions)
    n_methods = rng.randint(1, max_methods)
    n_compound = rng.randint(1, n_methods)
    props = [f"p{i}" for i in range(n_props)]

    actions = []
    for i in range(n_actions):
        pre = [p for p in props if rng.random() < 0.25]
        add = [p for p in props if rng.random() < 0.3]
        delete = [p for p in props if p not in add and rng.random() < 0.2]
        effect = [f"({p})" for p in add] + [f"(not ({p}))" for p in delete]
        actions.append(
            f"  (:action a{i}\n    :parameters ()\n"
            f"    :precondition {_conj([f'({p})' for p in pre])}\n"
            f"    :effect {_conj(effect)})"
        )

    # every compound task gets one method, the rest are spread at random
    heads = list(range(n_compound)) + [rng.randrange(n_compound) for _ in range(n_methods - n_compound)]
    methods = []
    for mi, head in enumerate(heads):
        k = rng.randint(1, max_subtasks)
        subs = []
        for s in range(k):
            deeper = list(range(head + 1, n_compound))
            if deeper and rng.random() < 0.35:
                subs.append((f"s{s}", f"c{rng.choice(deeper)}"))
            else:
                subs.append((f"s{s}", f"a{rng.randrange(n_actions)}"))
        edges = [(f"s{i}", f"s{j}") for i, j in _random_order(rng, k, 0.4)]
        methods.append(
            f"  (:method m{mi}\n    :parameters ()\n    :task (c{head})\n"
            + _subtask_block(subs, edges, ordered)
            + ")"
        )

    tasks = [f"  (:task c{i} :parameters ())" for i in range(n_compound)]
    predicates = " ".join(f"({p})" for p in props)
    domain = "\n".join(
        [
            f"(define (domain rnd{seed})",
            "  (:requirements :hierarchy)",
            f"  (:predicates {predicates})",
            *tasks,
            *methods,
            *actions,
            ")",
            "",
        ]
    )

    roots = [("r0", "c0")]
    if rng.random() < 0.3:
        roots.append(("r1", f"a{rng.randrange(n_actions)}"))
    root_edges = [("r0", "r1")] if len(roots) == 2 and (ordered or rng.random() < 0.5) else []
    htn = _subtask_block(roots, root_edges, ordered).replace("\n    ", "\n    ")
    init = " ".join(f"({p})" for p in props if rng.random() < 0.5)
    problem = "\n".join(
        [
            f"(define (problem rnd{seed}_p)",
            f"  (:domain rnd{seed})",
            f"  (:init {init})",
            f"  (:htn\n{htn})",
            ")",
            "",
        ]
    )
    return GeneratedInstance(seed, domain, problem, ordered)


def instances(count: int, start: int = 0, **kwargs) -> list:
    return [random_instance(seed, **kwargs) for seed in range(start, start + count)]
