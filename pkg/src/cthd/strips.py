"""Classical (STRIPS + conditional effects) problems and two small solvers.

States are Python ints used as bit sets over proposition ids, which keeps
duplicate detection exact and cheap.  The solvers are meant for desk-scale
encodings; plans produced by external planners can be read with
:func:`read_plan`.
"""

from __future__ import annotations

import heapq
import re
import time
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import Inapplicable, ResourceExhausted, UnknownAction
from .model import ConditionalAction


@dataclass(frozen=True, eq=False)
class ClassicalProblem:
    propositions: tuple
    actions: tuple
    init: frozenset
    goal: frozenset
    name: str = "problem"

    def __post_init__(self):
        object.__setattr__(self, "propositions", tuple(self.propositions))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "init", frozenset(self.init))
        object.__setattr__(self, "goal", frozenset(self.goal))
        n = len(self.propositions)
        if any(not 0 <= g < n for g in self.goal):
            raise ValueError("goal references an unknown proposition")
        for i, a in enumerate(self.actions):
            if a.id != i:
                raise ValueError("action ids must be contiguous from 0")

    @cached_property
    def proposition_ids(self) -> dict:
        return {p: i for i, p in enumerate(self.propositions)}

    @cached_property
    def action_ids(self) -> dict:
        return {a.name: a.id for a in self.actions}

    def canonical(self):
        """Name-based form, independent of id order, over referenced propositions only."""
        names = self.propositions

        def n(ids):
            return frozenset(names[i] for i in ids)

        actions = frozenset(
            (
                a.name,
                n(a.pre),
                n(a.add),
                n(a.delete),
                frozenset((n(e.condition), n(e.add), n(e.delete)) for e in a.effects),
            )
            for a in self.actions
        )
        return n(self.init), n(self.goal), actions


class _Compiled:
    """Bit-mask view of a problem with an index from trigger propositions to actions."""

    def __init__(self, problem: ClassicalProblem):
        def mask(ids) -> int:
            m = 0
            for i in ids:
                m |= 1 << i
            return m

        self.problem = problem
        self.pre = [mask(a.pre) for a in problem.actions]
        self.add = [mask(a.add) for a in problem.actions]
        self.delete = [mask(a.delete) for a in problem.actions]
        self.effects = [
            [(mask(e.condition), mask(e.add), mask(e.delete)) for e in a.effects] for a in problem.actions
        ]
        self.init = mask(problem.init)
        self.goal = mask(problem.goal)
        freq: dict[int, int] = {}
        for a in problem.actions:
            for p in a.pre:
                freq[p] = freq.get(p, 0) + 1
        self.always = []
        self.by_trigger: dict[int, list] = {}
        for a in problem.actions:
            if not a.pre:
                self.always.append(a.id)
            else:
                # a rarely required precondition filters candidates best
                trigger = min(a.pre, key=lambda p: (freq[p], p))
                self.by_trigger.setdefault(trigger, []).append(a.id)
        self.trigger_mask = mask(self.by_trigger)
        self.triggers = sorted(self.by_trigger)

    def successors(self, state: int):
        candidates = list(self.always)
        hits = state & self.trigger_mask
        while hits:
            low = hits & -hits
            candidates.extend(self.by_trigger[low.bit_length() - 1])
            hits ^= low
        candidates.sort()
        for a in candidates:
            pre = self.pre[a]
            if state & pre == pre:
                yield a, self.apply(state, a)

    def apply(self, state: int, a: int) -> int:
        add, delete = self.add[a], self.delete[a]
        for cond, c_add, c_del in self.effects[a]:
            if state & cond == cond:
                add |= c_add
                delete |= c_del
        return (state & ~delete) | add


def _to_set(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def execute(problem: ClassicalProblem, plan: Iterable[int]) -> frozenset:
    """Replay a plan from the initial state and return the final state."""
    comp = _Compiled(problem)
    state = comp.init
    for step, a in enumerate(plan):
        if not 0 <= a < len(problem.actions):
            raise UnknownAction(f"step {step}: no action with id {a}")
        if state & comp.pre[a] != comp.pre[a]:
            raise Inapplicable(f"step {step}: {problem.actions[a].name} is not applicable")
        state = comp.apply(state, a)
    return _to_set(state)


def is_solution(problem: ClassicalProblem, plan: Iterable[int]) -> bool:
    try:
        return problem.goal <= execute(problem, plan)
    except (Inapplicable, UnknownAction):
        return False


class _Budget:
    def __init__(self, node_limit, time_limit):
        self.node_limit = node_limit
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self.count = 0

    def tick(self):
        self.count += 1
        if self.node_limit is not None and self.count > self.node_limit:
            raise ResourceExhausted(f"node budget of {self.node_limit} exhausted")
        if self.deadline is not None and self.count % 256 == 0 and time.monotonic() > self.deadline:
            raise ResourceExhausted("time limit exceeded")


def _extract(parents: dict, state: int) -> list:
    plan = []
    while parents[state] is not None:
        state, a = parents[state]
        plan.append(a)
    plan.reverse()
    return plan


def solve_bfs(problem: ClassicalProblem, node_limit: int | None = None, time_limit: float | None = None) -> list | None:
    """Shortest plan (in number of actions) or ``None`` when the goal is unreachable."""
    comp = _Compiled(problem)
    budget = _Budget(node_limit, time_limit)
    goal = comp.goal
    if comp.init & goal == goal:
        return []
    if node_limit is not None and node_limit <= 0:
        raise ResourceExhausted("node budget of 0")
    parents = {comp.init: None}
    queue = deque([comp.init])
    while queue:
        state = queue.popleft()
        budget.tick()
        for a, nxt in comp.successors(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, a)
            if nxt & goal == goal:
                return _extract(parents, nxt)
            queue.append(nxt)
    return None


def solve_greedy(
    problem: ClassicalProblem,
    node_limit: int | None = None,
    time_limit: float | None = None,
    deferred: Iterable[int] = (),
) -> list | None:
    """Greedy best-first search on the number of unsatisfied goals.

    Ties prefer actions outside ``deferred`` (e.g. layer switches).  Not
    optimal; the plan is checked by replay before being returned.
    """
    comp = _Compiled(problem)
    budget = _Budget(node_limit, time_limit)
    goal = comp.goal
    if comp.init & goal == goal:
        return []
    if node_limit is not None and node_limit <= 0:
        raise ResourceExhausted("node budget of 0")
    deferred = frozenset(deferred)

    def h(state: int) -> int:
        return bin(goal & ~state).count("1")

    parents = {comp.init: None}
    counter = 0
    heap = [(h(comp.init), 0, counter, comp.init)]
    while heap:
        _, _, _, state = heapq.heappop(heap)
        budget.tick()
        for a, nxt in comp.successors(state):
            if nxt in parents:
                continue
            parents[nxt] = (state, a)
            if nxt & goal == goal:
                plan = _extract(parents, nxt)
                if not is_solution(problem, plan):
                    raise AssertionError("greedy search produced an invalid plan")
                return plan
            counter += 1
            heapq.heappush(heap, (h(nxt), a in deferred, counter, nxt))
    return None


_PLAN_LINE = re.compile(r"^\(?\s*([^()\s]+)((?:\s+[^()\s]+)*)\s*\)?$")


def read_plan(text: str, problem: ClassicalProblem) -> list:
    """Parse one ``(action arg ...)`` per line; ``;`` starts a comment."""
    plan = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = _PLAN_LINE.match(line)
        if not m:
            raise UnknownAction(f"line {lineno}: cannot parse {raw!r}")
        name, args = m.group(1).lower(), m.group(2).split()
        full = f"{name}({','.join(a.lower() for a in args)})" if args else name
        if full not in problem.action_ids:
            raise UnknownAction(f"line {lineno}: unknown action {full}")
        plan.append(problem.action_ids[full])
    return plan


def write_plan(plan: Iterable[int], problem: ClassicalProblem) -> str:
    lines = []
    for a in plan:
        name = problem.actions[a].name
        if "(" in name:
            head, args = name[:-1].split("(", 1)
            lines.append(f"({head} {' '.join(args.split(','))})")
        else:
            lines.append(f"({name})")
    return "\n".join(lines) + ("\n" if lines else "")


def make_action(idx: int, name: str, pre=(), add=(), delete=(), effects=()) -> ConditionalAction:
    return ConditionalAction(idx, name, frozenset(pre), frozenset(add), frozenset(delete), tuple(effects))
