"""Compile a normalized HTN problem into a classical problem over taskholders.

A task network is stored in ``b`` taskholders ``th0 .. th{b-1}``.  Three
action families drive the progression:

* ``m*``  decompose the compound task of a holder with a method, moving the
  method's subtasks into empty holders taken in increasing stack order (the
  last subtask stays in the decomposed task's holder);
* ``p*``  resolve the primitive task of an unconstrained holder, adding the
  action to the current layer;
* ``switch`` close the current layer, freeing resolved holders and the
  ordering constraints they imposed.

``not_constraint(i, j)`` is *false* when the task in ``th_i`` must be
resolved before the one in ``th_j``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .errors import CompileThresholdExceeded, NonCrescentAssignment, NotEnoughHolders
from .grounding import fact_name
from .model import ConditionalAction, ConditionalEffect, GroundAction, GroundHtnProblem, Method
from .normalize import is_normalized
from .strips import ClassicalProblem

DEFAULT_COMPILE_THRESHOLD = 8


def slug(name: str) -> str:
    s = re.sub(r"[^a-z0-9_]+", "_", name.lower()).strip("_")
    return s or "x"


def holder(i: int) -> str:
    return f"th{i}"


def task_symbol(problem: GroundHtnProblem, task: int) -> str:
    return f"t{task}_{slug(problem.tasks[task].name)}"


def action_symbol(problem: GroundHtnProblem, action: int) -> str:
    return f"a{action}_{slug(problem.actions[action].name)}"


def fact_symbol(problem: GroundHtnProblem, prop: int) -> str:
    return f"f{prop}_{slug(problem.propositions[prop])}"


def method_schema(problem: GroundHtnProblem, method: int) -> str:
    return f"m{method}_{slug(problem.methods[method].name)}"


def primitive_schema(problem: GroundHtnProblem, action: int) -> str:
    return f"p{action}_{slug(problem.actions[action].name)}"


def nc(i: int, j: int) -> str:
    return fact_name("not_constraint", (holder(i), holder(j)))


def prec_th(i: int, j: int) -> str:
    return fact_name("prec_th", (holder(i), holder(j)))


def empty(i: int) -> str:
    return fact_name("empty", (holder(i),))


def resolved(i: int) -> str:
    return fact_name("resolved", (holder(i),))


@dataclass(frozen=True)
class EncodingConfig:
    bound: int
    conditional_effects: bool = True
    compile_threshold: int = DEFAULT_COMPILE_THRESHOLD
    deepening: tuple | None = None

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("the taskholder bound must be at least 1")
        if self.deepening is not None:
            lo, hi = self.deepening
            if lo < 1 or lo > hi:
                raise ValueError("deepening range must satisfy 1 <= min <= max")


@dataclass(frozen=True)
class ActionOrigin:
    kind: str  # "method" | "primitive" | "switch"
    source: int | None
    holders: tuple = ()


@dataclass(frozen=True, eq=False)
class CthdEncoding:
    problem: ClassicalProblem
    bound: int
    origin: tuple
    source: GroundHtnProblem
    config: EncodingConfig = field(repr=False, default=None)

    @property
    def stats(self) -> dict:
        kinds = {"method": 0, "primitive": 0, "switch": 0}
        for o in self.origin:
            kinds[o.kind] += 1
        return {
            "propositions": len(self.problem.propositions),
            "operators": len(self.problem.actions),
            "bound": self.bound,
            "method_operators": kinds["method"],
            "primitive_operators": kinds["primitive"],
            "switch_operators": kinds["switch"],
        }

    def switch_ids(self) -> list:
        return [i for i, o in enumerate(self.origin) if o.kind == "switch"]


# counting ---------------------------------------------------------------------

def crescent_assignments(k: int, b: int) -> Iterator[tuple]:
    """Holder tuples ``(h1, h2, .., hk)`` for a method with ``k`` subtasks.

    ``h1`` is any holder; ``h2 < .. < hk`` are taken from the other holders.
    """
    for h1 in range(b):
        others = [h for h in range(b) if h != h1]
        for rest in combinations(others, k - 1):
            yield (h1, *rest)


def crescent_count(k: int, b: int) -> int:
    return b * math.comb(b - 1, k - 1) if 1 <= k <= b else 0


def unordered_count(k: int, b: int) -> int:
    """Assignment count when the new holders are not ordered (k-permutations)."""
    return b * math.perm(b - 1, k - 1) if 1 <= k <= b else 0


# encoder -------------------------------------------------------------------------

class CthdEncoder:
    def __init__(self, problem: GroundHtnProblem, bound: int):
        if not is_normalized(problem):
            raise ValueError("the encoder expects a normalized problem (see cthd.normalize)")
        if bound < 1:
            raise ValueError("the taskholder bound must be at least 1")
        self.source = problem
        self.b = bound
        self.propositions = self._propositions()
        self.ids = {p: i for i, p in enumerate(self.propositions)}
        self.live = self._live_actions()

    # propositions -------------------------------------------------------------

    def _propositions(self) -> list:
        p, b = self.source, self.b
        props = [fact_symbol(p, i) for i in range(len(p.propositions))]
        props += [nc(i, j) for i in range(b) for j in range(b)]
        props += [prec_th(i, j) for i in range(b) for j in range(b)]
        props += [empty(i) for i in range(b)]
        props += [resolved(i) for i in range(b)]
        props += [self.in_(t, h) for t in range(len(p.tasks)) for h in range(b)]
        props += [self.not_planned(a) for a in range(len(p.actions))]
        return props

    def in_(self, task: int, h: int) -> str:
        return fact_name("in", (task_symbol(self.source, task), holder(h)))

    def not_planned(self, action: int) -> str:
        return fact_name("not_planned", (action_symbol(self.source, action),))

    def _ids(self, names) -> frozenset:
        return frozenset(self.ids[n] for n in names)

    # action families -------------------------------------------------------

    def method_parts(self, m: Method, holders: tuple) -> tuple:
        b, net = self.b, m.network
        last = m.last_node
        others = sorted(n for n in net.alpha if n != last)
        k = len(net)
        if k > b:
            raise NotEnoughHolders(f"{m.name} needs {k} holders, only {b} exist")
        if len(holders) != k:
            raise NonCrescentAssignment(f"{m.name} needs {k} holders, got {len(holders)}")
        h1, new = holders[0], list(holders[1:])
        if not all(0 <= h < b for h in holders):
            raise NonCrescentAssignment(f"holder out of range in {holders}")
        if h1 in new or any(x >= y for x, y in zip(new, new[1:])):
            raise NonCrescentAssignment(f"new holders {new} must increase and avoid {h1}")
        where = {last: h1, **{n: h for n, h in zip(others, new)}}
        head = self.in_(m.task, h1)
        pre = {head} | {nc(i, h1) for i in range(b)}
        pre |= {prec_th(x, y) for x, y in zip(new, new[1:])}
        pre |= {empty(h) for h in new}
        add = {self.in_(net.alpha[n], where[n]) for n in net.alpha}
        delete = {empty(h) for h in new}
        delete |= {nc(where[u], where[v]) for u, v in net.edges}
        delete |= {nc(h, h1) for h in new}
        delete.add(head)
        return pre, add, delete - add

    def encode_method(self, m: Method, holders: tuple, idx: int = 0) -> ConditionalAction:
        pre, add, delete = self.method_parts(m, holders)
        name = fact_name(method_schema(self.source, m.id), tuple(holder(h) for h in holders))
        return ConditionalAction(idx, name, self._ids(pre), self._ids(add), self._ids(delete))

    def guards(self, a: GroundAction) -> frozenset:
        """Actions that must not already be in the layer when ``a`` joins it.

        Dependent actions, plus actions whose effects could supply one of
        ``a``'s preconditions (effects apply immediately in the classical
        plan, while a layer's preconditions must hold before the layer).
        """
        enablers = {b.id for b in self.source.actions if b.add & a.pre}
        return self.source.dependents[a.id] | enablers

    def _live_actions(self) -> frozenset:
        """Actions whose preconditions can ever hold.

        Fixpoint: a fact is available if it is initially true or touched by
        a live action.  Dropping the others keeps the encoding identical to
        what a PDDL grounder derives from the written domain.
        """
        live = {a.id for a in self.source.actions}
        while True:
            touched = set(self.source.init)
            for i in live:
                a = self.source.actions[i]
                touched |= a.add | a.delete
            keep = {i for i in live if self.source.actions[i].pre <= touched}
            if keep == live:
                return frozenset(live)
            live = keep

    def statically_inapplicable(self, a: GroundAction) -> bool:
        return a.id not in self.live

    def primitive_parts(self, a: GroundAction, h: int) -> tuple:
        b = self.b
        pre = {fact_symbol(self.source, p) for p in a.pre}
        pre.add(self.in_(a.task, h))
        pre |= {nc(i, h) for i in range(b)}
        pre |= {self.not_planned(x) for x in self.guards(a)}
        add = {fact_symbol(self.source, p) for p in a.add} | {resolved(h)}
        delete = {fact_symbol(self.source, p) for p in a.delete}
        delete |= {self.not_planned(a.id), self.in_(a.task, h)}
        return pre, add, delete

    def encode_primitive(self, a: GroundAction, h: int, idx: int = 0) -> ConditionalAction:
        pre, add, delete = self.primitive_parts(a, h)
        name = fact_name(primitive_schema(self.source, a.id), (holder(h),))
        return ConditionalAction(idx, name, self._ids(pre), self._ids(add), self._ids(delete))

    def release(self, h: int) -> tuple:
        """Effect of freeing a resolved holder at a layer switch."""
        return {nc(h, i) for i in range(self.b)} | {empty(h)}, {resolved(h)}

    def encode_switch(self, conditional: bool = True, threshold: int = DEFAULT_COMPILE_THRESHOLD, start: int = 0) -> list:
        reset = {self.not_planned(a) for a in range(len(self.source.actions))}
        if conditional:
            effects = []
            for h in range(self.b):
                add, delete = self.release(h)
                effects.append(ConditionalEffect(self._ids({resolved(h)}), self._ids(add), self._ids(delete)))
            return [ConditionalAction(start, "switch", frozenset(), self._ids(reset), frozenset(), tuple(effects))]
        if self.b > threshold:
            raise CompileThresholdExceeded(
                f"compiling conditional effects away needs 2^{self.b} switch actions; "
                f"raise the threshold (now {threshold}) or keep conditional effects (ADL output)"
            )
        out = []
        for j in range(self.b + 1):
            for subset in combinations(range(self.b), j):
                pre = {resolved(h) for h in subset} | {prec_th(x, y) for x, y in zip(subset, subset[1:])}
                add, delete = set(reset), set()
                for h in subset:
                    h_add, h_del = self.release(h)
                    add |= h_add
                    delete |= h_del
                name = fact_name(f"switch_{j}", tuple(holder(h) for h in subset))
                out.append(ConditionalAction(start + len(out), name, self._ids(pre), self._ids(add), self._ids(delete)))
        return out

    def initial_state(self) -> frozenset:
        p, b = self.source, self.b
        (root,) = p.network.alpha.values()
        names = {fact_symbol(p, i) for i in p.init}
        names.add(self.in_(root, 0))
        names |= {empty(i) for i in range(1, b)}
        names |= {prec_th(i, j) for i in range(b) for j in range(i + 1, b)}
        names |= {nc(i, j) for i in range(b) for j in range(b)}
        names |= {self.not_planned(a) for a in range(len(p.actions))}
        return self._ids(names)

    def goal(self) -> frozenset:
        return self._ids(empty(i) for i in range(self.b))

    def encode(self, cfg: EncodingConfig) -> CthdEncoding:
        p = self.source
        actions, origin = [], []
        for m in p.methods:
            k = len(m.network)
            if k > self.b:
                continue
            for holders in crescent_assignments(k, self.b):
                actions.append(self.encode_method(m, holders, len(actions)))
                origin.append(ActionOrigin("method", m.id, holders))
        for a in p.actions:
            if self.statically_inapplicable(a):
                continue
            for h in range(self.b):
                actions.append(self.encode_primitive(a, h, len(actions)))
                origin.append(ActionOrigin("primitive", a.id, (h,)))
        for sw in self.encode_switch(cfg.conditional_effects, cfg.compile_threshold, len(actions)):
            actions.append(sw)
            held = tuple(int(x[2:]) for x in re.findall(r"th\d+", sw.name))
            origin.append(ActionOrigin("switch", None, held))
        classical = ClassicalProblem(
            self.propositions, actions, self.initial_state(), self.goal(), f"{slug(p.name)}_b{self.b}"
        )
        return CthdEncoding(classical, self.b, tuple(origin), p, cfg)


def encode_propositions(problem: GroundHtnProblem, bound: int) -> list:
    return CthdEncoder(problem, bound).propositions


def encode(problem: GroundHtnProblem, cfg: EncodingConfig | int) -> CthdEncoding:
    if isinstance(cfg, int):
        cfg = EncodingConfig(cfg)
    return CthdEncoder(problem, cfg.bound).encode(cfg)
