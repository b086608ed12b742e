"""Propositional STRIPS and HTN objects and their transition semantics.

Everything downstream of grounding works on this module's types.  Propositions,
tasks, actions and methods are identified by dense integer ids (their index in
the owning :class:`GroundHtnProblem`); a state is a ``frozenset`` of
proposition ids.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping, Union

from .errors import (
    ConflictingEffects,
    CyclicOrdering,
    Inapplicable,
    NotCompound,
    NotIndependent,
    NotPrimitive,
    NotTrailing,
    WrongTask,
)

State = frozenset


def _frozen(items) -> frozenset:
    return items if isinstance(items, frozenset) else frozenset(items)


@dataclass(frozen=True)
class Task:
    id: int
    name: str
    primitive: bool

    @property
    def compound(self) -> bool:
        return not self.primitive


@dataclass(frozen=True)
class GroundAction:
    """A STRIPS action resolving the primitive task ``task``.

    ``dummy`` marks actions introduced by normalization (no-ops and
    method-precondition checks); they are erased from emitted plans.
    """

    id: int
    name: str
    task: int
    pre: frozenset = frozenset()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()
    dummy: bool = False

    def __post_init__(self):
        for attr in ("pre", "add", "delete"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        clash = self.add & self.delete
        if clash:
            raise ConflictingEffects(
                f"action {self.name!r} adds and deletes {sorted(clash)}"
            )


@dataclass(frozen=True)
class ConditionalEffect:
    condition: frozenset
    add: frozenset = frozenset()
    delete: frozenset = frozenset()

    def __post_init__(self):
        for attr in ("condition", "add", "delete"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))


@dataclass(frozen=True)
class ConditionalAction:
    """An action with ADL conditional effects.

    Conditions are evaluated in the state the action is applied to; all
    triggered deletes are applied before all triggered adds.
    """

    id: int
    name: str
    pre: frozenset = frozenset()
    add: frozenset = frozenset()
    delete: frozenset = frozenset()
    effects: tuple = ()

    def __post_init__(self):
        for attr in ("pre", "add", "delete"):
            object.__setattr__(self, attr, _frozen(getattr(self, attr)))
        object.__setattr__(self, "effects", tuple(self.effects))

    def triggered(self, state: frozenset) -> tuple[frozenset, frozenset]:
        add, delete = set(self.add), set(self.delete)
        for eff in self.effects:
            if eff.condition <= state:
                add |= eff.add
                delete |= eff.delete
        return frozenset(add), frozenset(delete)


Action = Union[GroundAction, ConditionalAction]


def _footprint(a: Action) -> tuple[frozenset, frozenset, frozenset]:
    # conditional effects are treated as if they might all fire
    effects = getattr(a, "effects", ())
    if not effects:
        return a.pre, a.add, a.delete
    pre = a.pre.union(*(e.condition for e in effects))
    add = a.add.union(*(e.add for e in effects))
    delete = a.delete.union(*(e.delete for e in effects))
    return pre, add, delete


def independent(a: Action, b: Action) -> bool:
    """True iff neither action deletes a precondition or add effect of the other."""
    pre_a, add_a, del_a = _footprint(a)
    pre_b, add_b, del_b = _footprint(b)
    return not (del_a & (pre_b | add_b)) and not (del_b & (pre_a | add_a))


def dependent_set(a: Action, actions: Iterable[Action]) -> frozenset:
    """Ids of the actions in ``actions`` dependent with ``a``, always including ``a``."""
    return frozenset(b.id for b in actions if b.id == a.id or not independent(a, b)) | {a.id}


def apply(state: frozenset, a: Action) -> frozenset:
    if not a.pre <= state:
        raise Inapplicable(f"{a.name}: missing {sorted(a.pre - state)}")
    if isinstance(a, ConditionalAction):
        add, delete = a.triggered(state)
    else:
        add, delete = a.add, a.delete
    return (state - delete) | add


def apply_layer(state: frozenset, layer: Iterable[Action]) -> frozenset:
    """Apply a set of pairwise independent actions concurrently."""
    layer = list(layer)
    for i, a in enumerate(layer):
        for b in layer[i + 1:]:
            if a.id == b.id or not independent(a, b):
                raise NotIndependent(f"{a.name} and {b.name} interfere")
    pre = frozenset().union(*(a.pre for a in layer))
    if not pre <= state:
        raise Inapplicable(f"layer misses {sorted(pre - state)}")
    add, delete = set(), set()
    for a in layer:
        if isinstance(a, ConditionalAction):
            a_add, a_del = a.triggered(state)
        else:
            a_add, a_del = a.add, a.delete
        add |= a_add
        delete |= a_del
    return (state - delete) | add


class TaskNetwork:
    """Task nodes, their labelling ``alpha`` and the precedence relation.

    Only direct edges are stored; the precedence relation is their transitive
    closure.  Instances are treated as immutable.
    """

    __slots__ = ("alpha", "edges", "next_id", "_pred", "_succ", "_indeg")

    def __init__(self, alpha: Mapping[int, int], edges: Iterable = (), next_id: int | None = None):
        self.alpha = dict(alpha)
        self.edges = _frozen(edges)
        if next_id is None:
            next_id = max(self.alpha, default=-1) + 1
        self.next_id = next_id
        self._pred = None
        self._succ = None
        self._indeg = None

    @classmethod
    def create(cls, alpha: Mapping[int, int], edges: Iterable = (), next_id: int | None = None) -> TaskNetwork:
        """Build a network, checking that ``edges`` form a strict partial order."""
        net = cls(alpha, edges, next_id)
        for u, v in net.edges:
            if u not in net.alpha or v not in net.alpha:
                raise KeyError(f"edge ({u}, {v}) references an unknown node")
            if u == v:
                raise CyclicOrdering(f"node {u} precedes itself", [u, u])
        cycle = net.find_cycle()
        if cycle:
            raise CyclicOrdering("precedence relation is cyclic", cycle)
        return net

    @classmethod
    def chain(cls, tasks: Iterable[int]) -> TaskNetwork:
        tasks = list(tasks)
        return cls(dict(enumerate(tasks)), {(i, i + 1) for i in range(len(tasks) - 1)})

    # structure ------------------------------------------------------------

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.alpha)

    def __len__(self) -> int:
        return len(self.alpha)

    def __bool__(self) -> bool:
        return bool(self.alpha)

    def __contains__(self, node) -> bool:
        return node in self.alpha

    def key(self):
        return frozenset(self.alpha.items()), self.edges

    def __eq__(self, other) -> bool:
        return isinstance(other, TaskNetwork) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"TaskNetwork(alpha={self.alpha}, edges={sorted(self.edges)})"

    def _adjacency(self):
        if self._succ is None:
            succ = {n: [] for n in self.alpha}
            pred = {n: [] for n in self.alpha}
            for u, v in self.edges:
                succ[u].append(v)
                pred[v].append(u)
            self._succ, self._pred = succ, pred
            self._indeg = {n: len(ps) for n, ps in pred.items()}
        return self._succ, self._pred

    def successors(self, node) -> list:
        return self._adjacency()[0][node]

    def predecessors(self, node) -> list:
        return self._adjacency()[1][node]

    def trailing(self) -> frozenset:
        """Nodes without a predecessor."""
        self._adjacency()
        return frozenset(n for n, d in self._indeg.items() if d == 0)

    def last_nodes(self) -> frozenset:
        succ, _ = self._adjacency()
        return frozenset(n for n, s in succ.items() if not s)

    def precedes(self, u, v) -> bool:
        """Reachability over stored edges (the transitive closure)."""
        succ, _ = self._adjacency()
        seen, stack = set(), [u]
        while stack:
            for w in succ[stack.pop()]:
                if w == v:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def closure(self) -> frozenset:
        return frozenset((u, v) for u in self.alpha for v in self.alpha if self.precedes(u, v))

    def find_cycle(self) -> list:
        succ, _ = self._adjacency()
        color = dict.fromkeys(self.alpha, 0)
        for root in sorted(self.alpha):
            if color[root]:
                continue
            path, stack = [root], [iter(succ[root])]
            color[root] = 1
            while stack:
                for w in stack[-1]:
                    if color[w] == 1:
                        return path[path.index(w):] + [w]
                    if color[w] == 0:
                        color[w] = 1
                        path.append(w)
                        stack.append(iter(succ[w]))
                        break
                else:
                    color[path.pop()] = 2
                    stack.pop()
        return []

    # progression ----------------------------------------------------------

    def remove(self, nodes: Iterable[int]) -> TaskNetwork:
        """Drop ``nodes`` and every edge mentioning them.

        Only correct as a progression step for nodes without predecessors
        (resolved trailing nodes); callers guarantee that.
        """
        gone = set(nodes)
        alpha = {n: t for n, t in self.alpha.items() if n not in gone}
        edges = frozenset(e for e in self.edges if e[0] not in gone and e[1] not in gone)
        return TaskNetwork(alpha, edges, self.next_id)

    def decompose(
        self,
        node: int,
        sub: TaskNetwork,
        fresh: Callable[[int], int] | None = None,
    ) -> tuple[TaskNetwork, dict]:
        """Replace ``node`` by a copy of ``sub``.

        Inserted nodes inherit every successor of ``node``.  Returns the new
        network and the mapping from ``sub`` nodes to fresh node ids.
        """
        counter = self.next_id
        mapping = {}
        for local in sorted(sub.alpha):
            if fresh is None:
                mapping[local] = counter
                counter += 1
            else:
                mapping[local] = fresh(local)
        next_id = max([counter, *(i + 1 for i in mapping.values())])
        followers = self.successors(node)
        alpha = {n: t for n, t in self.alpha.items() if n != node}
        for local, new in mapping.items():
            if new in alpha:
                raise ValueError(f"fresh node id {new} already in use")
            alpha[new] = sub.alpha[local]
        edges = {e for e in self.edges if node not in e}
        edges.update((mapping[u], mapping[v]) for u, v in sub.edges)
        edges.update((new, f) for new in mapping.values() for f in followers)
        return TaskNetwork(alpha, edges, next_id), mapping


@dataclass(frozen=True)
class Method:
    id: int
    name: str
    task: int
    network: TaskNetwork
    pre: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pre", _frozen(self.pre))

    @property
    def last_node(self) -> int | None:
        """The unique node without successor, or ``None`` if there is none or several."""
        last = self.network.last_nodes()
        return next(iter(last)) if len(last) == 1 else None


@dataclass(frozen=True, eq=False)
class GroundHtnProblem:
    propositions: tuple
    tasks: tuple
    actions: tuple
    methods: tuple
    init: frozenset
    network: TaskNetwork
    name: str = "problem"

    def __post_init__(self):
        for attr in ("propositions", "tasks", "actions", "methods"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "init", _frozen(self.init))
        if len(set(self.propositions)) != len(self.propositions):
            raise ValueError("proposition names must be unique")
        for kind in ("tasks", "actions", "methods"):
            for i, obj in enumerate(getattr(self, kind)):
                if obj.id != i:
                    raise ValueError(f"{kind} ids must be contiguous from 0 (got {obj.id} at {i})")
        n_props, n_tasks = len(self.propositions), len(self.tasks)
        if any(p < 0 or p >= n_props for p in self.init):
            raise ValueError("initial state references an unknown proposition")
        for a in self.actions:
            if not 0 <= a.task < n_tasks or not self.tasks[a.task].primitive:
                raise ValueError(f"action {a.name} must resolve a primitive task")
        for m in self.methods:
            if not 0 <= m.task < n_tasks or self.tasks[m.task].primitive:
                raise ValueError(f"method {m.name} must decompose a compound task")

    @cached_property
    def proposition_ids(self) -> dict:
        return {name: i for i, name in enumerate(self.propositions)}

    @cached_property
    def task_ids(self) -> dict:
        return {t.name: t.id for t in self.tasks}

    @cached_property
    def actions_by_task(self) -> dict:
        index = {t.id: [] for t in self.tasks}
        for a in self.actions:
            index[a.task].append(a)
        return {t: tuple(acts) for t, acts in index.items()}

    @cached_property
    def methods_by_task(self) -> dict:
        index = {t.id: [] for t in self.tasks}
        for m in self.methods:
            index[m.task].append(m)
        return {t: tuple(ms) for t, ms in index.items()}

    @cached_property
    def dependents(self) -> tuple:
        """``dependents[a]`` is the dependent set of action ``a`` over all actions."""
        return tuple(dependent_set(a, self.actions) for a in self.actions)

    def action(self, name: str) -> GroundAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def method(self, name: str) -> Method:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def state_names(self, state: Iterable[int]) -> set:
        return {self.propositions[p] for p in state}

    def evolve(self, **changes) -> GroundHtnProblem:
        return replace(self, **changes)


def _check_trailing(network: TaskNetwork, node: int) -> None:
    if node not in network:
        raise NotTrailing(f"node {node} is not in the task network")
    if network.predecessors(node):
        raise NotTrailing(f"node {node} has predecessors {sorted(network.predecessors(node))}")


def progress_action(problem: GroundHtnProblem, node: int, action: GroundAction) -> GroundHtnProblem:
    """Resolve the primitive trailing ``node`` with ``action``."""
    net = problem.network
    _check_trailing(net, node)
    task = problem.tasks[net.alpha[node]]
    if not task.primitive:
        raise NotPrimitive(f"node {node} holds compound task {task.name}")
    if action.task != task.id:
        raise WrongTask(f"{action.name} does not resolve {task.name}")
    state = apply(problem.init, action)
    return problem.evolve(init=state, network=net.remove([node]))


def progress_method(
    problem: GroundHtnProblem,
    node: int,
    method: Method,
    fresh: Callable[[int], int] | None = None,
) -> GroundHtnProblem:
    """Decompose the compound trailing ``node`` with ``method``.

    Method preconditions (if any remain) are checked against the current state.
    """
    net = problem.network
    _check_trailing(net, node)
    task = problem.tasks[net.alpha[node]]
    if task.primitive:
        raise NotCompound(f"node {node} holds primitive task {task.name}")
    if method.task != task.id:
        raise WrongTask(f"{method.name} does not decompose {task.name}")
    if not method.pre <= problem.init:
        raise Inapplicable(f"{method.name}: missing {sorted(method.pre - problem.init)}")
    network, _ = net.decompose(node, method.network, fresh)
    return problem.evolve(network=network)


@dataclass(frozen=True)
class TraceStep:
    """One progression step: a decomposition, an action added to the current
    layer, or a layer switch."""

    kind: str
    node: int | None = None
    resolver: int | None = None
    children: tuple = ()

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind != "switch":
            out["node"] = self.node
            out["resolver"] = self.resolver
        if self.kind == "method":
            out["children"] = list(self.children)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> TraceStep:
        return cls(data["kind"], data.get("node"), data.get("resolver"), tuple(data.get("children", ())))


@dataclass(frozen=True)
class LayeredPlan:
    """A sequence of action layers (action ids) with its progression trace.

    ``layers`` never contains dummy actions or empty layers.
    """

    layers: tuple
    trace: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(sorted(layer)) for layer in self.layers))
        if self.trace is not None:
            object.__setattr__(self, "trace", tuple(self.trace))

    @property
    def makespan(self) -> int:
        return len(self.layers)

    @property
    def key(self) -> tuple:
        return tuple(frozenset(layer) for layer in self.layers)

    def names(self, problem: GroundHtnProblem) -> list:
        return [[problem.actions[a].name for a in layer] for layer in self.layers]

    @classmethod
    def from_trace(cls, problem: GroundHtnProblem, trace: Iterable[TraceStep]) -> LayeredPlan:
        trace = tuple(trace)
        return cls(erase_dummies(problem, trace_layers(trace)), trace)


def trace_layers(trace: Iterable[TraceStep]) -> list:
    """Internal layers (including dummy actions) described by a trace."""
    layers = [[]]
    for step in trace:
        if step.kind == "action":
            layers[-1].append(step.resolver)
        elif step.kind == "switch":
            layers.append([])
    return [layer for layer in layers if layer]


def erase_dummies(problem: GroundHtnProblem, layers: Iterable[Iterable[int]]) -> list:
    out = []
    for layer in layers:
        real = [a for a in layer if not problem.actions[a].dummy]
        if real:
            out.append(real)
    return out
