"""Depth-first realization of Concurrent Partial-order Forward Decomposition.

The nondeterministic choices (which trailing task, which resolver, whether to
close the current layer) become backtrack points explored in a fixed order:
node id ascending, resolver id ascending, layer switch last.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, replace
from typing import Iterator

from .errors import EmptyLayer, Inapplicable, NotIndependent, NotTrailing, ResourceExhausted, WrongTask
from .model import GroundAction, GroundHtnProblem, LayeredPlan, Method, TaskNetwork, TraceStep, apply_layer
from .normalize import is_normalized

MODES = ("literal", "voluntary")
OBJECTIVES = ("first", "min-makespan")


@dataclass
class SearchConfig:
    """How to run :func:`cpfd_solve`.

    ``literal`` switches layers only where the procedure's pseudo-code does: a
    selected primitive task has no valid resolver while the layer is non-empty
    (or no unresolved task is selectable).  ``voluntary`` may close a
    non-empty layer at any point, which makes every layered solution reachable.
    """

    mode: str = "literal"
    objective: str = "first"
    node_limit: int | None = 1_000_000
    time_limit: float | None = None
    memoize: bool = False
    reduce: bool = True
    cancel: threading.Event | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class SearchNode:
    network: TaskNetwork
    state: frozenset
    layer: frozenset = frozenset()
    tau: frozenset = frozenset()
    layer_index: int = 0
    real_closed: int = 0
    layer_real: bool = False
    trace: tuple | None = None  # cons list: (step, parent)
    last_decomposed: int = -1
    last_added: int = -1

    @classmethod
    def initial(cls, problem: GroundHtnProblem) -> SearchNode:
        return cls(problem.network, problem.init)

    def steps(self) -> list:
        out, cell = [], self.trace
        while cell is not None:
            out.append(cell[0])
            cell = cell[1]
        out.reverse()
        return out

    @property
    def makespan(self) -> int:
        return self.real_closed + (1 if self.layer_real else 0)


def _dependent_on_layer(problem: GroundHtnProblem, a: GroundAction, layer: frozenset) -> bool:
    return bool(problem.dependents[a.id] & layer)


def primitive_resolvers(problem: GroundHtnProblem, node: SearchNode, n: int) -> list:
    """Actions resolving ``n`` that are applicable and independent of the layer."""
    task = node.network.alpha[n]
    return [
        a
        for a in problem.actions_by_task[task]
        if a.pre <= node.state and not _dependent_on_layer(problem, a, node.layer)
    ]


def compound_resolvers(problem: GroundHtnProblem, node: SearchNode, n: int) -> list:
    return list(problem.methods_by_task[node.network.alpha[n]])


def switch_layer(problem: GroundHtnProblem, node: SearchNode) -> SearchNode:
    """Apply the current layer, drop its resolved nodes and open a new layer."""
    if not node.layer:
        raise EmptyLayer("cannot close an empty layer")
    state = apply_layer(node.state, (problem.actions[a] for a in node.layer))
    return SearchNode(
        node.network.remove(node.tau),
        state,
        layer_index=node.layer_index + 1,
        real_closed=node.makespan,
        trace=(TraceStep("switch"), node.trace),
    )


def add_action(problem: GroundHtnProblem, node: SearchNode, n: int, a: GroundAction) -> SearchNode:
    if n not in node.network.alpha or n in node.tau or node.network.predecessors(n):
        raise NotTrailing(f"node {n} cannot be resolved now")
    if a.task != node.network.alpha[n]:
        raise WrongTask(f"{a.name} does not resolve node {n}")
    if not a.pre <= node.state:
        raise Inapplicable(a.name)
    if _dependent_on_layer(problem, a, node.layer):
        raise NotIndependent(f"{a.name} interferes with the current layer")
    return replace(
        node,
        layer=node.layer | {a.id},
        tau=node.tau | {n},
        layer_real=node.layer_real or not a.dummy,
        trace=(TraceStep("action", n, a.id), node.trace),
        last_added=n,
    )


def decompose(problem: GroundHtnProblem, node: SearchNode, n: int, m: Method, fresh=None) -> SearchNode:
    if n not in node.network.alpha or n in node.tau or node.network.predecessors(n):
        raise NotTrailing(f"node {n} cannot be decomposed now")
    if m.task != node.network.alpha[n]:
        raise WrongTask(f"{m.name} does not decompose node {n}")
    network, mapping = node.network.decompose(n, m.network, fresh)
    children = tuple(mapping[k] for k in sorted(mapping))
    return replace(
        node,
        network=network,
        trace=(TraceStep("method", n, m.id, children), node.trace),
        last_decomposed=n,
    )


class _Search:
    def __init__(self, problem: GroundHtnProblem, cfg: SearchConfig):
        if not is_normalized(problem):
            raise ValueError("cpfd_solve expects a normalized problem (see cthd.normalize)")
        self.problem = problem
        self.cfg = cfg
        self.reduce = cfg.reduce and cfg.mode == "voluntary"
        self.expanded = 0
        self.deadline = None if cfg.time_limit is None else time.monotonic() + cfg.time_limit
        self._ids: dict = {}
        self._counter = problem.network.next_id
        self.pruned = False

    def fresh(self, parent: int, method: int):
        def make(local: int) -> int:
            key = (parent, method, local)
            if key not in self._ids:
                self._ids[key] = self._counter
                self._counter += 1
            return self._ids[key]

        return make

    def _tick(self) -> None:
        self.expanded += 1
        if self.cfg.node_limit is not None and self.expanded > self.cfg.node_limit:
            raise ResourceExhausted(f"node budget of {self.cfg.node_limit} exhausted")
        if self.cfg.cancel is not None and self.cfg.cancel.is_set():
            raise ResourceExhausted("search cancelled")
        if self.deadline is not None and self.expanded % 128 == 0 and time.monotonic() > self.deadline:
            raise ResourceExhausted(f"time limit of {self.cfg.time_limit}s exceeded")

    def children(self, node: SearchNode, bound: int | None) -> Iterator[SearchNode]:
        problem = self.problem
        net = node.network
        candidates = sorted(net.trailing() - node.tau)
        voluntary = self.cfg.mode == "voluntary"
        want_switch = not candidates
        for n in candidates:
            task = problem.tasks[net.alpha[n]]
            if task.compound:
                if self.reduce and (node.last_added >= 0 or n < node.last_decomposed):
                    continue
                for m in problem.methods_by_task[task.id]:
                    yield decompose(problem, node, n, m, self.fresh(n, m.id))
            else:
                if self.reduce and n < node.last_added:
                    continue
                resolvers = primitive_resolvers(problem, node, n)
                if not resolvers:
                    want_switch = True
                for a in resolvers:
                    if bound is not None and not a.dummy and not node.layer_real and node.real_closed + 1 > bound:
                        self.pruned = True
                        continue
                    yield add_action(problem, node, n, a)
        if node.layer and (voluntary or want_switch):
            yield switch_layer(problem, node)

    def _key(self, node: SearchNode):
        key = (frozenset(node.network.alpha), node.state, node.layer, node.tau, node.real_closed, node.layer_real)
        if self.reduce:
            key += (node.last_added, node.last_decomposed)
        return key

    def run(self, bound: int | None = None, collect: bool = False) -> Iterator[SearchNode]:
        """Yield goal nodes in depth-first order."""
        root = SearchNode.initial(self.problem)
        if not root.network.alpha:
            yield root
            return
        memo = set() if self.cfg.memoize and not collect else None
        stack = [(root, self.children(root, bound))]
        self._tick()
        while stack:
            node, it = stack[-1]
            child = next(it, None)
            if child is None:
                stack.pop()
                if memo is not None:
                    memo.add(self._key(node))
                continue
            if not child.network.alpha:
                yield child
                continue
            if memo is not None and self._key(child) in memo:
                continue
            self._tick()
            stack.append((child, self.children(child, bound)))


def _plan(problem: GroundHtnProblem, node: SearchNode) -> LayeredPlan:
    return LayeredPlan.from_trace(problem, node.steps())


def cpfd_solve(problem: GroundHtnProblem, cfg: SearchConfig | None = None) -> LayeredPlan | None:
    """Solve a normalized HTN problem.

    Returns the first plan in search order (``objective="first"``) or a plan
    of minimum makespan found by iterative deepening on the number of layers
    holding real actions.  ``None`` means the search space was exhausted;
    :class:`~cthd.errors.ResourceExhausted` is raised when a budget ran out.
    """
    cfg = cfg or SearchConfig()
    search = _Search(problem, cfg)
    if cfg.objective == "first":
        for goal in search.run():
            return _plan(problem, goal)
        return None
    bound = 0
    while True:
        search.pruned = False
        for goal in search.run(bound):
            return _plan(problem, goal)
        if not search.pruned:
            return None
        bound += 1


def cpfd_enumerate(
    problem: GroundHtnProblem,
    cfg: SearchConfig | None = None,
    max_makespan: int | None = None,
) -> list:
    """Every distinct plan reachable in the configured mode, sorted by makespan.

    Exhaustive; only meant for small problems (and recursion-free ones unless
    a node budget is set).
    """
    cfg = cfg or SearchConfig(mode="voluntary")
    search = _Search(problem, cfg)
    plans = {}
    for goal in search.run(max_makespan, collect=True):
        plan = _plan(problem, goal)
        plans.setdefault(plan.key, plan)
    return sorted(plans.values(), key=lambda p: (p.makespan, p.layers))


def search_statistics(problem: GroundHtnProblem, cfg: SearchConfig | None = None) -> dict:
    """Run :func:`cpfd_solve` and report the number of expanded nodes."""
    cfg = cfg or SearchConfig()
    search = _Search(problem, cfg)
    found = None
    for goal in search.run():
        found = _plan(problem, goal)
        break
    return {"expanded": search.expanded, "solved": found is not None}
