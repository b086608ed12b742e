"""Brute-force enumeration of layered solutions, straight from the semantics.

This deliberately shares no control structure with :mod:`cthd.search`.  Each
layer is built in two phases: first any set of decompositions of trailing
compound nodes, then any non-empty set of trailing primitive nodes paired
with applicable, pairwise independent, distinct actions.  Doing all
decompositions of a layer first loses nothing: decompositions have no
preconditions in normalized problems and resolved nodes only leave the
network when the layer closes.

Node ids are paths from the root (``(0,)``, ``(0, 2)``, ...), so equal
networks reached along different branches have equal keys.
"""

from __future__ import annotations

from itertools import count

from .errors import ResourceExhausted
from .model import GroundHtnProblem, LayeredPlan, TraceStep


class _Net:
    __slots__ = ("alpha", "order")

    def __init__(self, alpha: dict, order: frozenset):
        self.alpha = alpha  # path -> task id
        self.order = order  # transitive precedence pairs

    def key(self):
        return frozenset(self.alpha.items()), self.order

    def trailing(self) -> list:
        blocked = {v for _, v in self.order}
        return sorted(n for n in self.alpha if n not in blocked)

    def split(self, node, method) -> tuple:
        sub = method.network
        local_order = sub.closure()
        kids = {l: node + (l,) for l in sorted(sub.alpha)}
        before = {u for u, v in self.order if v == node}
        after = {v for u, v in self.order if u == node}
        order = {e for e in self.order if node not in e}
        order |= {(kids[u], kids[v]) for u, v in local_order}
        for c in kids.values():
            order |= {(p, c) for p in before}
            order |= {(c, s) for s in after}
        alpha = {n: t for n, t in self.alpha.items() if n != node}
        for l, c in kids.items():
            alpha[c] = sub.alpha[l]
        return _Net(alpha, frozenset(order)), tuple(kids[l] for l in sorted(kids))

    def drop(self, nodes) -> _Net:
        gone = set(nodes)
        return _Net(
            {n: t for n, t in self.alpha.items() if n not in gone},
            frozenset(e for e in self.order if e[0] not in gone and e[1] not in gone),
        )


def _independent(a, b) -> bool:
    return not (a.delete & (b.pre | b.add)) and not (b.delete & (a.pre | a.add))


class _Oracle:
    def __init__(self, problem: GroundHtnProblem, bound, max_nodes, singletons=False):
        self.p = problem
        self.bound = bound
        self.max_nodes = max_nodes
        self.singletons = singletons
        self.expanded = 0
        self.memo: dict = {}

    def tick(self):
        self.expanded += 1
        if self.max_nodes is not None and self.expanded > self.max_nodes:
            raise ResourceExhausted(f"oracle budget of {self.max_nodes} expansions exhausted")

    def decompositions(self, net: _Net):
        """Every network reachable by decomposing some trailing compound nodes.

        Canonical order: the smallest undecided trailing compound node is
        either kept for later layers or decomposed with one of its methods.
        """

        def rec(net, kept, steps):
            todo = [n for n in net.trailing() if n not in kept and not self.p.tasks[net.alpha[n]].primitive]
            if not todo:
                yield net, steps
                return
            n = todo[0]
            yield from rec(net, kept | {n}, steps)
            for m in self.p.methods_by_task[net.alpha[n]]:
                child, kids = net.split(n, m)
                yield from rec(child, kept, steps + (("method", n, m.id, kids),))

        yield from rec(net, frozenset(), ())

    def layers(self, net: _Net, state: frozenset):
        nodes = [n for n in net.trailing() if self.p.tasks[net.alpha[n]].primitive]
        options = [[a for a in self.p.actions_by_task[net.alpha[n]] if a.pre <= state] for n in nodes]

        def rec(i, chosen):
            if i == len(nodes):
                if chosen:
                    yield chosen
                return
            yield from rec(i + 1, chosen)
            if self.singletons and chosen:
                return
            for a in options[i]:
                if all(a.id != b.id and _independent(a, b) for _, b in chosen):
                    yield from rec(i + 1, chosen + ((nodes[i], a),))

        yield from rec(0, ())

    def solutions(self, net: _Net, state: frozenset, budget: int | None) -> dict:
        """Map from erased layer tuples to one trace suffix (path ids)."""
        if not net.alpha:
            return {(): ()}
        key = (net.key(), state, budget)
        if key in self.memo:
            return self.memo[key]
        self.tick()
        self.memo[key] = {}  # cycle guard
        out: dict = {}
        for dnet, dsteps in self.decompositions(net):
            if self.bound is not None and len(dnet.alpha) > self.bound:
                continue
            for chosen in self.layers(dnet, state):
                real = tuple(sorted(a.id for _, a in chosen if not a.dummy))
                if real and budget == 0:
                    continue
                add, delete = set(), set()
                for _, a in chosen:
                    add |= a.add
                    delete |= a.delete
                nstate = (state - delete) | add
                nbudget = budget if budget is None or not real else budget - 1
                rest = self.solutions(dnet.drop(n for n, _ in chosen), nstate, nbudget)
                steps = dsteps + tuple(("action", n, a.id, ()) for n, a in chosen) + (("switch", None, None, ()),)
                for layers, suffix in rest.items():
                    full = ((real,) if real else ()) + layers
                    out.setdefault(full, steps + suffix)
        self.memo[key] = out
        return out


def _root(problem: GroundHtnProblem) -> _Net:
    net = problem.network
    alpha = {(n,): t for n, t in net.alpha.items()}
    order = frozenset(((u,), (v,)) for u, v in net.closure())
    return _Net(alpha, order)


def _to_plan(problem: GroundHtnProblem, layers: tuple, steps: tuple) -> LayeredPlan:
    ids = {(n,): n for n in problem.network.alpha}
    fresh = count(problem.network.next_id)

    def num(path):
        if path not in ids:
            ids[path] = next(fresh)
        return ids[path]

    trace = []
    for kind, node, resolver, kids in steps:
        if kind == "switch":
            trace.append(TraceStep("switch"))
        elif kind == "method":
            trace.append(TraceStep("method", num(node), resolver, tuple(num(k) for k in kids)))
        else:
            trace.append(TraceStep("action", num(node), resolver))
    return LayeredPlan(layers, trace)


def oracle_enumerate(
    problem: GroundHtnProblem,
    max_layers: int | None = None,
    max_nodes: int | None = 200_000,
    bound: int | None = None,
) -> list:
    """All distinct layered plans with at most ``max_layers`` non-empty layers.

    ``bound`` caps the number of task nodes alive in any layer (nodes
    resolved in a layer count until it closes).  Plans are returned with a
    trace, sorted by makespan then layers.
    """
    oracle = _Oracle(problem, bound, max_nodes)
    found = oracle.solutions(_root(problem), problem.init, max_layers)
    plans = [_to_plan(problem, layers, steps) for layers, steps in found.items()]
    return sorted(plans, key=lambda p: (p.makespan, p.layers))


def oracle_solvable(problem: GroundHtnProblem, bound: int | None = None, max_nodes: int | None = 200_000) -> bool:
    """Whether any solution exists.

    Only single-action layers are explored: every layer of independent
    actions can be executed one action at a time with the same result, and
    doing so never increases the number of live task nodes.
    """
    oracle = _Oracle(problem, bound, max_nodes, singletons=True)
    return bool(oracle.solutions(_root(problem), problem.init, None))


def oracle_min_makespan(
    problem: GroundHtnProblem,
    max_layers: int,
    max_nodes: int | None = 200_000,
    bound: int | None = None,
) -> int | None:
    for limit in range(max_layers + 1):
        oracle = _Oracle(problem, bound, max_nodes)
        if oracle.solutions(_root(problem), problem.init, limit):
            return limit
    return None
