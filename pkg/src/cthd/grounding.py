"""Instantiate a lifted HDDL domain/problem pair into a ground HTN problem."""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterator

from .errors import ResolutionError, UnsupportedFeature
from .hddl import And, Atom, Equals, ForAll, LiftedDomain, LiftedProblem, Not, When
from .model import GroundAction, GroundHtnProblem, Method, Task, TaskNetwork


def fact_name(predicate: str, args) -> str:
    return f"{predicate}({','.join(args)})" if args else predicate


def objects_by_type(domain: LiftedDomain, objects: dict) -> Callable[[str], list]:
    cache: dict[str, list] = {}

    def of_type(typ: str) -> list:
        if typ not in cache:
            if typ != "object" and typ not in domain.types:
                raise ResolutionError(f"unknown type {typ!r}")
            cache[typ] = sorted(o for o, t in objects.items() if domain.is_subtype(t, typ))
        return cache[typ]

    return of_type


def enumerate_bindings(params, of_type, checks=()) -> Iterator[dict]:
    """All assignments of typed ``params`` to objects passing ``checks``.

    ``checks`` holds ``(variables, predicate)`` pairs; a predicate is tested as
    soon as all of its variables are bound.
    """
    names = [p for p, _ in params]
    position = {p: i for i, p in enumerate(names)}
    at_depth = [[] for _ in range(len(names) + 1)]
    for variables, test in checks:
        depth = max((position[v] + 1 for v in variables if v in position), default=0)
        at_depth[depth].append(test)
    domains = [of_type(t) for _, t in params]
    binding: dict = {}
    if not all(test(binding) for test in at_depth[0]):
        return

    def rec(i):
        if i == len(names):
            yield dict(binding)
            return
        for obj in domains[i]:
            binding[names[i]] = obj
            if all(test(binding) for test in at_depth[i + 1]):
                yield from rec(i + 1)
        binding.pop(names[i], None)

    yield from rec(0)


def substitute(args, binding: dict, known: dict, where: str) -> tuple:
    out = []
    for a in args:
        if a.startswith("?"):
            if a not in binding:
                raise ResolutionError(f"{where}: unbound variable {a}")
            out.append(binding[a])
        elif a in known:
            out.append(a)
        else:
            raise ResolutionError(f"{where}: undeclared object {a!r}")
    return tuple(out)


def literals(formula, where: str) -> list:
    """Flatten a conjunction into ``(positive, Atom | Equals)`` pairs."""
    if isinstance(formula, And):
        out = []
        for part in formula.parts:
            out.extend(literals(part, where))
        return out
    if isinstance(formula, (Atom, Equals)):
        return [(True, formula)]
    if isinstance(formula, Not) and isinstance(formula.arg, (Atom, Equals)):
        return [(False, formula.arg)]
    if isinstance(formula, (ForAll, When)):
        raise UnsupportedFeature(f"{where}: quantifiers and conditional effects are not supported in HTN input")
    raise UnsupportedFeature(f"{where}: only conjunctions of literals are supported")


def _variables(lit) -> set:
    terms = (lit.left, lit.right) if isinstance(lit, Equals) else lit.args
    return {t for t in terms if t.startswith("?")}


def _static_checks(lits, static_preds, static_facts, known, where) -> list:
    checks = []
    for positive, lit in lits:
        if isinstance(lit, Equals):
            def test(b, lit=lit, positive=positive):
                left = b.get(lit.left, lit.left)
                right = b.get(lit.right, lit.right)
                return (left == right) == positive
        elif lit.predicate in static_preds:
            def test(b, lit=lit, positive=positive):
                fact = (lit.predicate, substitute(lit.args, b, known, where))
                return (fact in static_facts) == positive
        else:
            continue
        checks.append((_variables(lit), test))
    return checks


def ground(domain: LiftedDomain, problem: LiftedProblem) -> GroundHtnProblem:
    """Exhaustive typed instantiation with static-fact evaluation and
    decomposition-reachability pruning."""
    if problem.domain and problem.domain != domain.name:
        raise ResolutionError(f"problem is for domain {problem.domain!r}, not {domain.name!r}")
    if problem.goal != And(()):
        raise UnsupportedFeature("state goals in HTN problems are not supported")
    objects = dict(domain.constants)
    for obj, typ in problem.objects.items():
        if typ != "object" and typ not in domain.types:
            raise ResolutionError(f"object {obj!r} has undeclared type {typ!r}")
        objects[obj] = typ
    of_type = objects_by_type(domain, objects)

    for atom in problem.init:
        if atom.predicate not in domain.predicates:
            raise ResolutionError(f"undeclared predicate {atom.predicate!r} in :init")
        for arg in atom.args:
            if arg not in objects:
                raise ResolutionError(f"undeclared object {arg!r} in :init")
    init_facts = {(a.predicate, a.args) for a in problem.init}

    fluent_preds = set()
    for schema in domain.actions:
        for _, lit in literals(schema.effect, f"action {schema.name}"):
            if isinstance(lit, Equals):
                raise UnsupportedFeature(f"action {schema.name}: equality in effects")
            fluent_preds.add(lit.predicate)
    static_preds = set(domain.predicates) - fluent_preds
    static_facts = {f for f in init_facts if f[0] in static_preds}

    # actions (one primitive task per ground action) ---------------------------
    actions = []  # (name, pre, add, delete)
    for schema in domain.actions:
        where = f"action {schema.name}"
        pre_lits = literals(schema.pre, where)
        eff_lits = literals(schema.effect, where)
        for positive, lit in pre_lits:
            if not positive and isinstance(lit, Atom) and lit.predicate not in static_preds:
                raise UnsupportedFeature(f"{where}: negative precondition on fluent {lit.predicate!r}")
        checks = _static_checks(pre_lits, static_preds, static_facts, objects, where)
        for b in enumerate_bindings(schema.params, of_type, checks):
            args = tuple(b[p] for p, _ in schema.params)
            pre = {
                fact_name(lit.predicate, substitute(lit.args, b, objects, where))
                for positive, lit in pre_lits
                if isinstance(lit, Atom) and lit.predicate not in static_preds
            }
            add = {fact_name(l.predicate, substitute(l.args, b, objects, where)) for pos, l in eff_lits if pos}
            delete = {fact_name(l.predicate, substitute(l.args, b, objects, where)) for pos, l in eff_lits if not pos}
            actions.append((fact_name(schema.name, args), pre, add, delete))
    primitive_names = {a[0] for a in actions}

    # methods ------------------------------------------------------------------
    action_schemas = {a.name for a in domain.actions}
    methods = []  # (name, task, pre, [subtask names], [(i, j)])
    for schema in domain.methods:
        where = f"method {schema.name}"
        pre_lits = literals(schema.pre, where)
        for positive, lit in pre_lits:
            if not positive and isinstance(lit, Atom) and lit.predicate not in static_preds:
                raise UnsupportedFeature(f"{where}: negative precondition on fluent {lit.predicate!r}")
        checks = _static_checks(pre_lits, static_preds, static_facts, objects, where)
        index = {st.label: i for i, st in enumerate(schema.subtasks)}
        edges = [(index[a], index[b]) for a, b in schema.ordering]
        for b in enumerate_bindings(schema.params, of_type, checks):
            head = fact_name(schema.task, substitute(schema.task_args, b, objects, where))
            subs = [fact_name(st.task, substitute(st.args, b, objects, where)) for st in schema.subtasks]
            if any(st.task in action_schemas and name not in primitive_names
                   for st, name in zip(schema.subtasks, subs)):
                continue
            pre = {
                fact_name(lit.predicate, substitute(lit.args, b, objects, where))
                for positive, lit in pre_lits
                if isinstance(lit, Atom) and lit.predicate not in static_preds
            }
            args = tuple(b[p] for p, _ in schema.params)
            methods.append((fact_name(schema.name, args), head, pre, subs, edges))

    roots = [fact_name(st.task, substitute(st.args, {}, objects, "initial task network")) for st in problem.subtasks]
    for st in problem.subtasks:
        if st.task not in domain.tasks and st.task not in action_schemas:
            raise ResolutionError(f"initial task network uses undeclared task {st.task!r}")
    root_index = {st.label: i for i, st in enumerate(problem.subtasks)}
    root_edges = [(root_index[a], root_index[b]) for a, b in problem.ordering]

    # productivity (bottom-up) then reachability (top-down) ---------------------
    productive = set(primitive_names)
    changed = True
    while changed:
        changed = False
        for name, head, _, subs, _ in methods:
            if head not in productive and all(s in productive for s in subs):
                productive.add(head)
                changed = True
    useful = [m for m in methods if m[1] in productive and all(s in productive for s in m[3])]
    by_head: dict[str, list] = {}
    for m in useful:
        by_head.setdefault(m[1], []).append(m)

    task_order: list[str] = []
    seen = set()
    queue = deque()
    for r in roots:
        if r not in seen:
            seen.add(r)
            task_order.append(r)
            queue.append(r)
    kept_methods = []
    while queue:
        t = queue.popleft()
        for m in by_head.get(t, []):
            kept_methods.append(m)
            for s in m[3]:
                if s not in seen:
                    seen.add(s)
                    task_order.append(s)
                    queue.append(s)
    action_by_name = {a[0]: a for a in actions}
    kept_actions = [action_by_name[t] for t in task_order if t in action_by_name]

    facts = set()
    for _, pre, add, delete in kept_actions:
        facts |= pre | add | delete
    for m in kept_methods:
        facts |= m[2]
    propositions = sorted(facts)
    pid = {p: i for i, p in enumerate(propositions)}
    init = frozenset(pid[fact_name(p, a)] for p, a in init_facts if fact_name(p, a) in pid)

    primitive_roots = {r for r, st in zip(roots, problem.subtasks) if st.task in action_schemas}
    tasks = [Task(i, name, name in primitive_names or name in primitive_roots) for i, name in enumerate(task_order)]
    tid = {t.name: t.id for t in tasks}
    g_actions = [
        GroundAction(i, name, tid[name], {pid[p] for p in pre}, {pid[p] for p in add}, {pid[p] for p in delete})
        for i, (name, pre, add, delete) in enumerate(kept_actions)
    ]
    g_methods = [
        Method(
            i,
            name,
            tid[head],
            TaskNetwork.create({j: tid[s] for j, s in enumerate(subs)}, edges),
            {pid[p] for p in pre},
        )
        for i, (name, head, pre, subs, edges) in enumerate(kept_methods)
    ]
    network = TaskNetwork.create({j: tid[r] for j, r in enumerate(roots)}, root_edges)
    return GroundHtnProblem(propositions, tasks, g_actions, g_methods, init, network, problem.name)


def load(domain_text: str, problem_text: str) -> GroundHtnProblem:
    """Parse and ground an HDDL pair (not normalized)."""
    from .hddl import parse_domain, parse_problem

    return ground(parse_domain(domain_text), parse_problem(problem_text))
