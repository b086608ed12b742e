"""Write a taskholder encoding as lifted PDDL and read classical PDDL back.

The written domain is parameterized over taskholders only; HTN tasks and
actions become typed constants and HTN facts become 0-ary predicates.  The
reader is a small ADL grounder (typing, equality, ``forall`` and ``when``)
whose output can be compared with the in-memory encoding.
"""

from __future__ import annotations

from .encoding import (
    CthdEncoding,
    action_symbol,
    fact_symbol,
    holder,
    method_schema,
    primitive_schema,
    slug,
    task_symbol,
)
from .errors import ResolutionError, UnsupportedFeature
from .grounding import enumerate_bindings, fact_name, objects_by_type, substitute
from .hddl import And, Atom, Equals, ForAll, Not, When, parse_domain, parse_problem
from .model import ConditionalEffect
from .strips import ClassicalProblem, make_action

REQUIREMENTS = (":strips", ":typing", ":equality", ":universal-preconditions")


# writer ----------------------------------------------------------------------

def _atom(pred: str, *args: str) -> str:
    return f"({' '.join((pred, *args))})"


def _conj(parts: list, indent: str) -> str:
    if not parts:
        return "()"
    if len(parts) == 1:
        return parts[0]
    inner = f"\n{indent}  ".join(parts)
    return f"(and {inner})"


def _all_nc_into(var: str) -> str:
    return f"(forall (?i - taskholder) (not_constraint ?i {var}))"


def _release(var: str) -> list:
    return [
        f"(forall (?i - taskholder) (not_constraint {var} ?i))",
        _atom("empty", var),
        f"(not (resolved {var}))",
    ]


def _method_schema(enc: CthdEncoding, m) -> str:
    p = enc.source
    net = m.network
    last = m.last_node
    others = sorted(n for n in net.alpha if n != last)
    k = len(net)
    hv = [f"?h{i}" for i in range(1, k + 1)]
    where = {last: hv[0], **{n: v for n, v in zip(others, hv[1:])}}
    head = _atom("in", task_symbol(p, m.task), hv[0])
    pre = [head, _all_nc_into(hv[0])]
    pre += [_atom("prec_th", x, y) for x, y in zip(hv[1:], hv[2:])]
    pre += [f"(not (= {hv[0]} {v}))" for v in hv[1:]]
    pre += [_atom("empty", v) for v in hv[1:]]
    adds = [_atom("in", task_symbol(p, net.alpha[n]), where[n]) for n in sorted(net.alpha)]
    dels = [_atom("empty", v) for v in hv[1:]]
    dels += [_atom("not_constraint", where[u], where[v]) for u, v in sorted(net.edges)]
    dels += [_atom("not_constraint", v, hv[0]) for v in hv[1:]]
    if head not in adds:
        dels.append(head)
    eff = list(dict.fromkeys(adds)) + [f"(not {d})" for d in dict.fromkeys(dels) if d not in adds]
    params = " ".join(f"{v}" for v in hv)
    return (
        f"  (:action {method_schema(p, m.id)}\n"
        f"    :parameters ({params} - taskholder)\n"
        f"    :precondition {_conj(pre, '    ')}\n"
        f"    :effect {_conj(eff, '    ')})"
    )


def _primitive_schema(enc: CthdEncoding, a, guards) -> str:
    p = enc.source
    pre = [_atom(fact_symbol(p, f)) for f in sorted(a.pre)]
    pre += [_atom("in", task_symbol(p, a.task), "?h"), _all_nc_into("?h")]
    pre += [_atom("not_planned", action_symbol(p, g)) for g in sorted(guards)]
    eff = [_atom(fact_symbol(p, f)) for f in sorted(a.add)] + [_atom("resolved", "?h")]
    eff += [f"(not {_atom(fact_symbol(p, f))})" for f in sorted(a.delete)]
    eff += [f"(not {_atom('not_planned', action_symbol(p, a.id))})", f"(not {_atom('in', task_symbol(p, a.task), '?h')})"]
    return (
        f"  (:action {primitive_schema(p, a.id)}\n"
        f"    :parameters (?h - taskholder)\n"
        f"    :precondition {_conj(pre, '    ')}\n"
        f"    :effect {_conj(eff, '    ')})"
    )


def _switch_schemas(enc: CthdEncoding) -> list:
    reset = "(forall (?a - htn_action) (not_planned ?a))"
    if enc.config is None or enc.config.conditional_effects:
        body = _conj(_release("?h"), "      ")
        return [
            "  (:action switch\n"
            "    :parameters ()\n"
            "    :precondition ()\n"
            f"    :effect (and {reset}\n"
            f"      (forall (?h - taskholder) (when (resolved ?h) {body}))))"
        ]
    out = []
    for j in range(enc.bound + 1):
        hv = [f"?h{i}" for i in range(1, j + 1)]
        pre = [_atom("resolved", v) for v in hv] + [_atom("prec_th", x, y) for x, y in zip(hv, hv[1:])]
        eff = [reset] + [e for v in hv for e in _release(v)]
        params = f"{' '.join(hv)} - taskholder" if hv else ""
        out.append(
            f"  (:action switch_{j}\n"
            f"    :parameters ({params})\n"
            f"    :precondition {_conj(pre, '    ')}\n"
            f"    :effect {_conj(eff, '    ')})"
        )
    return out


def write_pddl(enc: CthdEncoding) -> tuple[str, str]:
    """Domain and problem text for ``enc``; declarations are sorted by id."""
    from .encoding import CthdEncoder  # guard computation lives with the encoder

    p = enc.source
    encoder = CthdEncoder(p, enc.bound)
    conditional = enc.config is None or enc.config.conditional_effects
    reqs = REQUIREMENTS + ((":conditional-effects",) if conditional else ())
    name = slug(p.name)
    tasks = " ".join(task_symbol(p, t.id) for t in p.tasks)
    actions = " ".join(action_symbol(p, a.id) for a in p.actions)
    facts = "\n".join(f"    {_atom(fact_symbol(p, i))}" for i in range(len(p.propositions)))

    methods = sorted({o.source for o in enc.origin if o.kind == "method"})
    primitives = sorted({o.source for o in enc.origin if o.kind == "primitive"})
    schemas = [_method_schema(enc, p.methods[m]) for m in methods]
    schemas += [_primitive_schema(enc, p.actions[a], encoder.guards(p.actions[a])) for a in primitives]
    schemas += _switch_schemas(enc)

    constants = []
    if tasks:
        constants.append(f"    {tasks} - task")
    if actions:
        constants.append(f"    {actions} - htn_action")
    domain = "\n".join(
        [
            f"(define (domain {name}_cthd)",
            f"  (:requirements {' '.join(reqs)})",
            "  (:types taskholder task htn_action - object)",
            "  (:constants",
            *constants,
            "  )",
            "  (:predicates",
            facts,
            "    (not_constraint ?h1 ?h2 - taskholder)",
            "    (prec_th ?h1 ?h2 - taskholder)",
            "    (empty ?h - taskholder)",
            "    (resolved ?h - taskholder)",
            "    (in ?t - task ?h - taskholder)",
            "    (not_planned ?a - htn_action)",
            "  )",
            *schemas,
            ")",
            "",
        ]
    )
    domain = domain.replace("  (:predicates\n\n", "  (:predicates\n")

    cp = enc.problem
    init = sorted(cp.propositions[i] for i in cp.init)
    goal = [cp.propositions[i] for i in sorted(cp.goal)]
    holders = " ".join(holder(i) for i in range(enc.bound))
    problem = "\n".join(
        [
            f"(define (problem {name}_b{enc.bound})",
            f"  (:domain {name}_cthd)",
            f"  (:objects {holders} - taskholder)",
            "  (:init",
            *(f"    {_name_to_atom(f)}" for f in init),
            "  )",
            f"  (:goal (and {' '.join(_name_to_atom(g) for g in goal)}))",
            ")",
            "",
        ]
    )
    return domain, problem


def _name_to_atom(name: str) -> str:
    if "(" not in name:
        return f"({name})"
    head, args = name[:-1].split("(", 1)
    return _atom(head, *args.split(","))


# reader ----------------------------------------------------------------------

class _Grounder:
    def __init__(self, domain, problem):
        self.domain = domain
        objects = dict(domain.constants)
        objects.update(problem.objects)
        for typ in objects.values():
            if typ != "object" and typ not in domain.types:
                raise ResolutionError(f"undeclared type {typ!r}")
        self.objects = objects
        self.of_type = objects_by_type(domain, objects)
        fluent = set()
        for a in domain.actions:
            self._effect_predicates(a.effect, fluent)
        self.static = set(domain.predicates) - fluent
        self.init = {fact_name(a.predicate, a.args) for a in problem.init}

    def _effect_predicates(self, eff, out: set) -> None:
        if isinstance(eff, And):
            for part in eff.parts:
                self._effect_predicates(part, out)
        elif isinstance(eff, Not):
            self._effect_predicates(eff.arg, out)
        elif isinstance(eff, ForAll):
            self._effect_predicates(eff.body, out)
        elif isinstance(eff, When):
            self._effect_predicates(eff.effect, out)
        elif isinstance(eff, Atom):
            out.add(eff.predicate)

    def name(self, atom: Atom, binding: dict) -> str:
        if atom.predicate not in self.domain.predicates:
            raise ResolutionError(f"undeclared predicate {atom.predicate!r}")
        return fact_name(atom.predicate, substitute(atom.args, binding, self.objects, atom.predicate))

    def _expand(self, params, binding):
        for extra in enumerate_bindings(params, self.of_type):
            yield {**binding, **extra}

    def condition(self, formula, binding: dict, out: set) -> bool:
        """Collect positive atoms; return False when a static test fails."""
        if isinstance(formula, And):
            return all(self.condition(part, binding, out) for part in formula.parts)
        if isinstance(formula, Atom):
            name = self.name(formula, binding)
            if formula.predicate in self.static and name not in self.init:
                return False
            out.add(name)
            return True
        if isinstance(formula, Equals):
            return binding.get(formula.left, formula.left) == binding.get(formula.right, formula.right)
        if isinstance(formula, Not):
            arg = formula.arg
            if isinstance(arg, Equals):
                return not self.condition(arg, binding, out)
            if isinstance(arg, Atom) and arg.predicate in self.static:
                return self.name(arg, binding) not in self.init
            raise UnsupportedFeature("negative preconditions on fluents are not supported")
        if isinstance(formula, ForAll):
            return all(self.condition(formula.body, b, out) for b in self._expand(formula.params, binding))
        raise UnsupportedFeature(f"unsupported condition {type(formula).__name__}")

    def effect(self, formula, binding: dict, add: set, delete: set, conditional: list, nested: bool = False):
        if isinstance(formula, And):
            for part in formula.parts:
                self.effect(part, binding, add, delete, conditional, nested)
        elif isinstance(formula, Atom):
            add.add(self.name(formula, binding))
        elif isinstance(formula, Not) and isinstance(formula.arg, Atom):
            delete.add(self.name(formula.arg, binding))
        elif isinstance(formula, ForAll):
            for b in self._expand(formula.params, binding):
                self.effect(formula.body, b, add, delete, conditional, nested)
        elif isinstance(formula, When):
            if nested:
                raise UnsupportedFeature("nested conditional effects are not supported")
            cond = set()
            if not self.condition(formula.condition, binding, cond):
                return
            c_add, c_del = set(), set()
            self.effect(formula.effect, binding, c_add, c_del, conditional, True)
            conditional.append((cond, c_add, c_del))
        else:
            raise UnsupportedFeature(f"unsupported effect {type(formula).__name__}")

    def actions(self):
        for schema in self.domain.actions:
            for binding in enumerate_bindings(schema.params, self.of_type):
                pre = set()
                if not self.condition(schema.pre, binding, pre):
                    continue
                add, delete, conditional = set(), set(), []
                self.effect(schema.effect, binding, add, delete, conditional)
                args = tuple(binding[v] for v, _ in schema.params)
                yield fact_name(schema.name, args), pre, add, delete - add, conditional


def read_pddl(domain_text: str, problem_text: str) -> ClassicalProblem:
    """Ground a classical PDDL pair (no HTN sections) into a ClassicalProblem."""
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text)
    if domain.methods or problem.subtasks:
        raise UnsupportedFeature("HTN sections found; use cthd.grounding for HDDL input")
    g = _Grounder(domain, problem)
    raw = list(g.actions())
    goal = set()
    if not g.condition(problem.goal, {}, goal):
        goal.add("__unreachable_goal")
    names = set(g.init) | goal
    for _, pre, add, delete, conditional in raw:
        names |= pre | add | delete
        for c, ca, cd in conditional:
            names |= c | ca | cd
    props = sorted(names)
    pid = {n: i for i, n in enumerate(props)}

    def ids(s):
        return frozenset(pid[n] for n in s)

    actions = []
    for name, pre, add, delete, conditional in raw:
        effects = tuple(ConditionalEffect(ids(c), ids(ca), ids(cd - ca)) for c, ca, cd in conditional)
        actions.append(make_action(len(actions), name, ids(pre), ids(add), ids(delete), effects))
    return ClassicalProblem(props, actions, ids(g.init), ids(goal), problem.name)
