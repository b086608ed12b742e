"""Reader for the typed, conjunctive subset of HDDL (and plain PDDL).

The reader produces a lifted syntax tree; :mod:`cthd.grounding` turns it into
a :class:`~cthd.model.GroundHtnProblem`.  The same tree is used by
:mod:`cthd.pddl` to read back classical encodings, which is why universal
quantifiers and conditional effects are representable here even though the
HTN grounder refuses them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import HddlSyntaxError, OrderingCycle, ResolutionError, UnsupportedFeature


# s-expressions --------------------------------------------------------------

class Symbol(str):
    """A lower-cased token remembering where it was read."""

    line: int
    column: int

    def __new__(cls, text: str, line: int = 0, column: int = 0):
        sym = super().__new__(cls, text.lower())
        sym.line = line
        sym.column = column
        return sym


class SList(list):
    line: int = 0
    column: int = 0


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def parse_sexpr(text: str) -> SList:
    """Parse one top-level s-expression, reporting positions on errors."""
    stack: list[SList] = []
    result = None
    line, line_start = 1, 0
    for match in _TOKEN.finditer(text):
        tok = match.group()
        col = match.start() - line_start + 1
        if tok[0].isspace() or tok[0] == ";":
            newlines = tok.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + tok.rfind("\n") + 1
            continue
        if result is not None:
            raise HddlSyntaxError(f"unexpected token {tok!r} after end of definition", line, col)
        if tok == "(":
            lst = SList()
            lst.line, lst.column = line, col
            stack.append(lst)
        elif tok == ")":
            if not stack:
                raise HddlSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                result = done
        else:
            if not stack:
                raise HddlSyntaxError(f"token {tok!r} outside of any expression", line, col)
            stack[-1].append(Symbol(tok, line, col))
    if stack:
        raise HddlSyntaxError("missing ')' to close expression", stack[-1].line, stack[-1].column)
    if result is None:
        raise HddlSyntaxError("empty input", 1, 1)
    return result


def _where(node) -> tuple:
    return getattr(node, "line", None), getattr(node, "column", None)


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, list):
        raise HddlSyntaxError(f"expected {what}, got {node!r}", *_where(node))
    return node


def _expect_symbol(node, what: str) -> Symbol:
    if isinstance(node, list):
        raise HddlSyntaxError(f"expected {what}, got a list", *_where(node))
    return node


# lifted syntax tree ---------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __str__(self) -> str:
        return f"({' '.join((self.predicate, *self.args))})"


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Equals:
    left: str
    right: str


@dataclass(frozen=True)
class ForAll:
    params: tuple
    body: object


@dataclass(frozen=True)
class When:
    condition: object
    effect: object


TRUE = And(())


@dataclass
class ActionSchema:
    name: str
    params: list
    pre: object = TRUE
    effect: object = TRUE


@dataclass
class TaskSchema:
    name: str
    params: list


@dataclass
class Subtask:
    label: str
    task: str
    args: tuple


@dataclass
class MethodSchema:
    name: str
    params: list
    task: str
    task_args: tuple
    pre: object = TRUE
    subtasks: list = field(default_factory=list)
    ordering: list = field(default_factory=list)


@dataclass
class LiftedDomain:
    name: str
    requirements: list = field(default_factory=list)
    types: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    tasks: dict = field(default_factory=dict)
    methods: list = field(default_factory=list)
    actions: list = field(default_factory=list)

    def is_subtype(self, child: str, parent: str) -> bool:
        seen = set()
        while child not in seen:
            if child == parent:
                return True
            seen.add(child)
            child = self.types.get(child, "object")
        return parent == "object"


@dataclass
class LiftedProblem:
    name: str
    domain: str
    objects: dict = field(default_factory=dict)
    init: list = field(default_factory=list)
    subtasks: list = field(default_factory=list)
    ordering: list = field(default_factory=list)
    goal: object = TRUE


# parsing helpers -------------------------------------------------------------

def parse_typed_list(items) -> list:
    """``a b - t c`` -> ``[(a, t), (b, t), (c, object)]``."""
    out, pending = [], []
    items = list(items)
    i = 0
    while i < len(items):
        tok = items[i]
        if isinstance(tok, list):
            raise HddlSyntaxError("unexpected list in typed list", *_where(tok))
        if tok == "-":
            if i + 1 >= len(items):
                raise HddlSyntaxError("missing type after '-'", *_where(tok))
            typ = items[i + 1]
            if isinstance(typ, list):
                if typ and typ[0] == "either":
                    raise UnsupportedFeature("'either' types are not supported")
                raise HddlSyntaxError("malformed type", *_where(typ))
            out.extend((name, str(typ)) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(str(tok))
            i += 1
    out.extend((name, "object") for name in pending)
    return out


def parse_formula(node):
    """Goal description: atoms, ``and``, ``not``, ``=``, ``forall``, ``when``.

    Disjunction, implication and existential quantification are rejected.
    """
    node = _expect_list(node, "a formula")
    if not node:
        return TRUE
    head = node[0]
    if isinstance(head, list):
        raise HddlSyntaxError("formula must start with a symbol", *_where(node))
    if head == "and":
        return And(tuple(parse_formula(p) for p in node[1:]))
    if head == "not":
        if len(node) != 2:
            raise HddlSyntaxError("'not' takes one argument", *_where(node))
        return Not(parse_formula(node[1]))
    if head == "=":
        if len(node) != 3:
            raise HddlSyntaxError("'=' takes two arguments", *_where(node))
        return Equals(str(_expect_symbol(node[1], "a term")), str(_expect_symbol(node[2], "a term")))
    if head == "forall":
        if len(node) != 3:
            raise HddlSyntaxError("malformed forall", *_where(node))
        params = tuple(parse_typed_list(_expect_list(node[1], "a parameter list")))
        return ForAll(params, parse_formula(node[2]))
    if head == "when":
        if len(node) != 3:
            raise HddlSyntaxError("malformed when", *_where(node))
        return When(parse_formula(node[1]), parse_formula(node[2]))
    if head in ("or", "imply", "exists", "increase", "decrease", "assign"):
        raise UnsupportedFeature(f"'{head}' is not supported (line {head.line})")
    args = []
    for arg in node[1:]:
        args.append(str(_expect_symbol(arg, "a term")))
    return Atom(str(head), tuple(args))


def _keyword_pairs(items, owner: str) -> dict:
    out = {}
    i = 0
    while i < len(items):
        key = items[i]
        if isinstance(key, list) or not key.startswith(":"):
            raise HddlSyntaxError(f"expected a keyword in {owner}", *_where(key))
        if i + 1 >= len(items):
            raise HddlSyntaxError(f"keyword {key} lacks a value", *_where(key))
        out[str(key)] = items[i + 1]
        i += 2
    return out


def _parse_task_ref(node) -> tuple:
    node = _expect_list(node, "a task")
    if not node:
        raise HddlSyntaxError("empty task reference", *_where(node))
    return str(_expect_symbol(node[0], "a task name")), tuple(str(_expect_symbol(a, "a term")) for a in node[1:])


def _parse_subtasks(node, ordered: bool) -> tuple:
    node = _expect_list(node, "a subtask list")
    if not node:
        return [], []
    entries = node[1:] if node[0] == "and" else [node]
    subtasks = []
    for i, entry in enumerate(entries):
        entry = _expect_list(entry, "a subtask")
        if len(entry) == 2 and not isinstance(entry[0], list) and isinstance(entry[1], list):
            label, (task, args) = str(entry[0]), _parse_task_ref(entry[1])
        else:
            label, (task, args) = f"_st{i}", _parse_task_ref(entry)
        subtasks.append(Subtask(label, task, args))
    ordering = []
    if ordered:
        ordering = [(a.label, b.label) for a, b in zip(subtasks, subtasks[1:])]
    return subtasks, ordering


def _parse_ordering(node) -> list:
    node = _expect_list(node, "an ordering")
    if not node:
        return []
    entries = node[1:] if node[0] == "and" else [node]
    pairs = []
    for entry in entries:
        entry = _expect_list(entry, "an ordering constraint")
        if len(entry) != 3 or entry[0] not in ("<", ">"):
            raise HddlSyntaxError("ordering constraints must be (< a b)", *_where(entry))
        a, b = str(entry[1]), str(entry[2])
        pairs.append((a, b) if entry[0] == "<" else (b, a))
    return pairs


def _check_ordering(labels: list, ordering: list, where: str) -> None:
    known = set(labels)
    for a, b in ordering:
        for lab in (a, b):
            if lab not in known:
                raise ResolutionError(f"{where}: ordering references unknown subtask {lab!r}")
    succ = {lab: [] for lab in labels}
    for a, b in ordering:
        succ[a].append(b)
    state = dict.fromkeys(labels, 0)

    def visit(lab, path):
        state[lab] = 1
        path.append(lab)
        for nxt in succ[lab]:
            if state[nxt] == 1:
                raise OrderingCycle(f"{where}: ordering is cyclic", path[path.index(nxt):] + [nxt])
            if state[nxt] == 0:
                visit(nxt, path)
        path.pop()
        state[lab] = 2

    for lab in labels:
        if state[lab] == 0:
            visit(lab, [])


def _subtask_block(body: dict, owner: str) -> tuple:
    keys = [k for k in (":subtasks", ":tasks", ":ordered-subtasks", ":ordered-tasks") if k in body]
    if len(keys) > 1:
        raise HddlSyntaxError(f"{owner}: several subtask blocks")
    subtasks, ordering = [], []
    if keys:
        subtasks, ordering = _parse_subtasks(body[keys[0]], keys[0].startswith(":ordered"))
    if ":ordering" in body:
        ordering = ordering + _parse_ordering(body[":ordering"])
    if ":constraints" in body and body[":constraints"]:
        raise UnsupportedFeature(f"{owner}: :constraints is not supported")
    _check_ordering([s.label for s in subtasks], ordering, owner)
    return subtasks, ordering


# domain / problem ------------------------------------------------------------

def _header(tree, kind: str) -> tuple:
    if len(tree) < 2 or tree[0] != "define":
        raise HddlSyntaxError("expected (define ...)", *_where(tree))
    head = _expect_list(tree[1], f"({kind} name)")
    if len(head) != 2 or head[0] != kind:
        raise HddlSyntaxError(f"expected ({kind} name)", *_where(head))
    return str(head[1]), tree[2:]


def parse_domain(text: str) -> LiftedDomain:
    tree = parse_sexpr(text)
    name, sections = _header(tree, "domain")
    dom = LiftedDomain(name)
    for sec in sections:
        sec = _expect_list(sec, "a domain section")
        if not sec:
            raise HddlSyntaxError("empty section", *_where(sec))
        key = sec[0]
        if key == ":requirements":
            dom.requirements = [str(r) for r in sec[1:]]
        elif key == ":types":
            for child, parent in parse_typed_list(sec[1:]):
                dom.types[child] = parent
        elif key == ":constants":
            for obj, typ in parse_typed_list(sec[1:]):
                dom.constants[obj] = typ
        elif key == ":predicates":
            for pred in sec[1:]:
                pred = _expect_list(pred, "a predicate declaration")
                dom.predicates[str(pred[0])] = parse_typed_list(pred[1:])
        elif key == ":task":
            tname = str(_expect_symbol(sec[1], "a task name"))
            body = _keyword_pairs(sec[2:], f"task {tname}")
            dom.tasks[tname] = TaskSchema(tname, parse_typed_list(body.get(":parameters", [])))
        elif key == ":method":
            dom.methods.append(_parse_method(sec))
        elif key == ":action":
            aname = str(_expect_symbol(sec[1], "an action name"))
            body = _keyword_pairs(sec[2:], f"action {aname}")
            dom.actions.append(
                ActionSchema(
                    aname,
                    parse_typed_list(body.get(":parameters", [])),
                    parse_formula(body[":precondition"]) if ":precondition" in body else TRUE,
                    parse_formula(body[":effect"]) if ":effect" in body else TRUE,
                )
            )
        elif key in (":functions", ":derived", ":durative-action", ":process", ":event"):
            raise UnsupportedFeature(f"domain section {key} is not supported (line {key.line})")
        else:
            raise HddlSyntaxError(f"unknown domain section {key}", *_where(key))
    _check_domain(dom)
    return dom


def _parse_method(sec) -> MethodSchema:
    mname = str(_expect_symbol(sec[1], "a method name"))
    body = _keyword_pairs(sec[2:], f"method {mname}")
    if ":task" not in body:
        raise HddlSyntaxError(f"method {mname} lacks :task", *_where(sec))
    task, task_args = _parse_task_ref(body[":task"])
    subtasks, ordering = _subtask_block(body, f"method {mname}")
    return MethodSchema(
        mname,
        parse_typed_list(body.get(":parameters", [])),
        task,
        task_args,
        parse_formula(body[":precondition"]) if ":precondition" in body else TRUE,
        subtasks,
        ordering,
    )


def _check_domain(dom: LiftedDomain) -> None:
    for typ in list(dom.types.values()) + list(dom.constants.values()):
        if typ != "object" and typ not in dom.types:
            raise ResolutionError(f"undeclared type {typ!r}")
    action_names = {a.name for a in dom.actions}
    for m in dom.methods:
        if m.task not in dom.tasks:
            raise ResolutionError(f"method {m.name} decomposes undeclared task {m.task!r}")
        for st in m.subtasks:
            if st.task not in dom.tasks and st.task not in action_names:
                raise ResolutionError(f"method {m.name} uses undeclared task {st.task!r}")


def parse_problem(text: str) -> LiftedProblem:
    tree = parse_sexpr(text)
    name, sections = _header(tree, "problem")
    prob = LiftedProblem(name, "")
    for sec in sections:
        sec = _expect_list(sec, "a problem section")
        if not sec:
            raise HddlSyntaxError("empty section", *_where(sec))
        key = sec[0]
        if key == ":domain":
            prob.domain = str(sec[1])
        elif key == ":requirements":
            pass
        elif key == ":objects":
            for obj, typ in parse_typed_list(sec[1:]):
                prob.objects[obj] = typ
        elif key == ":init":
            for fact in sec[1:]:
                atom = parse_formula(fact)
                if not isinstance(atom, Atom):
                    raise UnsupportedFeature(f"only positive atoms are allowed in :init (line {fact.line})")
                prob.init.append(atom)
        elif key == ":htn":
            body = _keyword_pairs(sec[1:], ":htn")
            params = body.get(":parameters", [])
            if params:
                raise UnsupportedFeature(":htn parameters are not supported")
            prob.subtasks, prob.ordering = _subtask_block(body, "initial task network")
        elif key == ":goal":
            prob.goal = parse_formula(sec[1]) if len(sec) > 1 else TRUE
        elif key in (":metric", ":constraints"):
            raise UnsupportedFeature(f"problem section {key} is not supported")
        else:
            raise HddlSyntaxError(f"unknown problem section {key}", *_where(key))
    return prob
