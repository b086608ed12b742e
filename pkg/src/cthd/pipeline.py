"""Decode classical plans, validate layered plans, and read/write plan files."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .encoding import CthdEncoding
from .errors import MissingTrace, UnknownAction
from .model import GroundHtnProblem, LayeredPlan, TraceStep, erase_dummies, independent, trace_layers

REASONS = (
    "NotTrailing",
    "Inapplicable",
    "NotIndependent",
    "UnresolvedTasks",
    "LayerMismatch",
    "EmptyLayer",
    "OrderViolation",
    "WrongTask",
    "BadTrace",
)


# decoding ------------------------------------------------------------------------

def decode(plan, enc: CthdEncoding) -> LayeredPlan:
    """Turn a classical plan (action ids) over ``enc`` into a layered plan with trace.

    Holder contents are tracked to recover which task node each encoded
    action touches; no HTN semantics are checked here (see :func:`validate`).
    """
    source = enc.source
    (root,) = source.network.alpha
    at = {0: root}
    counter = source.network.next_id
    trace: list = []
    open_layer = False
    for step, a in enumerate(plan):
        if not 0 <= a < len(enc.origin):
            raise UnknownAction(f"step {step}: action id {a} is not part of the encoding")
        origin = enc.origin[a]
        if origin.kind == "method":
            m = source.methods[origin.source]
            node = at.get(origin.holders[0])
            if node is None:
                raise UnknownAction(f"step {step}: holder th{origin.holders[0]} holds no task")
            locals_ = sorted(m.network.alpha)
            children = tuple(range(counter, counter + len(locals_)))
            counter += len(locals_)
            ids = dict(zip(locals_, children))
            last = m.last_node
            others = [n for n in locals_ if n != last]
            at[origin.holders[0]] = ids[last]
            for n, h in zip(others, origin.holders[1:]):
                at[h] = ids[n]
            trace.append(TraceStep("method", node, m.id, children))
        elif origin.kind == "primitive":
            node = at.pop(origin.holders[0], None)
            if node is None:
                raise UnknownAction(f"step {step}: holder th{origin.holders[0]} holds no task")
            trace.append(TraceStep("action", node, origin.source))
            open_layer = True
        else:
            if open_layer:
                trace.append(TraceStep("switch"))
            open_layer = False
    if open_layer:
        trace.append(TraceStep("switch"))
    return LayeredPlan.from_trace(source, trace)


def decode_names(names, enc: CthdEncoding) -> LayeredPlan:
    ids = enc.problem.action_ids
    plan = []
    for n in names:
        if n not in ids:
            raise UnknownAction(f"unknown encoded action {n}")
        plan.append(ids[n])
    return decode(plan, enc)


# validation -------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: str | None = None
    step: int | None = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        where = "" if self.step is None else f" at step {self.step}"
        return f"invalid: {self.reason}{where}: {self.message}"


VALID = Verdict(True)


def _invalid(reason: str, step: int | None, message: str) -> Verdict:
    return Verdict(False, reason, step, message)


def validate(problem: GroundHtnProblem, plan: LayeredPlan) -> Verdict:
    """Replay ``plan.trace`` against ``problem`` (normalized or not).

    An action is checked against the state at the start of its layer, for
    independence with the actions already in the layer, and for being
    trailing when it is added.  Ordering constraints between primitive
    nodes (including inherited ones) must map to strictly increasing layers.
    """
    if plan.trace is None:
        raise MissingTrace("validation needs the decomposition trace carried by the plan")
    alpha = dict(problem.network.alpha)
    edges = set(problem.network.edges)
    ever = set(edges)  # every precedence edge seen, plus parent -> child links
    used = set(alpha)
    state = problem.init
    layer: list = []
    resolved_now: set = set()
    layer_of: dict = {}
    layer_index = 0

    def preds(n):
        return [u for u, v in edges if v == n]

    def close_layer():
        nonlocal state, layer, resolved_now, layer_index, edges
        add, delete = set(), set()
        for a in layer:
            add |= a.add
            delete |= a.delete
        state = (state - delete) | add
        for n in resolved_now:
            del alpha[n]
        edges = {e for e in edges if e[0] not in resolved_now and e[1] not in resolved_now}
        layer, resolved_now = [], set()
        layer_index += 1

    for i, step in enumerate(plan.trace):
        if step.kind == "switch":
            if not layer:
                return _invalid("EmptyLayer", i, "switch with an empty layer")
            close_layer()
            continue
        if step.kind not in ("method", "action"):
            return _invalid("BadTrace", i, f"unknown step kind {step.kind!r}")
        n = step.node
        if n not in alpha or n in resolved_now or preds(n):
            return _invalid("NotTrailing", i, f"node {n} is not an unresolved trailing node")
        task = problem.tasks[alpha[n]]
        if step.kind == "method":
            if not isinstance(step.resolver, int) or not 0 <= step.resolver < len(problem.methods):
                return _invalid("BadTrace", i, f"unknown method {step.resolver!r}")
            m = problem.methods[step.resolver]
            if task.primitive or m.task != task.id:
                return _invalid("WrongTask", i, f"{m.name} does not decompose {task.name}")
            if not m.pre <= state:
                return _invalid("Inapplicable", i, f"method {m.name} precondition fails")
            locals_ = sorted(m.network.alpha)
            if len(step.children) != len(locals_) or used & set(step.children) or len(set(step.children)) != len(locals_):
                return _invalid("BadTrace", i, "children must be fresh and match the method network")
            ids = dict(zip(locals_, step.children))
            succ = [v for u, v in edges if u == n]
            del alpha[n]
            edges = {e for e in edges if n not in e}
            for local, c in ids.items():
                alpha[c] = m.network.alpha[local]
                ever.add((n, c))
                edges.update((c, s) for s in succ)
            edges.update((ids[u], ids[v]) for u, v in m.network.edges)
            ever |= edges
            used |= set(step.children)
            continue
        if not isinstance(step.resolver, int) or not 0 <= step.resolver < len(problem.actions):
            return _invalid("BadTrace", i, f"unknown action {step.resolver!r}")
        a = problem.actions[step.resolver]
        if task.compound or a.task != task.id:
            return _invalid("WrongTask", i, f"{a.name} does not resolve {task.name}")
        if not a.pre <= state:
            return _invalid("Inapplicable", i, f"{a.name} is not applicable at the start of its layer")
        for b in layer:
            if b.id == a.id or not independent(a, b):
                return _invalid("NotIndependent", i, f"{a.name} interferes with {b.name}")
        layer.append(a)
        resolved_now.add(n)
        layer_of[n] = layer_index
    if layer:
        close_layer()
    if alpha:
        names = sorted(problem.tasks[t].name for t in alpha.values())
        return _invalid("UnresolvedTasks", None, f"tasks left: {names}")

    # happens-before over everything ever ordered
    succ: dict = {}
    for u, v in ever:
        succ.setdefault(u, []).append(v)
    for u, lu in layer_of.items():
        seen, stack = set(), [u]
        while stack:
            for w in succ.get(stack.pop(), ()):
                if w in seen:
                    continue
                seen.add(w)
                stack.append(w)
                if w in layer_of and layer_of[w] <= lu:
                    return _invalid("OrderViolation", None, f"node {w} must come after node {u}")
    expected = erase_dummies(problem, trace_layers(plan.trace))
    if [sorted(x) for x in expected] != [list(x) for x in plan.layers]:
        return _invalid("LayerMismatch", None, "layers do not match the trace")
    return VALID


# plan files ------------------------------------------------------------------------

def _split_top(text: str) -> list:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur).strip())
    return parts


def format_plan(plan: LayeredPlan, problem: GroundHtnProblem) -> str:
    lines = [f";; makespan {plan.makespan}"]
    lines += ["{" + ", ".join(layer) + "}" for layer in plan.names(problem)]
    return "\n".join(lines) + "\n"


def parse_plan(text: str, problem: GroundHtnProblem) -> LayeredPlan:
    """Read the text format; the result carries no trace."""
    index = {a.name: a.id for a in problem.actions}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not (line.startswith("{") and line.endswith("}")):
            raise ValueError(f"line {lineno}: expected a layer in braces")
        layer = []
        for name in _split_top(line[1:-1]):
            if name not in index:
                raise UnknownAction(f"line {lineno}: unknown action {name}")
            layer.append(index[name])
        layers.append(layer)
    return LayeredPlan(layers)


def plan_to_json(plan: LayeredPlan, problem: GroundHtnProblem) -> str:
    data = {
        "problem": problem.name,
        "makespan": plan.makespan,
        "layers": plan.names(problem),
        "trace": None if plan.trace is None else [s.as_dict() for s in plan.trace],
    }
    return json.dumps(data, indent=2)


def plan_from_json(text: str, problem: GroundHtnProblem) -> LayeredPlan:
    """Accepts the plan object itself or the ``solve``/``roundtrip`` JSON that wraps it."""
    data = json.loads(text)
    if isinstance(data, dict) and isinstance(data.get("plan"), dict):
        data = data["plan"]
    if not isinstance(data, dict) or "layers" not in data:
        raise ValueError("JSON plan needs a 'layers' list")
    index = {a.name: a.id for a in problem.actions}
    layers = []
    for layer in data["layers"]:
        for name in layer:
            if name not in index:
                raise UnknownAction(f"unknown action {name}")
        layers.append([index[n] for n in layer])
    trace = data.get("trace")
    return LayeredPlan(layers, None if trace is None else [TraceStep.from_dict(s) for s in trace])


# encode -> classical search -> decode -> validate ---------------------------------

@dataclass
class RoundTrip:
    plan: LayeredPlan | None
    bound: int | None
    encoding: CthdEncoding | None
    classical_plan: list | None
    verdict: Verdict | None
    tried: tuple = ()

    @property
    def solved(self) -> bool:
        return self.plan is not None


def roundtrip(
    problem: GroundHtnProblem,
    cfg,
    solver: str = "bfs",
    node_limit: int | None = None,
    time_limit: float | None = None,
    plan_text: str | None = None,
) -> RoundTrip:
    """Encode ``problem`` (normalized), solve the classical problem, decode and validate.

    With ``cfg.deepening = (lo, hi)`` bounds ``lo..hi`` are tried in turn and
    the first solvable one is kept.  ``plan_text`` replaces the built-in
    solver with a plan produced elsewhere (fixed bound only).
    """
    from .encoding import EncodingConfig, encode
    from .strips import read_plan, solve_bfs, solve_greedy

    if isinstance(cfg, int):
        cfg = EncodingConfig(cfg)
    if solver not in ("bfs", "greedy"):
        raise ValueError("solver must be 'bfs' or 'greedy'")
    bounds = range(cfg.deepening[0], cfg.deepening[1] + 1) if cfg.deepening else [cfg.bound]
    if plan_text is not None and cfg.deepening:
        raise ValueError("an external plan needs a fixed bound")
    tried = []
    enc = None
    for b in bounds:
        tried.append(b)
        enc = encode(problem, EncodingConfig(b, cfg.conditional_effects, cfg.compile_threshold))
        if plan_text is not None:
            classical = read_plan(plan_text, enc.problem)
        elif solver == "bfs":
            classical = solve_bfs(enc.problem, node_limit, time_limit)
        else:
            classical = solve_greedy(enc.problem, node_limit, time_limit, enc.switch_ids())
        if classical is not None:
            plan = decode(classical, enc)
            return RoundTrip(plan, b, enc, classical, validate(problem, plan), tuple(tried))
    return RoundTrip(None, None, enc, None, None, tuple(tried))
