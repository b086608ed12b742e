"""Bring a ground HTN problem into the normal form the solvers rely on.

After :func:`normalize`

* the initial task network has exactly one node,
* every method network has a unique last node,
* no method has a precondition.

Added tasks are primitive tasks resolved by actions flagged ``dummy``.
"""

from __future__ import annotations

from .model import GroundAction, GroundHtnProblem, Method, Task, TaskNetwork

ROOT_TASK = "__root"
ROOT_METHOD = "__root_method"


def is_normalized(problem: GroundHtnProblem) -> bool:
    return len(problem.network) == 1 and all(
        not m.pre and m.last_node is not None for m in problem.methods
    )


def normalize(problem: GroundHtnProblem) -> GroundHtnProblem:
    if is_normalized(problem):
        return problem
    tasks = list(problem.tasks)
    actions = list(problem.actions)
    methods = list(problem.methods)
    network = problem.network

    def new_task(name: str, primitive: bool) -> int:
        tasks.append(Task(len(tasks), name, primitive))
        return len(tasks) - 1

    def new_dummy(name: str, pre=frozenset()) -> int:
        task = new_task(name, True)
        actions.append(GroundAction(len(actions), name, task, pre, dummy=True))
        return task

    if len(network) != 1:
        root = new_task(ROOT_TASK, False)
        methods.append(Method(len(methods), ROOT_METHOD, root, network))
        network = TaskNetwork({0: root})

    for i, m in enumerate(methods):
        net = m.network
        if m.pre:
            check = new_dummy(f"__pre_{m.name}", m.pre)
            node = net.next_id
            alpha = dict(net.alpha)
            alpha[node] = check
            edges = set(net.edges) | {(node, n) for n in net.alpha}
            net = TaskNetwork(alpha, edges)
        if len(net.last_nodes()) != 1:
            noop = new_dummy(f"__noop_{m.name}")
            node = net.next_id
            alpha = dict(net.alpha)
            alpha[node] = noop
            edges = set(net.edges) | {(n, node) for n in net.last_nodes()}
            net = TaskNetwork(alpha, edges)
        if net is not m.network:
            methods[i] = Method(m.id, m.name, m.task, net)

    return GroundHtnProblem(
        problem.propositions, tasks, actions, methods, problem.init, network, problem.name
    )
