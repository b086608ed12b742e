# %% [markdown]
# # Parsing an HDDL problem and solving it
#
# A problem comes in as two HDDL texts, a domain and a problem. `load` parses
# and grounds them; `normalize` adds a single root task, a unique last node
# per method and turns method preconditions into small helper actions. Every
# other part of the library works on the normalized problem.

# %%
from cthd.grounding import load
from cthd.normalize import normalize
from cthd.samples import three_tasks_text
from cthd.search import SearchConfig, cpfd_solve

domain, problem = three_tasks_text(concurrent=False)
print(domain)

# %%
raw = load(domain, problem)
p = normalize(raw)
print(f"{len(raw.tasks)} tasks before normalizing, {len(p.tasks)} after")
print("actions:", [a.name for a in p.actions])

# %% [markdown]
# Dummy actions (names starting with `__`) never show up in a returned plan.
# Here `a2` needs `p1`, which only `a1` provides, and `a3` removes `p2`, which
# `a2` needs, so only one ordering works.

# %%
plan = cpfd_solve(p, SearchConfig(mode="literal", objective="first"))
for i, layer in enumerate(plan.names(p)):
    print(i, layer)
print("makespan", plan.makespan)

# %% [markdown]
# An unsolvable problem returns `None` instead of raising. Budgets
# (`node_limit`, `time_limit`) raise `ResourceExhausted` when they run out.

# %%
from cthd.errors import ResourceExhausted

try:
    cpfd_solve(p, SearchConfig(node_limit=1))
except ResourceExhausted as exc:
    print("budget hit:", exc)
