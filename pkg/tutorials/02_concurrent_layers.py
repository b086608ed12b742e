# %% [markdown]
# # Concurrent layers and the smallest makespan
#
# A layer is a set of pairwise independent actions: none deletes what another
# needs or adds. All actions in a layer see the state at the start of the
# layer. In this variant of the three-task problem `a3` no longer interferes
# with `a1`, so both can run together.

# %%
import itertools

from cthd.model import apply, apply_layer, independent
from cthd.samples import three_tasks
from cthd.search import SearchConfig, cpfd_enumerate, cpfd_solve

p = three_tasks(concurrent=True)
by_name = {a.name: a for a in p.actions}
print("a1 | a3 independent:", independent(by_name["a1"], by_name["a3"]))
print("a2 | a3 independent:", independent(by_name["a2"], by_name["a3"]))

# %% [markdown]
# Independent actions give the same state whatever the order they are
# applied in, and that state matches applying the layer at once.

# %%
layer = [by_name["a1"], by_name["a3"]]
for order in itertools.permutations(layer):
    s = p.init
    for a in order:
        s = apply(s, a)
    print([a.name for a in order], s == apply_layer(p.init, layer))

# %% [markdown]
# In `literal` mode each layer holds every action that is trailing and
# applicable. `voluntary` mode may also postpone some of them. With the
# `min-makespan` objective the search deepens on the number of layers.

# %%
for mode in ("literal", "voluntary"):
    plan = cpfd_solve(p, SearchConfig(mode=mode, objective="min-makespan"))
    print(mode, plan.names(p))

# %%
print("all plans with at most 3 layers:")
for plan in cpfd_enumerate(p, SearchConfig(mode="voluntary"), 3):
    print("  ", plan.names(p))
