# %% [markdown]
# # Compiling to classical planning
#
# The encoder turns a normalized problem into a STRIPS problem (with
# conditional effects unless asked otherwise). A fixed number of task holders
# `th0..th{b-1}` stands in for the open task network, so the bound `b` caps
# how many unresolved tasks can be open at once.

# %%
from cthd.encoding import EncodingConfig, crescent_count, encode, unordered_count
from cthd.pddl import read_pddl, write_pddl
from cthd.samples import three_tasks

p = three_tasks(concurrent=True)
enc = encode(p, EncodingConfig(bound=4))
print(enc.stats)

# %% [markdown]
# Method actions place the subtasks of a method in holders listed in
# increasing order after the first one. That keeps the count of method
# actions down compared with listing every ordering.

# %%
for k in range(1, 5):
    print(f"k={k} b=6  increasing={crescent_count(k, 6):4d}  any order={unordered_count(k, 6):4d}")

# %% [markdown]
# Write the encoding as PDDL for an external planner. Reading the files back
# gives the same ground problem.

# %%
domain, problem = write_pddl(enc)
print(domain[:600], "...")
again = read_pddl(domain, problem)
print("same problem after re-reading:", again.canonical() == enc.problem.canonical())

# %% [markdown]
# Planners without conditional effects need the compiled form, where the
# layer switch comes in one variant per subset of holders. That grows as
# `2**b`, so there is a threshold.

# %%
from cthd.errors import CompileThresholdExceeded

compiled = encode(p, EncodingConfig(bound=4, conditional_effects=False))
print("switch variants:", compiled.stats["switch_operators"])
try:
    encode(p, EncodingConfig(bound=10, conditional_effects=False))
except CompileThresholdExceeded as exc:
    print("refused:", exc)
