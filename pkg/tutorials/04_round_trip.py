# %% [markdown]
# # Round trip: encode, solve classically, decode, validate
#
# `roundtrip` chains the whole pipeline. It uses the built-in breadth-first
# solver, or reads a plan produced by an outside planner.

# %%
from cthd.encoding import EncodingConfig
from cthd.pipeline import decode_names, format_plan, roundtrip, validate
from cthd.samples import nested

p = nested()
result = roundtrip(p, EncodingConfig(1, deepening=(1, 6)))
print("bounds tried:", result.tried)
print("classical plan length:", len(result.classical_plan))
print(format_plan(result.plan, p))
print(result.verdict)

# %% [markdown]
# The classical plan uses the encoded action names. Decoding follows which
# task node sits in which holder, so the layered plan comes with a full
# decomposition trace.

# %%
names = [result.encoding.problem.actions[a].name for a in result.classical_plan]
for n in names:
    print("  ", n)

# %%
plan = decode_names(names, result.encoding)
print([s.kind for s in plan.trace])
print(validate(p, plan))

# %% [markdown]
# With a plan from an outside planner (one action per line, `(name args)`
# form), pass it as `plan_text` and fix the bound.

# %%
text = "\n".join("(" + n.replace("(", " ").replace(",", " ").rstrip(")") + ")" for n in names)
external = roundtrip(p, EncodingConfig(result.bound), plan_text=text)
print(external.verdict)
