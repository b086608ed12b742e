# %% [markdown]
# # Validating layered plans
#
# The validator replays the decomposition trace of a plan: method choices,
# actions and layer switches. It reports the first problem it finds along
# with the step where it happened.

# %%
from cthd.model import LayeredPlan, TraceStep
from cthd.pipeline import parse_plan, validate
from cthd.samples import three_tasks
from cthd.search import SearchConfig, cpfd_solve

p = three_tasks(concurrent=False)
good = cpfd_solve(p, SearchConfig())
print(validate(p, good))

# %% [markdown]
# Swap two actions in the trace and the second one no longer applies.

# %%
steps = list(good.trace)
actions = [i for i, s in enumerate(steps) if s.kind == "action"]
names = {a.id: a.name for a in p.actions}
print([names[steps[i].resolver] for i in actions])

i, j = actions[0], actions[1]
steps[i], steps[j] = steps[j], steps[i]
try:
    print(validate(p, LayeredPlan.from_trace(p, steps)))
except Exception as exc:  # a broken trace may not even rebuild layers
    print(type(exc).__name__, exc)

# %% [markdown]
# Stopping the trace before `a3` leaves tasks unresolved. A switch with
# nothing in its layer is rejected too.

# %%
stop = next(i for i, s in enumerate(good.trace) if s.kind == "action" and names[s.resolver] == "a3")
cut = list(good.trace[:stop])
print(validate(p, LayeredPlan(good.layers[:2], cut)))
print(validate(p, LayeredPlan(good.layers, cut + [TraceStep("switch"), TraceStep("switch")])))

# %% [markdown]
# Plans in the text format only list layers. Without a trace there is
# nothing to replay, so validation refuses them.

# %%
from cthd.errors import MissingTrace
from cthd.pipeline import format_plan

text = format_plan(good, p)
print(text)
try:
    validate(p, parse_plan(text, p))
except MissingTrace as exc:
    print("MissingTrace:", exc)
