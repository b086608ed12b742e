# %% [markdown]
# # Benchmarking and IPC scores
#
# Each system earns `best / own` per problem, where `best` is the lowest
# cost any system reached. Unsolved problems earn nothing, and the result is
# the average over the problem set.

# %%
import tempfile
from pathlib import Path

from cthd.bench import ScoreTable, ipc_score, read_manifest, records_to_csv, run_bench
from cthd.generators import instances

print(ipc_score({"fast": [5, 7, None], "slow": [10, 7, 3]}))

# %% [markdown]
# Random instances make a quick benchmark set. A manifest lists one
# `domain problem [bound]` per line, with paths relative to the manifest.

# %%
root = Path(tempfile.mkdtemp())
lines = []
for inst in instances(6, start=50):
    (root / f"d{inst.seed}.hddl").write_text(inst.domain)
    (root / f"p{inst.seed}.hddl").write_text(inst.problem_text)
    lines.append(f"d{inst.seed}.hddl p{inst.seed}.hddl")
(root / "manifest.txt").write_text("\n".join(lines) + "\n")

jobs = read_manifest(root / "manifest.txt")
records = run_bench(jobs, ("cpfd", "cthd"), {"deepen": (1, 5), "node_limit": 200_000})
for r in records:
    print(f"{r.problem:<12} {r.system:<5} {r.status:<9} makespan={r.makespan}")

# %%
print(ScoreTable.from_records(records).format())
print(records_to_csv(records).splitlines()[0])
