# %% [markdown]
# How much does the PWM ordering save over smallest-domain-first?
# A cut-down version of the benchmark grid; the CLI runs the full one:
#
#     closestring bench --jobs 4 --out bench.csv

# %%
import numpy as np

from closestring.bench import bench_grid
from closestring.io import write_bench_csv

rows = bench_grid(ns=(3, 5), lengths=(10,), seeds=5)
print(write_bench_csv(rows[:4]))

# %%
# nodes to prove optimality, per instance
cert = {(r.instance_id, r.heuristic): r for r in rows if r.mode == "cert"}
ids = sorted({i for i, _ in cert})
pwm = np.array([cert[i, "pwm"].nodes for i in ids])
sdf = np.array([cert[i, "sdf"].nodes for i in ids])
for i, a, b in zip(ids, pwm, sdf):
    print(f"{i:12s} pwm {a:6d}  sdf {b:6d}  ratio {b / a:5.2f}")
print("median ratio", np.median(sdf / pwm))

# %%
# the first incumbent usually arrives long before the search ends
for i in ids[:5]:
    r = cert[i, "pwm"]
    first = r.incumbent_times[0] / r.wall_time
    print(f"{i:12s} first incumbent at {first:.1%} of the run, {len(r.incumbent_times)} in all")
