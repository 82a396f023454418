# %% [markdown]
# Splitting a search into files, losing a worker, and finishing anyway.

# %%
import tempfile

import closestring as cs
from closestring.distributed import (RunConfig, WorkQueue, coordinate, dist_solve,
                                     process_claim, root_subproblem, serialize_subproblem,
                                     split, worker_loop)
from closestring.io import random_stringset

S = random_stringset(5, 9, seed=4)
d = cs.solve_min(cs.build_model(S)).best_d
root = root_subproblem(S, "enumerate", d, domain_mode="unrestricted")
print(serialize_subproblem(root))

# %%
# a split cuts the open values of the shallowest open position into groups
for child in split(root, 3):
    print(child.id, ["".join(S.alphabet.symbol(c) for c in sorted(dom))
                     for dom in child.domains][:3])

# %%
# timeout, split, requeue until every piece is done; nothing found twice
cfg = RunConfig(t_max=1.0, k=2, workers=2, unit_nodes=200)
res = dist_solve(root, cfg)
single = cs.enumerate_all(cs.build_model(S, "enumerate", domain_mode="unrestricted", d=d))
print(len(res.witnesses), "pieces' solutions vs", single.solutions, "in one run")
assert sorted(res.witnesses) == sorted(single.witnesses)

# %%
# a worker dies between checkpoints; its claim goes back on the queue
qdir = tempfile.mkdtemp()
q = WorkQueue(qdir)
q.enqueue(root)
calls = [0]


def dies_at_500():
    calls[0] += 1
    if calls[0] > 500:
        raise KeyboardInterrupt
    return False


try:
    process_claim(q, q.claim("doomed"), RunConfig(checkpoint_nodes=100, poll_nodes=1),
                  dies_at_500)
except KeyboardInterrupt:
    pass
print("checkpointed", q.load(q.claimed()[0]).nodes, "nodes before dying")
q.recover(alive=lambda name: False)
worker_loop(q, RunConfig(checkpoint_nodes=100), "rescuer", idle_exit=True)
found = [w for r in q.read_results() for w in r.witnesses]
print(len(found), "solutions after recovery")
assert sorted(found) == sorted(single.witnesses)

# %%
# both fronts at once: optimisation from above, refutation from below
qdir = tempfile.mkdtemp()
res = coordinate(random_stringset(6, 14, seed=9), RunConfig(t_max=0.05, workers=3),
                 queue=WorkQueue(qdir))
print(res.best_d, res.witnesses, res.status)
print(open(f"{qdir}/bounds.log").read())
