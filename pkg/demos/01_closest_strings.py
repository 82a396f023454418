# %% [markdown]
# Closest strings of a small DNA set: bounds, search, all solutions.

# %%
import numpy as np

import closestring as cs
from closestring.core import pwm_variable_order

S = cs.encode_strings(["ACGTACGT", "ACGAACTT", "TCGTTCGA", "ACCTACGA", "GCGTACTT"])
S.codes

# %%
# pairwise distances and the interval the answer must lie in
from closestring.core import pairwise_distances

print(pairwise_distances(S))
print("lower bound", cs.distance_lower_bound(S), "diameter", cs.hamming_diameter(S))

# %%
# column counts drive the search order: most conserved columns first
pwm = cs.build_pwm(S)
print(pwm.counts)
print("variable order", pwm_variable_order(pwm))
print("domains", ["".join(S.alphabet.symbol(c) for c in sorted(d))
                  for d in cs.position_domains(S)])

# %%
res = cs.solve_min(cs.build_model(S))
print(res.best_d, res.witnesses, res.nodes, "nodes")
for t, d in res.trace:
    print(f"  {t * 1000:8.3f} ms  d={d}")

# %%
# one below the optimum is infeasible, the optimum is not
for d in (res.best_d - 1, res.best_d):
    print(d, cs.decide(cs.build_model(S, "decide", d=d)).status)

# %%
# every closest string, with and without the column restriction
rest = cs.enumerate_all(cs.build_model(S, "enumerate", d=res.best_d))
full = cs.enumerate_all(cs.build_model(S, "enumerate", domain_mode="unrestricted",
                                       d=res.best_d))
print(len(rest.witnesses), "restricted,", len(full.witnesses), "unrestricted")
print(sorted(set(full.witnesses) - set(rest.witnesses))[:10])
print("node ratio", full.nodes / rest.nodes)

# %%
# every witness sits exactly at the optimum
radii = [cs.max_distance(np.array([S.alphabet.code(c) for c in w]), S) for w in full.witnesses]
assert set(radii) == {res.best_d}
