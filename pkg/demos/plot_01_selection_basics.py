"""
Picking the next reaction two ways
==================================

Inverse transform walks a cumulative sum. Acceptance-rejection gives every
reaction its own draw and keeps the best-rated survivor. Both pick index
``j`` from a row of propensities, and this walk-through puts them side by
side on a three-reaction row.
"""

# %%
# A hand-sized row. Reaction 2 carries half the total propensity.
import numpy as np

from arssa import oracle, select_ar, select_it
from arssa.rng import for_realization

D = np.array([1.0, 1.0, 2.0])

# %%
# Inverse transform: u2 = 0.6 lands past the first two bins (0.25 + 0.25).
print("IT, u2=0.6 ->", select_it.inverse_transform_select(D, 0.6))
print("IT, u2=0.0 ->", select_it.inverse_transform_select(D, 0.0))

# %%
# Acceptance-rejection with T = max D. Each reaction is scored
# u/D_j where u = v_j * T; anything with u >= D_j gets the sentinel 1.0.
T = select_ar.compute_threshold(D)
v = np.array([0.9, 0.3, 0.4])
ratings = select_ar.election_step(D, T, v)
print("ratings:", ratings, "-> winner", select_ar.selection_step(ratings))

# %%
# With T = 2 max D the same draws become stricter, and all three can miss.
ratings = select_ar.election_step(D, 2 * T, np.array([0.9, 0.8, 0.6]))
print("w=2 ratings:", ratings, "-> winner", select_ar.selection_step(ratings))

# %%
# Draws come from a counter-based generator: the value for
# (seed, realization, purpose, counter) never depends on call order.
s = for_realization(seed=7, k=0, purpose="election")
print("first three election draws:", s.uniforms([0, 1, 2]))
print("counter 1 again:           ", s.uniform(1))

# %%
# The exact law of the acceptance-rejection pick differs from D / sum(D).
law = oracle.win_probabilities(D, T)
print("AR win probabilities:", np.round(law.per_reaction, 6), "reject", law.reject)
print("IT probabilities:    ", oracle.it_probabilities(D).per_reaction)

# %%
# A million batched elections agree with the exact law, not with D / sum(D).
counts, rejected = select_ar.tally_identical_rows(D, select_ar.ThresholdPolicy(1.0),
                                                  seed=1, K=1000, total=10**6)
print("empirical AR:        ", np.round(counts / 10**6, 4), "rejected", rejected)
