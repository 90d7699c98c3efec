# %% [markdown]
# # A single run
#
# Beliefs start uniform in [0, 1). Every round a uniformly drawn focal vertex
# and its neighbors play. The run stops once every belief sits in the same
# corner, within eps_stop of 0 or 1.

# %%
from aonpgg import SimConfig, Stream, circulant, connected_random_geometric, run

cfg = SimConfig(alpha=0.3, m=4.0, eps_stop=1e-4, max_rounds=10**6, seed=3, record_stride=1000)
res = run(circulant(50, 4), cfg)
print(res.converged, res.tau, round(res.final_mean_belief, 5))

# %% [markdown]
# The recorded series holds (round, total belief) pairs.

# %%
print(res.series[:5])
print(res.series[-3:])

# %%
g = connected_random_geometric(50, 0.15, Stream(11))
res = run(g, cfg)
print(res.converged, res.tau, round(res.final_mean_belief, 3))
