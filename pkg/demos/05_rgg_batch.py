# %% [markdown]
# # Geometric graphs: outcomes, convergence times, heavy tails
#
# Each run gets its own connected geometric graph. Sparse graphs (r_g=0.15)
# rarely defect and often fail to settle; dense ones (r_g=0.3) defect.

# %%
import numpy as np

from aonpgg import BatchSpec, GraphSource, SimConfig, Stream, run_batch
from aonpgg.stats import belief_metric_scatter, catastrophe_ratio, log_grid, outcome_table, tail_probability

cfg = SimConfig(max_rounds=10**6)
batches = {}
for r in (0.15, 0.3):
    batches[r] = run_batch(BatchSpec(GraphSource("rgg", n=50, r_g=r), n_runs=100, cfg=cfg, master_seed=1))
    print(f"r_g={r}", outcome_table(batches[r]))

# %% [markdown]
# Survival of the convergence time. Unfinished runs count as surviving.

# %%
grid = log_grid(cfg.max_rounds, per_decade=2)
tail = tail_probability(batches[0.15].taus, grid)
print(np.column_stack([tail[:, 0].astype(int), np.round(tail[:, 1], 2)]))

# %% [markdown]
# Catastrophe ratio P(max > t) / P(sum > t) on pairs of convergence times.
# Near 1 means one huge draw explains a large total, the heavy-tail signature.
# Censored times are treated as T + 1.

# %%
taus = batches[0.15].taus
e = catastrophe_ratio(taus, t=10**5, n_pairs=len(taus) // 2, horizon=cfg.max_rounds)
print(e.p_max, e.p_sum, e.ratio)
e = catastrophe_ratio(taus, t=10**5, n_pairs=250, with_replacement=True, rng=Stream(9), horizon=cfg.max_rounds)
print(e.p_max, e.p_sum, e.ratio)

# %% [markdown]
# Denser graphs end with lower beliefs.

# %%
rep = belief_metric_scatter(list(batches.values()))
print(rep.correlation)
