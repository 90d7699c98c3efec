# %% [markdown]
# # Outcomes on circulant graphs
#
# Rings with few neighbors end in universal contribution; dense rings end in
# universal defection. l=4 splits runs between the two corners.

# %%
from aonpgg import BatchSpec, GraphSource, SimConfig, outcome_table, run_batch

cfg = SimConfig(max_rounds=10**7)
for l in (2, 4, 6, 8):
    batch = run_batch(BatchSpec(GraphSource("circulant", n=50, l=l), n_runs=100, cfg=cfg, master_seed=l))
    print(f"l={l}", outcome_table(batch))
