# %% [markdown]
# # Metastable plateaus
#
# On sparse geometric graphs the total belief can hover at an intermediate
# level for a very long time: dense patches distrust, sparse patches trust.

# %%
from aonpgg import SimConfig, Stream, connected_random_geometric, run
from aonpgg.stats import metastability_report

cfg = SimConfig(max_rounds=10**6, record_stride=1000)
for seed in range(5):
    g = connected_random_geometric(50, 0.15, Stream(100 + seed))
    res = run(g, SimConfig(max_rounds=cfg.max_rounds, record_stride=1000, seed=seed))
    rep = metastability_report(res, window=100, band=2.5)
    p = rep.longest
    desc = "none" if p is None else f"level {p.level:.1f} for {p.length} rounds, exit {p.exit_round}"
    print(seed, res.converged.value, desc)
