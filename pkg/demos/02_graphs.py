# %% [markdown]
# # Interaction graphs
#
# Two families: connected random geometric graphs in the unit square and
# circulant rings where every vertex links to its l nearest neighbors.

# %%
from aonpgg import Stream, circulant, closed_neighborhood, compute_metrics, connected_random_geometric

for l in (2, 4, 6, 8):
    print("circulant l=%d" % l, compute_metrics(circulant(50, l)))

# %% [markdown]
# Connected geometric graphs are drawn by rejection. Near r_g = 0.15 only a
# tiny fraction of draws with 50 points are connected, so expect thousands
# of attempts.

# %%
for r in (0.15, 0.3):
    g = connected_random_geometric(50, r, Stream(5))
    print(f"r_g={r} attempts={g.attempts}", compute_metrics(g))

# %%
g = connected_random_geometric(50, 0.3, Stream(5))
print("players when vertex 0 is focal:", closed_neighborhood(g, 0))
