# %% [markdown]
# # One round of the game
#
# Each participant draws a reward multiplier lambda, heavy tailed with
# 1/lambda distributed as u**m. With belief x about its k-1 neighbors it
# contributes when x**(k-1) * lambda >= 1, so it contributes with probability
# x**((k-1)/m). For m=4 and groups of five that probability is x itself.

# %%
import numpy as np

from aonpgg import PayoffModel, Stream, contribute_probability, decide_action, sample_lambda, update_belief

model = PayoffModel(m=4.0)
rng = Stream(2024)
lams = sample_lambda(rng, model, 10)
print(np.round(lams, 2))

# %%
for k in (2, 5, 9):
    xs = np.array([0.2, 0.5, 0.8])
    print(k, np.round(contribute_probability(xs, k, model), 4))

# %% [markdown]
# Decisions are deterministic given lambda. After the round everyone moves
# its belief toward the fraction of the *other* participants who contributed.

# %%
x, k = 0.5, 4
lam = float(sample_lambda(rng, model))
print("lambda", round(lam, 3), "action", decide_action(x, k, lam).name)
print("all others contributed:", update_belief(x, 0.3, 3, k))
print("nobody else did:      ", update_belief(x, 0.3, 0, k))
