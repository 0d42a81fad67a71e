"""
Sequence-form learning on a small poker-like game
=================================================

The same learner on a two-stage game: each player updates a sequence-form
policy from its own trajectory of (information set, action, loss).
"""

import numpy as np

from logbarrier_games import RunConfig, efg_exploitability, execute, kuhn_toy

game = kuhn_toy()
print("sequences per player:", game.min_treeplex.num_sequences, game.max_treeplex.num_sequences)
eg0 = efg_exploitability(game, game.uniform_profile())
print("exploitability of the uniform profile:", round(eg0, 5))

# a short run; the acceptance suite goes to 2e5 steps over 10 seeds
result = execute(RunConfig(game, 20_000, seed=0, log_times=(0, 2000, 10_000, 20_000)))
for r in result.records:
    smallest = min(r.min_prob_min, r.min_prob_max)
    print(f"t={r.t:>6d}  eg={r.eg:.5f}  smallest sequence value {smallest:.3g}")

# each treeplex step is checked against its flow constraints
print("largest constraint residual:", result.monitor.max_residual)
print("policy ratio stayed in [1/2, 2]:", result.monitor.doubling_violations == 0)
print("T0 =", result.params["T0"], " sigma' =", np.round(result.params["sigma_prime"], 3))
