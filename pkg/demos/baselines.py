"""
Log-barrier against the comparison methods
==========================================

An entropy-regularized bandit learner and a projected full-information
gradient method on one random 3x3 game. The Euclidean method reads the
exact pseudo-gradient, so it is not a bandit algorithm.
"""

import numpy as np

from logbarrier_games import RunConfig, execute, random_matrix_game

game = random_matrix_game(3, 3, np.random.default_rng(3))
print(np.round(game.mean_loss, 3))

times = (0, 1000, 10_000, 50_000)
for algorithm in ("logbarrier", "entropy", "euclidean"):
    res = execute(RunConfig(game, 50_000, algorithm, seed=1, log_times=times))
    egs = "  ".join(f"{r.eg:.4f}" for r in res.records)
    print(f"{algorithm:>10s}: eg at t={times} -> {egs}")
