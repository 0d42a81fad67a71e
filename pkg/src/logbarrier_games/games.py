"""Small built-in games used by the demos and tests."""

import itertools

import numpy as np

from .efg import ExtensiveFormGame, State
from .matrix import MatrixGame


def matching_pennies(feedback_mode="bernoulli"):
    return MatrixGame([[0.0, 1.0], [1.0, 0.0]], feedback_mode)


def random_matrix_game(num_actions_min, num_actions_max, rng, feedback_mode="bernoulli"):
    """Loss means drawn uniformly from [0, 1]."""
    return MatrixGame(rng.random((num_actions_min, num_actions_max)), feedback_mode)


def embed_matrix(game):
    """The matrix game as a one-state extensive-form game of horizon 1."""
    root = State("root", 1, "x", "y", np.array(game.mean_loss))
    return ExtensiveFormGame(1, [root], "root", game.feedback_mode)


def two_stage_toy(feedback_mode="bernoulli", seed=7):
    """Horizon-2 game with a chance move between the stages.

    The min player only remembers its own first action, giving 6 min
    sequences (3 free variables, 8 deterministic policies). The max player
    sees the chance outcome: 4 depth-2 infosets, 32 deterministic policies.
    """
    rng = np.random.default_rng(seed)
    states = []
    transitions = {}
    for a, b in itertools.product(range(2), range(2)):
        p = 0.25 + 0.5 * rng.random()
        transitions[(a, b)] = [(f"s{a}{b}0", p), (f"s{a}{b}1", 1.0 - p)]
    states.append(State("root", 1, "x0", "y0", rng.random((2, 2)), transitions))
    for a, b, k in itertools.product(range(2), range(2), range(2)):
        states.append(State(f"s{a}{b}{k}", 2, f"x_a{a}", f"y_b{b}_k{k}", rng.random((2, 2))))
    return ExtensiveFormGame(2, states, "root", feedback_mode)


def kuhn_toy(feedback_mode="bernoulli"):
    """A Kuhn-poker-flavoured horizon-2 game with losses rescaled into [0, 1].

    Depth 1: each player commits to a small (0) or big (1) ante, at a flat
    loss of 1/2. Chance then deals two distinct cards out of three. Depth 2:
    each player sees both antes and its own card and chooses fold (0) or
    call (1). Raw loss for min: both call, the lower card loses the pot
    ``1 + a + b``; a lone folder loses 1; both folding is a draw. Raw loss
    ``r`` in [-3, 3] maps to ``(r + 3) / 6``.
    """
    deals = list(itertools.permutations(range(3), 2))
    transitions = {}
    states = []
    for a, b in itertools.product(range(2), range(2)):
        transitions[(a, b)] = [(f"d{a}{b}_{cm}{cx}", 1.0 / len(deals)) for cm, cx in deals]
    states.append(State("root", 1, "x_ante", "y_ante", np.full((2, 2), 0.5), transitions))
    for a, b in itertools.product(range(2), range(2)):
        pot = 1 + a + b
        for cm, cx in deals:
            sign = 1.0 if cm < cx else -1.0
            raw = np.array([[0.0, 1.0], [-1.0, sign * pot]])
            states.append(State(f"d{a}{b}_{cm}{cx}", 2, f"x{a}{b}_c{cm}", f"y{a}{b}_c{cx}",
                                (raw + 3.0) / 6.0))
    return ExtensiveFormGame(2, states, "root", feedback_mode)
