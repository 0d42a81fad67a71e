"""Two-player zero-sum extensive-form games with perfect recall.

At every depth both players act simultaneously from their current
information sets, receive a loss in [0, 1], and the state moves to a child
drawn from the transition kernel. Chance lives entirely in the kernel.

Compilation turns the tree into one treeplex per player and a sparse
payoff ``M`` over (min sequence, max sequence) pairs such that the expected
total loss of a sequence-form profile is ``mu @ M @ nu``.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from ._kernels import categorical
from .errors import DomainError, GameFormatError, NumericalError, ShapeError
from .omd import eta_at, tau_at
from .treeplex import Treeplex, TreeplexPolicy, conditional, treeplex_mirror_step

KERNEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class State:
    """One node of the game tree.

    ``losses[a, b]`` is the mean loss when the players pick ``a`` and ``b``;
    ``transitions[(a, b)]`` lists ``(child_id, probability)`` pairs and is
    empty at the last depth.
    """

    id: object
    depth: int
    infoset_min: object
    infoset_max: object
    losses: np.ndarray
    transitions: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "losses", np.asarray(self.losses, dtype=float))
        trans = {(int(a), int(b)): tuple((child, float(p)) for child, p in branches)
                 for (a, b), branches in self.transitions.items()}
        object.__setattr__(self, "transitions", trans)


class Diagnostic(NamedTuple):
    """First violated model condition found by :func:`validate_game`."""

    kind: str
    message: str
    ids: tuple = ()


class TrajectoryStep(NamedTuple):
    state: int
    infoset_min: int
    infoset_max: int
    action_min: int
    action_max: int
    loss: float


@dataclass(frozen=True, eq=False)
class ExtensiveFormGame:
    """A finite game tree of height ``horizon`` rooted at ``root``.

    Validation runs on construction unless ``check=False``; compiled
    structures are built lazily on first use.
    """

    horizon: int
    states: tuple
    root: object
    feedback_mode: str = "bernoulli"
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if self.check:
            diag = validate_game(self)
            if diag is not None:
                raise GameFormatError(diag.message, field=diag.kind)

    def __eq__(self, other):
        if not isinstance(other, ExtensiveFormGame):
            return NotImplemented
        if (self.horizon, self.root, self.feedback_mode, len(self.states)) != (
                other.horizon, other.root, other.feedback_mode, len(other.states)):
            return False
        for s, o in zip(self.states, other.states):
            if (s.id, s.depth, s.infoset_min, s.infoset_max, s.transitions) != (
                    o.id, o.depth, o.infoset_min, o.infoset_max, o.transitions):
                return False
            if not np.array_equal(s.losses, o.losses):
                return False
        return True

    @cached_property
    def _compiled(self):
        return _compile_tree(self)

    @property
    def min_treeplex(self):
        return self._compiled.min_tp

    @property
    def max_treeplex(self):
        return self._compiled.max_tp

    @property
    def payoff(self):
        """Sparse ``M`` with ``M[(x, a), (y, b)] = sum_s q(s) loss(s, a, b)``."""
        return self._compiled.payoff

    @property
    def num_sequences(self):
        """K, the total number of sequences of both players."""
        return self.min_treeplex.num_sequences + self.max_treeplex.num_sequences

    def reach_weights(self):
        """Chance reach ``q(s)`` of every state, keyed by state id."""
        return dict(zip(self._compiled.ids, self._compiled.q))

    def uniform_profile(self):
        return TreeplexPolicy.uniform(self.min_treeplex), TreeplexPolicy.uniform(self.max_treeplex)


def validate_game(game):
    """Return ``None`` if the tree is a valid perfect-recall game, else a Diagnostic."""
    H = game.horizon
    if not (isinstance(H, (int, np.integer)) and H >= 1):
        return Diagnostic("horizon", f"horizon must be a positive integer, got {H!r}")
    if game.feedback_mode not in ("deterministic", "bernoulli"):
        return Diagnostic("feedback", f"unknown feedback mode {game.feedback_mode!r}")
    by_id = {}
    for s in game.states:
        if s.id in by_id:
            return Diagnostic("tree", f"duplicate state id {s.id!r}", (s.id,))
        by_id[s.id] = s
    if game.root not in by_id:
        return Diagnostic("tree", f"root {game.root!r} is not a state", (game.root,))
    if by_id[game.root].depth != 1:
        return Diagnostic("tree", "root must have depth 1", (game.root,))

    parent_of = {}
    for s in game.states:
        L = s.losses
        if L.ndim != 2 or L.shape[0] < 1 or L.shape[1] < 1:
            return Diagnostic("losses", f"state {s.id!r}: losses must be a non-empty "
                              f"actions_min x actions_max table", (s.id,))
        if not np.all(np.isfinite(L)) or L.min() < 0.0 or L.max() > 1.0:
            return Diagnostic("losses", f"state {s.id!r}: losses must lie in [0, 1]", (s.id,))
        if not 1 <= s.depth <= H:
            return Diagnostic("tree", f"state {s.id!r}: depth {s.depth} outside 1..{H}", (s.id,))
        pairs = {(a, b) for a in range(L.shape[0]) for b in range(L.shape[1])}
        if s.depth == H:
            if s.transitions:
                return Diagnostic("tree", f"state {s.id!r} at the last depth has transitions",
                                  (s.id,))
            continue
        if set(s.transitions) != pairs:
            return Diagnostic("kernel", f"state {s.id!r}: transitions must cover every "
                              f"action pair", (s.id,))
        for (a, b), branches in sorted(s.transitions.items()):
            probs = [p for _, p in branches]
            if not branches or min(probs) < 0.0:
                return Diagnostic("kernel", f"state {s.id!r}, actions ({a},{b}): "
                                  f"probabilities must be non-negative", (s.id,))
            if abs(sum(probs) - 1.0) > KERNEL_TOL:
                return Diagnostic("kernel", f"state {s.id!r}, actions ({a},{b}): kernel row "
                                  f"sums to {sum(probs):.12g}", (s.id,))
            for child, _ in branches:
                if child not in by_id:
                    return Diagnostic("tree", f"state {s.id!r}: unknown child {child!r}",
                                      (s.id, child))
                if child in parent_of or child == game.root:
                    return Diagnostic("tree", f"state {child!r} has more than one parent",
                                      (child,))
                if by_id[child].depth != s.depth + 1:
                    return Diagnostic("tree", f"state {child!r}: depth must be one more than "
                                      f"its parent's", (child,))
                parent_of[child] = (s.id, a, b)
    if len(parent_of) + 1 != len(by_id):
        orphans = [s.id for s in game.states if s.id != game.root and s.id not in parent_of]
        return Diagnostic("tree", f"states unreachable from the root: {orphans}", tuple(orphans))

    for side, col in (("min", 0), ("max", 1)):
        counts = {}
        for s in game.states:
            x = s.infoset_min if side == "min" else s.infoset_max
            n = s.losses.shape[col]
            if counts.setdefault(x, n) != n:
                return Diagnostic("infoset", f"{side} infoset {x!r}: inconsistent action "
                                  f"counts", (x,))

    hist_min, hist_max = _histories(game, by_id, parent_of)
    for side, hist in (("min", hist_min), ("max", hist_max)):
        seen = {}
        for s in game.states:
            x = s.infoset_min if side == "min" else s.infoset_max
            h = hist[s.id]
            if seen.setdefault(x, h) != h:
                return Diagnostic("perfect_recall", f"{side} infoset {x!r} is reached through "
                                  f"different own histories", (x,))
    return None


def _histories(game, by_id, parent_of):
    """Own (infoset, action) path of each state, for both players."""
    hist_min = {game.root: ()}
    hist_max = {game.root: ()}
    for s in sorted(game.states, key=lambda s: s.depth):
        if s.id == game.root:
            continue
        pid, a, b = parent_of[s.id]
        parent = by_id[pid]
        hist_min[s.id] = hist_min[pid] + ((parent.infoset_min, a),)
        hist_max[s.id] = hist_max[pid] + ((parent.infoset_max, b),)
    return hist_min, hist_max


class _Compiled(NamedTuple):
    ids: tuple
    q: np.ndarray
    x_of: np.ndarray
    y_of: np.ndarray
    losses: tuple
    kernel: tuple
    root: int
    min_tp: Treeplex
    max_tp: Treeplex
    payoff: sp.csr_matrix


def _build_treeplex(order, hist, infoset_of, n_actions):
    ids, counts, parents, depths = [], [], [], []
    start = {}
    total = 0
    for s in order:
        x = infoset_of(s)
        if x in start:
            continue
        h = hist[s.id]
        if h:
            px, pa = h[-1]
            parents.append(start[px] + pa)
        else:
            parents.append(-1)
        start[x] = total
        total += n_actions(s)
        ids.append(x)
        counts.append(n_actions(s))
        depths.append(s.depth)
    return Treeplex(ids, counts, parents, depths)


def _compile_tree(game):
    by_id = {s.id: s for s in game.states}
    parent_of = {}
    for s in game.states:
        for (a, b), branches in s.transitions.items():
            for child, _ in branches:
                parent_of[child] = (s.id, a, b)
    hist_min, hist_max = _histories(game, by_id, parent_of)
    # depth order keeps parent infosets ahead of their children
    order = sorted(game.states, key=lambda s: s.depth)
    min_tp = _build_treeplex(order, hist_min, lambda s: s.infoset_min, lambda s: s.losses.shape[0])
    max_tp = _build_treeplex(order, hist_max, lambda s: s.infoset_max, lambda s: s.losses.shape[1])

    ids = tuple(s.id for s in game.states)
    pos = {sid: i for i, sid in enumerate(ids)}
    q = np.zeros(len(ids))
    q[pos[game.root]] = 1.0
    for s in order:
        for branches in s.transitions.values():
            for child, p in branches:
                q[pos[child]] = q[pos[s.id]] * p
    x_of = np.array([min_tp.index[s.infoset_min] for s in game.states])
    y_of = np.array([max_tp.index[s.infoset_max] for s in game.states])

    M = np.zeros((min_tp.num_sequences, max_tp.num_sequences))
    for i, s in enumerate(game.states):
        rows = min_tp.sequences(x_of[i])
        cols = max_tp.sequences(y_of[i])
        M[rows, cols] += q[i] * s.losses
    kernel = []
    for s in game.states:
        table = {}
        for key, branches in s.transitions.items():
            children = np.array([pos[c] for c, _ in branches])
            cum = np.cumsum([p for _, p in branches])
            table[key] = (children, cum)
        kernel.append(table)
    return _Compiled(ids, q, x_of, y_of, tuple(s.losses for s in game.states), tuple(kernel),
                     pos[game.root], min_tp, max_tp, sp.csr_matrix(M))


def _check_profile(game, w):
    mu, nu = w
    if (mu.values.shape != (game.min_treeplex.num_sequences,)
            or nu.values.shape != (game.max_treeplex.num_sequences,)):
        raise ShapeError("profile does not match the game's sequence spaces")
    return mu.values, nu.values


def expected_loss(game, w):
    """Expected total loss ``mu @ M @ nu`` of a sequence-form profile."""
    mu, nu = _check_profile(game, w)
    return float(mu @ (game.payoff @ nu))


def efg_pseudo_gradient(game, w):
    """``(M nu, H - M^T mu)`` over the concatenated sequence spaces."""
    mu, nu = _check_profile(game, w)
    M = game.payoff
    return np.concatenate([M @ nu, game.horizon - M.T @ mu])


def max_reach_offset(game, mu):
    """Opponent-and-chance reach of each max infoset, spread over its sequences.

    This is the constant the max-player's importance-sampling estimate is
    actually unbiased for: ``E[estimate_max] = offset - M^T mu``.
    """
    c = game._compiled
    mu = mu.values if isinstance(mu, TreeplexPolicy) else np.asarray(mu, dtype=float)
    par = game.min_treeplex.parent_values(mu)
    tp = game.max_treeplex
    reach = np.zeros(tp.num_infosets)
    np.add.at(reach, c.y_of, c.q * par[c.x_of])
    return np.repeat(reach, tp.num_actions)


def best_response_value(game, side, opponent):
    """Optimal expected total loss (``side="min"``) or gain (``"max"``) against ``opponent``.

    Bottom-up dynamic programming over the player's own information sets.
    """
    M = game.payoff
    opp = opponent.values if isinstance(opponent, TreeplexPolicy) else np.asarray(opponent)
    if side == "min":
        tp, c, pick = game.min_treeplex, M @ opp, np.min
    elif side == "max":
        tp, c, pick = game.max_treeplex, M.T @ opp, np.max
    else:
        raise ValueError(f"side must be 'min' or 'max', got {side!r}")
    seq_value = np.array(c, dtype=float)
    value = np.zeros(tp.num_infosets)
    for x in range(tp.num_infosets - 1, -1, -1):
        value[x] = pick(seq_value[tp.sequences(x)])
        p = tp.infoset_parent[x]
        if p >= 0:
            seq_value[p] += value[x]
    return float(value[tp.infoset_parent < 0].sum())


def efg_exploitability(game, w):
    mu, nu = w
    gap = best_response_value(game, "max", mu) - best_response_value(game, "min", nu)
    return max(gap, 0.0)


def sample_trajectory(game, w, rng):
    """Play one episode from the root with both sequence-form policies.

    Per depth draws three uniforms (min action, max action, Bernoulli loss)
    and one more for the transition when not at the last depth.
    """
    mu, nu = w
    c = game._compiled
    bern = game.feedback_mode == "bernoulli"
    s = c.root
    steps = []
    for h in range(game.horizon):
        x, y = c.x_of[s], c.y_of[s]
        u = rng.random(3)
        a = int(categorical(conditional(mu, x), u[0]))
        b = int(categorical(conditional(nu, y), u[1]))
        mean = c.losses[s][a, b]
        loss = (1.0 if u[2] < mean else 0.0) if bern else float(mean)
        steps.append(TrajectoryStep(int(s), int(x), int(y), a, b, loss))
        if h + 1 < game.horizon:
            children, cum = c.kernel[s][(a, b)]
            k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            s = children[min(k, len(children) - 1)]
    return tuple(steps)


def own_view(trajectory, side):
    """What one player observes: its infosets, its actions and the losses."""
    if side == "min":
        return tuple((st.infoset_min, st.action_min, st.loss) for st in trajectory)
    if side == "max":
        return tuple((st.infoset_max, st.action_max, st.loss) for st in trajectory)
    raise ValueError(f"side must be 'min' or 'max', got {side!r}")


def efg_regularized_estimate(observations, policy, tau_t, side="min"):
    """Per-depth importance-sampling estimate plus ``tau_t * grad(barrier)``.

    ``observations`` is either a full trajectory or the player's own view of
    ``(infoset, action, loss)`` triples. Only visited sequences get mass.
    """
    if side not in ("min", "max"):
        raise ValueError(f"side must be 'min' or 'max', got {side!r}")
    if observations and isinstance(observations[0], TrajectoryStep):
        observations = own_view(observations, side)
    v = policy.values
    if np.any(v <= 0.0):
        raise DomainError("sequence values must be strictly positive")
    est = -tau_t / v
    start = policy.structure.seq_start
    for x, a, loss in observations:
        i = start[x] + a
        est[i] += (loss if side == "min" else 1.0 - loss) / v[i]
    return est


def efg_dual_cone_distance(game, w, tau):
    """Weighted least-squares distance from ``F_tau(w)`` to the constraint row space."""
    mu, nu = _check_profile(game, w)
    vec = np.concatenate([mu, nu])
    if np.any(vec <= 0.0):
        raise DomainError("dual-cone distance is defined on the relative interior only")
    ft = efg_pseudo_gradient(game, w) - tau / vec
    C = sp.block_diag([game.min_treeplex.constraints, game.max_treeplex.constraints]).toarray()
    w2 = vec ** 2
    normal = (C * w2) @ C.T
    try:
        lam = np.linalg.solve(normal, C @ (w2 * ft))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular normal equations: {exc}") from exc
    r = ft - C.T @ lam
    return float(np.sqrt(np.sum(w2 * r * r)))


@dataclass(frozen=True, eq=False)
class TreeplexPlayerState:
    """One player's private sequence-form policy and step counter."""

    side: str
    policy: TreeplexPolicy
    params: object
    step_index: int = 0

    @classmethod
    def initial(cls, side, structure, params):
        return cls(side, TreeplexPolicy.uniform(structure), params, 0)


def treeplex_player_update(state, observations):
    """One update from the player's own ``(infoset, action, loss)`` observations."""
    t = state.step_index
    est = efg_regularized_estimate(observations, state.policy, tau_at(state.params, t), state.side)
    new = treeplex_mirror_step(state.policy, est, eta_at(state.params, t))
    return replace(state, policy=new, step_index=t + 1)
