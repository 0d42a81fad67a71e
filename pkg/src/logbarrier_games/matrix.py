"""Zero-sum matrix games: model, exact oracles and bandit feedback.

The min-player picks a row, the max-player a column, and both observe one
loss in [0, 1]. Profiles are stored as a pair of probability vectors and
viewed as a single vector ``w = (mu, nu)`` of length ``K = A + B`` wherever
the log-barrier geometry is involved.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import categorical
from .errors import DomainError, ShapeError

FEEDBACK_MODES = ("deterministic", "bernoulli")


@dataclass(frozen=True, eq=False)
class MatrixGame:
    """Loss means ``mean_loss[a, b]`` in [0, 1] and the feedback noise mode."""

    mean_loss: np.ndarray
    feedback_mode: str = "bernoulli"

    def __post_init__(self):
        L = np.array(self.mean_loss, dtype=float)
        if L.ndim != 2:
            raise ShapeError(f"loss matrix must be 2-D, got shape {L.shape}")
        if L.shape[0] < 2 or L.shape[1] < 2:
            raise ShapeError(f"each player needs at least 2 actions, got {L.shape}")
        if not np.all(np.isfinite(L)) or L.min() < 0.0 or L.max() > 1.0:
            raise ValueError("every mean loss must lie in [0, 1]")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ValueError(f"unknown feedback mode {self.feedback_mode!r}")
        L.setflags(write=False)
        object.__setattr__(self, "mean_loss", L)

    @property
    def num_actions_min(self):
        return self.mean_loss.shape[0]

    @property
    def num_actions_max(self):
        return self.mean_loss.shape[1]

    @property
    def num_actions(self):
        """K, the total number of actions of both players."""
        return self.mean_loss.shape[0] + self.mean_loss.shape[1]

    def __eq__(self, other):
        if not isinstance(other, MatrixGame):
            return NotImplemented
        return (self.feedback_mode == other.feedback_mode
                and np.array_equal(self.mean_loss, other.mean_loss))


@dataclass(frozen=True, eq=False)
class Profile:
    """A joint mixed profile ``(mu, nu)``."""

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "nu", np.asarray(self.nu, dtype=float))

    @classmethod
    def uniform(cls, game):
        A, B = game.mean_loss.shape
        return cls(np.full(A, 1.0 / A), np.full(B, 1.0 / B))

    @classmethod
    def from_vector(cls, w, num_actions_min):
        w = np.asarray(w, dtype=float)
        return cls(w[:num_actions_min], w[num_actions_min:])

    @property
    def vector(self):
        return np.concatenate([self.mu, self.nu])

    def check(self, tol=1e-9):
        """Raise ``ValueError`` unless both blocks are distributions."""
        for name, p in (("mu", self.mu), ("nu", self.nu)):
            if p.ndim != 1 or p.min() < 0.0 or abs(p.sum() - 1.0) > tol:
                raise ValueError(f"{name} is not a probability vector")
        return self


class FeedbackEvent(NamedTuple):
    action_min: int
    action_max: int
    loss: float


def _check_shapes(game, w):
    A, B = game.mean_loss.shape
    if w.mu.shape != (A,) or w.nu.shape != (B,):
        raise ShapeError(
            f"profile blocks {w.mu.shape}, {w.nu.shape} do not match a "
            f"{A}x{B} game")


def _as_vector(w):
    if isinstance(w, Profile):
        return w.vector
    return np.asarray(w, dtype=float)


def pseudo_gradient(game, w):
    """``F(w) = (L nu, 1 - L^T mu)``, each player's gradient of its own loss."""
    _check_shapes(game, w)
    L = game.mean_loss
    return np.concatenate([L @ w.nu, 1.0 - L.T @ w.mu])


def exploitability(game, w):
    """Exploitability gap ``max_b (L^T mu)_b - min_a (L nu)_a``."""
    _check_shapes(game, w)
    L = game.mean_loss
    gap = (L.T @ w.mu).max() - (L @ w.nu).min()
    return max(float(gap), 0.0)


def sample_round(game, w, rng):
    """Play one round: ``a ~ mu``, ``b ~ nu``, then draw the loss.

    Always consumes exactly three uniforms from ``rng`` so that the stream
    stays aligned across feedback modes.
    """
    u = rng.random(3)
    a = categorical(w.mu, u[0])
    b = categorical(w.nu, u[1])
    mean = game.mean_loss[a, b]
    if game.feedback_mode == "bernoulli":
        loss = 1.0 if u[2] < mean else 0.0
    else:
        loss = float(mean)
    return FeedbackEvent(int(a), int(b), loss)


def importance_estimates(w, event):
    """Importance-sampling loss estimates for both players.

    The max-player's gain is folded into the loss ``1 - loss``.
    """
    mu_a = w.mu[event.action_min]
    nu_b = w.nu[event.action_max]
    if mu_a <= 0.0 or nu_b <= 0.0:
        raise DomainError("sampled action has zero probability")
    est_min = np.zeros_like(w.mu)
    est_max = np.zeros_like(w.nu)
    est_min[event.action_min] = event.loss / mu_a
    est_max[event.action_max] = (1.0 - event.loss) / nu_b
    return est_min, est_max


def barrier_gradient(w):
    """Gradient ``-1 / w`` of the log-barrier ``-sum(log w)``."""
    w = _as_vector(w)
    if np.any(w <= 0.0):
        raise DomainError("log-barrier gradient needs strictly positive coordinates")
    return -1.0 / w


def local_norm(w, x, mode="primal"):
    """Log-barrier local norm at ``w``.

    ``primal``: ``sqrt(sum(x**2 / w**2))``; ``dual``: ``sqrt(sum(w**2 x**2))``.
    """
    w = _as_vector(w)
    x = np.asarray(x, dtype=float)
    if w.shape != x.shape:
        raise ShapeError(f"vector of shape {x.shape} against point of shape {w.shape}")
    if np.any(w <= 0.0):
        raise DomainError("local norms need strictly positive coordinates")
    if mode == "primal":
        return float(np.sqrt(np.sum((x / w) ** 2)))
    if mode == "dual":
        return float(np.sqrt(np.sum((w * x) ** 2)))
    raise ValueError(f"mode must be 'primal' or 'dual', got {mode!r}")


def regularized_operator(game, w, tau):
    """``F_tau(w) = F(w) + tau * grad(log-barrier)(w)``."""
    return pseudo_gradient(game, w) + tau * barrier_gradient(w)


def dual_cone_distance(game, w, tau):
    """Dual local-norm distance from ``-F_tau(w)`` to the normal cone at ``w``.

    At interior points the normal cone is spanned by the two block indicator
    vectors, and the weighted projection onto that span has a closed form:
    each block is shifted by its ``w**2``-weighted mean.
    """
    if np.any(w.mu <= 0.0) or np.any(w.nu <= 0.0):
        raise DomainError("dual-cone distance is defined on the relative interior only")
    ft = regularized_operator(game, w, tau)
    vec = w.vector
    A = game.num_actions_min
    total = 0.0
    for block in (slice(0, A), slice(A, None)):
        w2 = vec[block] ** 2
        f = ft[block]
        g = np.dot(w2, f) / w2.sum()
        total += np.dot(w2, (f - g) ** 2)
    return float(np.sqrt(total))
