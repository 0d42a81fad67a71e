"""Comparison methods.

``euclidean_step`` is a projected, full-information regularized gradient
step: it reads the exact pseudo-gradient and so deliberately breaks the
bandit protocol. ``entropy_step`` is the bandit multiplicative-weights
analogue of the log-barrier learner, with an entropy regularizer instead.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DomainError
from .matrix import Profile, pseudo_gradient
from .omd import eta_at, tau_at

log = logging.getLogger(__name__)

KINDS = ("euclidean_full_info", "entropy_bandit")
EXP_CLIP = 500.0


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    tau: float
    eta: float
    T0: int = 1
    delta: float = 0.05

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown baseline {self.kind!r}")
        if int(self.T0) != self.T0 or self.T0 < 1:
            raise ConfigError("T0 must be a positive integer")


def euclidean_schedule(cfg, t):
    """``(eta_t, tau_t) = ((1/tau) s**-3/4, tau s**-1/4)`` with ``s = t + T0``."""
    s = t + cfg.T0
    return s ** -0.75 / cfg.tau, cfg.tau * s ** -0.25


def project_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def euclidean_step(game, w, t, cfg):
    """``w' = proj(w - eta_t (F(w) + tau_t w))`` blockwise."""
    eta_t, tau_t = euclidean_schedule(cfg, t)
    vec = w.vector
    pre = vec - eta_t * (pseudo_gradient(game, w) + tau_t * vec)
    A = game.num_actions_min
    return Profile(project_simplex(pre[:A]), project_simplex(pre[A:]))


def multiplicative_weights(policy, estimate, eta_t):
    """``mu'_i`` proportional to ``mu_i exp(-eta_t estimate_i)``."""
    policy = np.asarray(policy, dtype=float)
    z = -eta_t * np.asarray(estimate, dtype=float)
    if np.any(np.abs(z) > EXP_CLIP):
        log.warning("entropy step exponent %.3g clipped to +-%g", np.abs(z).max(), EXP_CLIP)
        z = np.clip(z, -EXP_CLIP, EXP_CLIP)
    logits = np.log(policy) + z
    p = np.exp(logits - logits.max())
    return p / p.sum()


def entropy_estimate(policy, own_action, loss, tau_t, side="min"):
    """IS estimate plus ``tau_t (1 + log mu)``, the negative-entropy gradient."""
    policy = np.asarray(policy, dtype=float)
    if np.any(policy <= 0.0):
        raise DomainError("policy must be strictly positive")
    if side not in ("min", "max"):
        raise ValueError(f"side must be 'min' or 'max', got {side!r}")
    est = tau_t * (1.0 + np.log(policy))
    est[own_action] += (loss if side == "min" else 1.0 - loss) / policy[own_action]
    return est


def entropy_step(policy, own_action, loss, eta_t, tau_t, side="min"):
    est = entropy_estimate(policy, own_action, loss, tau_t, side)
    return multiplicative_weights(policy, est, eta_t)


def entropy_player_update(state, own_action, loss):
    """Drop-in for ``omd.player_update`` using the entropy baseline."""
    t = state.step_index
    new = entropy_step(state.policy, own_action, loss, eta_at(state.params, t),
                       tau_at(state.params, t), state.side)
    return replace(state, policy=new, step_index=t + 1)
