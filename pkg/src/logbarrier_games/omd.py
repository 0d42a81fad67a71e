"""Per-player log-barrier regularized online mirror descent.

Each player keeps only its own policy and step counter. At step ``t`` it
builds the importance-sampling estimate of its loss vector, adds
``tau_t * grad(log-barrier)``, and takes a Bregman step of size ``eta_t``
in the Itakura-Saito geometry, projected back onto its simplex.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import categorical, logbarrier_update, simplex_multiplier
from .errors import DomainError, InfeasibleParametersError, NumericalError, StepDomainError

# smallest integer offset with T0 >= e**4
MIN_T0 = math.ceil(math.e ** 4)

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 200


@dataclass(frozen=True)
class ScheduleParams:
    """Base learning rate, base regularization, starting offset, confidence."""

    eta: float
    tau: float
    T0: int
    delta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if int(self.T0) != self.T0 or self.T0 < 1:
            raise ValueError("T0 must be a positive integer")
        object.__setattr__(self, "T0", int(self.T0))

    @property
    def eta0(self):
        return eta_at(self, 0)

    @property
    def tau0(self):
        return tau_at(self, 0)

    @classmethod
    def auto(cls, eta, tau, delta):
        return cls(eta, tau, derive_T0(eta, tau, delta), delta)


def eta_at(params, t):
    """Learning rate ``eta * (t + T0) ** -3/4``."""
    return params.eta * (t + params.T0) ** -0.75


def tau_at(params, t):
    """Regularization ``tau * log((t + T0) / delta) * (t + T0) ** -1/4``."""
    s = t + params.T0
    return params.tau * math.log(s / params.delta) * s ** -0.25


def _offset_ok(T0, eta_tau):
    return T0 / math.log(T0) ** 4 >= eta_tau


def derive_T0(eta, tau, delta):
    """Smallest integer ``T0 >= 55`` with ``eta * tau <= T0 / log(T0)**4``.

    ``T0 / log(T0)**4`` is increasing beyond ``e**4``, so the offset is found
    by exponential search and bisection. Raises
    ``InfeasibleParametersError`` when the result exceeds
    ``log(1 / delta)**2 * tau**4``.
    """
    if not (eta > 0 and tau > 1 and 0 < delta < 1):
        raise InfeasibleParametersError(
            f"need eta > 0, tau > 1 and delta in (0, 1); got {eta}, {tau}, {delta}")
    target = eta * tau
    lo = MIN_T0
    if _offset_ok(lo, target):
        T0 = lo
    else:
        hi = 2 * lo
        while not _offset_ok(hi, target):
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _offset_ok(mid, target):
                hi = mid
            else:
                lo = mid
        T0 = hi
    cap = math.log(1.0 / delta) ** 2 * tau ** 4
    if T0 > cap:
        raise InfeasibleParametersError(
            f"smallest admissible T0 = {T0} exceeds log(1/delta)^2 tau^4 = {cap:.4g}")
    return T0


def admissible_T0(eta, tau, delta, K, sigma=2.0):
    """Smallest ``T0 >= derive_T0(eta, tau, delta)`` passing every hard check.

    Checks (d) and (e) only get easier as ``T0`` grows while (b) caps it, so
    the search is monotone.
    """
    def ok(T0):
        return validate(ScheduleParams(eta, tau, T0, delta), K, sigma).passed

    lo = derive_T0(eta, tau, delta)
    cap = math.floor(math.log(1.0 / delta) ** 2 * tau ** 4)
    if ok(lo):
        return lo
    if not ok(cap):
        raise InfeasibleParametersError(
            f"no T0 in [{lo}, {cap}] passes every check for K={K}, sigma={sigma}")
    hi = cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


class Check(NamedTuple):
    name: str
    passed: bool
    value: float
    threshold: float
    advisory: bool = False


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    sigma_prime: float

    @property
    def passed(self):
        return all(c.passed for c in self.checks if not c.advisory)

    @property
    def failures(self):
        return [c.name for c in self.checks if not c.passed and not c.advisory]

    def format(self):
        lines = [f"sigma' = {self.sigma_prime:.6g}"]
        for c in self.checks:
            tag = "PASS" if c.passed else ("WARN" if c.advisory else "FAIL")
            lines.append(f"[{tag}] {c.name}: {c.value:.6g} (threshold {c.threshold:.6g})")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def validate(params, K, sigma=2.0):
    """Check the schedule constants against the convergence assumptions.

    ``sigma`` bounds the dual local norm of the raw estimate: 2 for matrix
    games, ``2 * H`` for extensive-form games of horizon ``H``.
    """
    eta, tau, T0, delta = params.eta, params.tau, params.T0, params.delta
    eta0, tau0 = params.eta0, params.tau0
    sigma_prime = sigma + tau0 * math.sqrt(K)
    if tau > 0 and delta < 1:
        cap = math.log(1.0 / delta) ** 2 * tau ** 4
    else:
        cap = float("nan")
    # T0 / log(T0)^4 blows up as T0 -> 1
    room = T0 / math.log(T0) ** 4 if T0 > 1 else math.inf
    checks = (
        Check("eta*tau <= T0/log(T0)^4", eta * tau <= room, eta * tau, room),
        Check("T0 <= log(1/delta)^2 tau^4", T0 <= cap, T0, cap),
        Check("T0 >= ceil(e^4)", T0 >= MIN_T0, T0, MIN_T0),
        Check("32 sigma' eta0 <= 1", 32 * sigma_prime * eta0 <= 1, 32 * sigma_prime * eta0, 1.0),
        Check("eta0 tau0 < 1", eta0 * tau0 < 1, eta0 * tau0, 1.0),
        Check("tau > 1", tau > 1, tau, 1.0),
        Check("1/(eta tau) small", 1 / (eta * tau) <= 2, 1 / (eta * tau), 2.0, advisory=True),
        Check("eta small", eta <= 0.1, eta, 0.1, advisory=True),
    )
    return ValidationReport(checks, sigma_prime)


def regularized_estimate(policy, own_action, loss_observed, tau_t, side="min"):
    """Importance-sampling estimate plus ``tau_t * grad(log-barrier)(policy)``.

    For ``side="max"`` the observed loss is folded into ``1 - loss``.
    """
    policy = np.asarray(policy, dtype=float)
    if np.any(policy <= 0.0):
        raise DomainError("policy must be strictly positive")
    if side == "max":
        numerator = 1.0 - loss_observed
    elif side == "min":
        numerator = loss_observed
    else:
        raise ValueError(f"side must be 'min' or 'max', got {side!r}")
    est = -tau_t / policy
    est[own_action] += numerator / policy[own_action]
    return est


def _step_denominators(policy, estimate, eta_t):
    c = 1.0 / policy + eta_t * estimate
    bad = np.flatnonzero(~(c > 0.0))
    if bad.size:
        i = int(bad[0])
        raise StepDomainError(
            f"mirror step undefined: 1/policy[{i}] + eta*estimate[{i}] = {c[i]:.6g} <= 0",
            index=i)
    return c


def solve_multiplier(c):
    """Multiplier ``lam`` with ``sum(1 / (c + lam)) = 1``."""
    lam, phi, _, status = simplex_multiplier(c, ROOT_TOL, ROOT_MAX_ITER)
    if status != 0:
        raise NumericalError(
            f"simplex multiplier did not converge in {ROOT_MAX_ITER} iterations",
            residual=abs(phi))
    return lam


def mirror_step(policy, estimate, eta_t):
    """Itakura-Saito projected step on the simplex.

    Minimizes ``D(mu, policy) + eta_t * <estimate, mu>`` over the simplex,
    where ``D`` is the log-barrier Bregman divergence. The minimizer is
    ``1 / (c + lam)`` with ``c = 1/policy + eta_t * estimate``.
    """
    policy = np.asarray(policy, dtype=float)
    c = _step_denominators(policy, np.asarray(estimate, dtype=float), eta_t)
    lam = solve_multiplier(c)
    return 1.0 / (c + lam)


def itakura_saito(p, q):
    """Bregman divergence of the log-barrier, ``sum(p/q - log(p/q) - 1)``."""
    r = np.asarray(p, dtype=float) / np.asarray(q, dtype=float)
    return float(np.sum(r - np.log(r) - 1.0))


@dataclass(frozen=True, eq=False)
class PlayerState:
    """One player's private state: its policy and step counter."""

    side: str
    policy: np.ndarray
    params: ScheduleParams
    step_index: int = 0

    @classmethod
    def initial(cls, side, num_actions, params):
        return cls(side, np.full(num_actions, 1.0 / num_actions), params, 0)

    def sample(self, rng):
        """Draw an action from the current policy (one uniform from ``rng``)."""
        return int(categorical(self.policy, rng.random()))


def player_update(state, own_action, loss_observed):
    """Advance one player by one round given only its own action and the loss.

    Equivalent to ``mirror_step(regularized_estimate(...), eta_at(t))``,
    evaluated in a single compiled pass.
    """
    t = state.step_index
    if state.side == "max":
        numerator = 1.0 - loss_observed
    elif state.side == "min":
        numerator = loss_observed
    else:
        raise ValueError(f"side must be 'min' or 'max', got {state.side!r}")
    new, index, status, phi = logbarrier_update(
        state.policy, own_action, numerator, tau_at(state.params, t), eta_at(state.params, t),
        ROOT_TOL, ROOT_MAX_ITER)
    if status == 3:
        raise DomainError("policy must be strictly positive")
    if status == 4:
        raise StepDomainError(f"mirror step undefined at coordinate {index}", index=index)
    if status != 0:
        raise NumericalError(
            f"simplex multiplier did not converge in {ROOT_MAX_ITER} iterations",
            residual=abs(phi))
    return PlayerState(state.side, new, state.params, t + 1)
