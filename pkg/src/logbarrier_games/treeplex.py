"""Sequence-form policy sets (treeplexes) and their log-barrier mirror step.

A treeplex is described by its information sets, each owning a contiguous
block of sequences ``(infoset, action)`` and hanging below one parent
sequence (or below the virtual root of value 1). Feasible points satisfy one
flow constraint per information set::

    sum_a values[(x, a)] == values[parent(x)]

collected as ``C @ values == e`` with ``e`` the root indicator.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._kernels import treeplex_newton
from .errors import DomainError, NumericalError, ShapeError, StepDomainError
from .omd import solve_multiplier

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 500
SWEEP_TOL = 1e-11
SWEEP_MAX = 100_000


@dataclass(frozen=True, eq=False)
class Treeplex:
    """Constraint structure of one player's sequence-form policies.

    ``infoset_ids[i]`` is the external id of infoset ``i``; its sequences are
    ``seq_start[i] : seq_start[i] + num_actions[i]``. ``infoset_parent[i]``
    is the parent sequence index, -1 for root infosets. Infosets are ordered
    by depth, so iterating in reverse is a valid bottom-up order.
    """

    infoset_ids: tuple
    num_actions: np.ndarray
    infoset_parent: np.ndarray
    infoset_depth: np.ndarray

    def __post_init__(self):
        n_act = np.asarray(self.num_actions, dtype=np.int64)
        parent = np.asarray(self.infoset_parent, dtype=np.int64)
        depth = np.asarray(self.infoset_depth, dtype=np.int64)
        start = np.concatenate([[0], np.cumsum(n_act)[:-1]]).astype(np.int64)
        n_seq = int(n_act.sum())
        seq_infoset = np.repeat(np.arange(len(n_act)), n_act)
        seq_action = np.concatenate([np.arange(k) for k in n_act]) if n_seq else np.zeros(0, int)
        C = np.zeros((len(n_act), n_seq))
        e = np.zeros(len(n_act))
        children = [[] for _ in range(n_seq)]
        for x in range(len(n_act)):
            C[x, start[x]:start[x] + n_act[x]] = 1.0
            if parent[x] < 0:
                e[x] = 1.0
            else:
                if parent[x] >= start[x]:
                    raise ValueError("infosets must be listed parents first")
                C[x, parent[x]] = -1.0
                children[parent[x]].append(x)
        for name, value in (("num_actions", n_act), ("infoset_parent", parent),
                            ("infoset_depth", depth), ("seq_start", start),
                            ("seq_infoset", seq_infoset), ("seq_action", seq_action),
                            ("constraints", C), ("rhs", e)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "infoset_ids", tuple(self.infoset_ids))
        object.__setattr__(self, "children", tuple(tuple(ch) for ch in children))
        object.__setattr__(self, "index", {x: i for i, x in enumerate(self.infoset_ids)})

    @property
    def num_infosets(self):
        return len(self.num_actions)

    @property
    def num_sequences(self):
        return int(self.num_actions.sum())

    def sequences(self, x):
        """Slice of the sequences owned by infoset index ``x``."""
        s = self.seq_start[x]
        return slice(s, s + self.num_actions[x])

    def parent_values(self, values):
        """Value of each infoset's parent sequence (1 for roots)."""
        out = np.ones(self.num_infosets)
        has = self.infoset_parent >= 0
        out[has] = values[self.infoset_parent[has]]
        return out

    def is_simplex(self):
        return self.num_infosets == 1


@dataclass(frozen=True, eq=False)
class TreeplexPolicy:
    """A sequence-form policy: one value per sequence of ``structure``."""

    values: np.ndarray
    structure: Treeplex

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.structure.num_sequences,):
            raise ShapeError(
                f"expected {self.structure.num_sequences} sequence values, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    def constraint_residual(self):
        tp = self.structure
        return float(np.max(np.abs(tp.constraints @ self.values - tp.rhs)))

    def check(self, tol=1e-9):
        if np.any(self.values <= 0.0):
            raise DomainError("sequence values must be strictly positive")
        if self.constraint_residual() > tol:
            raise ValueError("flow constraints violated")
        return self

    @classmethod
    def uniform(cls, structure):
        behavioral = [np.full(k, 1.0 / k) for k in structure.num_actions]
        return behavioral_to_sequence(structure, behavioral)


def _behavioral_rows(structure, behavioral):
    if isinstance(behavioral, dict):
        return [np.asarray(behavioral[x], dtype=float) for x in structure.infoset_ids]
    return [np.asarray(row, dtype=float) for row in behavioral]


def behavioral_to_sequence(structure, behavioral):
    """Products of behavioral probabilities along each infoset's unique path.

    ``behavioral`` maps infoset ids to distributions, or is a list of rows
    in infoset-index order.
    """
    rows = _behavioral_rows(structure, behavioral)
    values = np.empty(structure.num_sequences)
    for x in range(structure.num_infosets):
        row = rows[x]
        if row.shape != (structure.num_actions[x],):
            raise ShapeError(f"infoset {structure.infoset_ids[x]!r}: expected "
                             f"{structure.num_actions[x]} probabilities")
        p = structure.infoset_parent[x]
        values[structure.sequences(x)] = row * (1.0 if p < 0 else values[p])
    return TreeplexPolicy(values, structure)


def sequence_to_behavioral(policy):
    """Inverse of :func:`behavioral_to_sequence`: ``{infoset_id: row}``."""
    tp = policy.structure
    parents = tp.parent_values(policy.values)
    out = {}
    for x in range(tp.num_infosets):
        if not parents[x] > 0.0:
            raise DomainError(f"infoset {tp.infoset_ids[x]!r} has a zero-valued parent sequence")
        out[tp.infoset_ids[x]] = policy.values[tp.sequences(x)] / parents[x]
    return out


def conditional(policy, x):
    """Behavioral distribution at infoset index ``x``."""
    tp = policy.structure
    p = tp.infoset_parent[x]
    row = policy.values[tp.sequences(x)]
    return row if p < 0 else row / policy.values[p]


def dilated_barrier_gradient(policy):
    """Gradient ``-1 / values`` of ``-sum(log values)``."""
    v = policy.values if isinstance(policy, TreeplexPolicy) else np.asarray(policy, dtype=float)
    if np.any(v <= 0.0):
        raise DomainError("sequence values must be strictly positive")
    return -1.0 / v


def _sweep_projection(c, tp, tol=SWEEP_TOL, max_sweeps=SWEEP_MAX):
    """Gauss-Seidel on the dual: exact per-infoset multiplier updates.

    Each update solves the scalar flow equation of one infoset with all
    other multipliers held fixed, visiting infosets bottom-up.
    """
    lam = np.zeros(tp.num_infosets)
    parent = tp.infoset_parent
    child_sum = np.zeros(tp.num_sequences)
    for sweep in range(max_sweeps):
        for x in range(tp.num_infosets - 1, -1, -1):
            seqs = tp.sequences(x)
            s = c[seqs] - child_sum[seqs]
            p = parent[x]
            old = lam[x]
            if p < 0:
                lo = -s.min()
                n = len(s)
                new = brentq(lambda l: np.sum(1.0 / (s + l)) - 1.0,
                             lo + 1e-14 * max(n, abs(lo)), lo + n, xtol=1e-16, rtol=1e-15)
            else:
                own = lam[tp.seq_infoset[p]]
                sp = c[p] + own - (child_sum[p] - old)
                lo, hi = -s.min(), sp
                width = hi - lo
                if not width > 0.0:
                    raise NumericalError(
                        f"sweep lost the bracket at infoset {tp.infoset_ids[x]!r}")
                new = brentq(lambda l: np.sum(1.0 / (s + l)) - 1.0 / (sp - l),
                             lo + 1e-14 * width, hi - 1e-14 * width, xtol=1e-16, rtol=1e-15)
                child_sum[p] += new - old
            lam[x] = new
        mu = 1.0 / (c + tp.constraints.T @ lam)
        res = float(np.max(np.abs(tp.constraints @ mu - tp.rhs)))
        if res <= tol:
            return mu, lam, res
    raise NumericalError(f"treeplex sweep projection did not converge in {max_sweeps} sweeps "
                         f"(residual {res:.3g})", residual=res)


def treeplex_mirror_step(policy, estimate, eta_t, method="newton"):
    """Log-barrier Bregman step over the treeplex.

    Minimizes ``D(mu, policy) + eta_t * <estimate, mu>`` subject to the flow
    constraints. Stationarity gives ``mu_i = 1 / (c_i + (C.T lam)_i)`` with
    ``c = 1/values + eta_t * estimate``; the multipliers are found by damped
    Newton, falling back to Gauss-Seidel sweeps. A single-infoset treeplex
    is a simplex and takes the scalar root path of ``omd.mirror_step``.
    """
    tp = policy.structure
    estimate = np.asarray(estimate, dtype=float)
    c = 1.0 / policy.values + eta_t * estimate
    bad = np.flatnonzero(~(c > 0.0))
    if bad.size:
        i = int(bad[0])
        raise StepDomainError(
            f"treeplex step undefined at sequence {i}: denominator {c[i]:.6g} <= 0", index=i)
    if tp.is_simplex():
        return TreeplexPolicy(1.0 / (c + solve_multiplier(c)), tp)
    if method == "newton":
        mu, lam, res, _, status = treeplex_newton(
            c, tp.constraints, tp.rhs, NEWTON_TOL, NEWTON_MAX_ITER)
        if status == 0 and np.all(mu > 0.0):
            return TreeplexPolicy(mu, tp)
    elif method != "sweep":
        raise ValueError(f"unknown method {method!r}")
    mu, lam, res = _sweep_projection(c, tp)
    return TreeplexPolicy(mu, tp)
