"""Experiment orchestration: uncoupled simulation loops, logging, fitting.

The run loops are the only place where exact oracles (exploitability and
the dual-cone distance) meet the learners. Each learner is advanced through
an update that receives its own action and the shared loss, nothing else.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import stats

from . import baselines
from ._kernels import step_stats
from .efg import (ExtensiveFormGame, TreeplexPlayerState, efg_dual_cone_distance,
                  efg_exploitability, own_view, sample_trajectory, treeplex_player_update)
from .errors import ConfigError, DomainError, InsufficientDataError
from .fileio import RunRecord, load_game, write_records
from .matrix import MatrixGame, Profile, dual_cone_distance, exploitability, sample_round
from .omd import (PlayerState, ScheduleParams, admissible_T0, eta_at, player_update, tau_at,
                  validate)

ALGORITHMS = ("logbarrier", "entropy", "euclidean")
GEOMETRIC_DENSE = 1000
GEOMETRIC_GROWTH = 1.1
RESIDUAL_TOL = 1e-9
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """One run. ``game`` is a game object or a path to a game file.

    ``T0="auto"`` picks the smallest offset passing every hard check.
    ``log_stride`` is ``"geometric"`` or a positive integer; ``log_times``
    overrides it with an explicit list of steps.
    """

    game: object
    steps: int
    algorithm: str = "logbarrier"
    eta: float = 0.05
    tau: float = 10.0
    delta: float = 0.05
    T0: object = "auto"
    seed: int = 0
    log_stride: object = "geometric"
    log_times: tuple = None
    out: str = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError("steps must be a positive integer")
        stride = self.log_stride
        if stride != "geometric" and not (isinstance(stride, int) and stride >= 1):
            raise ConfigError("log stride must be 'geometric' or a positive integer")
        if self.T0 != "auto" and not (isinstance(self.T0, int) and self.T0 >= 1):
            raise ConfigError("T0 must be 'auto' or a positive integer")

    def resolve_game(self):
        return load_game(self.game) if isinstance(self.game, (str, os.PathLike)) else self.game


def log_steps(T, stride="geometric"):
    """Sorted steps in ``0..T`` at which a record is emitted; always includes T."""
    if stride == "geometric":
        ts = list(range(min(GEOMETRIC_DENSE, T + 1)))
        t = GEOMETRIC_DENSE
        while t < T:
            ts.append(t)
            t = max(t + 1, math.ceil(t * GEOMETRIC_GROWTH))
    else:
        ts = list(range(0, T + 1, stride))
    if ts[-1] != T:
        ts.append(T)
    return ts


@dataclass
class Monitor:
    """Runtime checks accumulated over one run.

    Step checks: doubling ratio of consecutive policies, feasibility, and
    treeplex residuals. Row checks: how often ``eg`` exceeds ``bound`` and
    whether ``eg <= 2 K tau_t`` holds on rows with ``d_tau <= tau_t``.
    """

    K: int = 0
    steps: int = 0
    max_ratio: float = 1.0
    doubling_violations: int = 0
    feasibility_violations: int = 0
    max_residual: float = 0.0
    residual_violations: int = 0
    tau_decrease_violations: int = 0
    tau_decrement_violations: int = 0
    rows: int = 0
    rows_above_bound: int = 0
    dual_gap_rows: int = 0
    dual_gap_violations: int = 0

    def step(self, old, new, ratio=True, residual=None):
        """Doubling and feasibility checks for one policy update."""
        self.steps += 1
        r, lo, sum_err = step_stats(old, new)
        if ratio:
            if r > self.max_ratio:
                self.max_ratio = r
            if r > 2.0:
                self.doubling_violations += 1
        err = sum_err if residual is None else residual
        if not (lo > 0.0 and err <= FEASIBILITY_TOL):
            self.feasibility_violations += 1

    def residual(self, r):
        self.max_residual = max(self.max_residual, r)
        if r > RESIDUAL_TOL:
            self.residual_violations += 1

    def row(self, rec):
        self.rows += 1
        if rec.eg > rec.bound:
            self.rows_above_bound += 1
        if rec.d_tau <= rec.tau_t:
            self.dual_gap_rows += 1
            if rec.eg > 2.0 * self.K * rec.tau_t:
                self.dual_gap_violations += 1

    def schedule(self, params, T):
        """Strict decrease and the ``tau_t / (4 (t + T0))`` decrement bound over ``0..T``."""
        s = np.arange(T + 1, dtype=float) + params.T0
        tau = params.tau * np.log(s / params.delta) * s ** -0.25
        drop = tau[:-1] - tau[1:]
        self.tau_decrease_violations = int(np.sum(~(drop > 0.0)))
        self.tau_decrement_violations = int(np.sum(np.abs(drop) > tau[:-1] / (4.0 * s[:-1])))

    @property
    def fraction_above_bound(self):
        return self.rows_above_bound / self.rows if self.rows else 0.0

    def as_dict(self):
        d = asdict(self)
        d["fraction_above_bound"] = self.fraction_above_bound
        return d


def schedule_for(config, K, sigma):
    """Resolve the run's ``ScheduleParams``; ``ConfigError`` on a failed check."""
    if config.T0 == "auto":
        try:
            T0 = admissible_T0(config.eta, config.tau, config.delta, K, sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        T0 = config.T0
    try:
        params = ScheduleParams(config.eta, config.tau, T0, config.delta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = validate(params, K, sigma)
    if config.algorithm == "logbarrier" and not report.passed:
        raise ConfigError("parameter validation failed: " + ", ".join(report.failures))
    return params, report


def _safe_dual_distance(fn, *args):
    try:
        return fn(*args)
    except DomainError:
        return float("nan")


def run_matrix(config, monitor=None):
    """Yield ``RunRecord`` rows for a matrix-game run."""
    game = config.resolve_game()
    if not isinstance(game, MatrixGame):
        raise ConfigError("run_matrix needs a matrix game")
    monitor = monitor if monitor is not None else Monitor()
    K = game.num_actions
    monitor.K = K
    A, B = game.mean_loss.shape
    T = config.steps
    logged = set(config.log_times or log_steps(T, config.log_stride))
    rng = np.random.default_rng(config.seed)

    if config.algorithm == "euclidean":
        cfg = baselines.BaselineConfig("euclidean_full_info", config.tau, config.eta,
                                       1 if config.T0 == "auto" else config.T0, config.delta)
        w = Profile.uniform(game)
        for t in range(T + 1):
            if t in logged:
                eta_t, tau_t = baselines.euclidean_schedule(cfg, t)
                rec = RunRecord(t, exploitability(game, w),
                                _safe_dual_distance(dual_cone_distance, game, w, tau_t),
                                tau_t, eta_t, float(w.mu.min()), float(w.nu.min()),
                                2.0 * K * tau_t)
                monitor.row(rec)
                yield rec
            if t == T:
                return
            new = baselines.euclidean_step(game, w, t, cfg)
            monitor.step(w.mu, new.mu, ratio=False)
            monitor.step(w.nu, new.nu, ratio=False)
            w = new

    params, _ = schedule_for(config, K, 2.0)
    monitor.schedule(params, T)
    update = player_update if config.algorithm == "logbarrier" else baselines.entropy_player_update
    pmin = PlayerState.initial("min", A, params)
    pmax = PlayerState.initial("max", B, params)
    check_ratio = config.algorithm == "logbarrier"
    for t in range(T + 1):
        w = Profile(pmin.policy, pmax.policy)
        if t in logged:
            tau_t = tau_at(params, t)
            rec = RunRecord(t, exploitability(game, w),
                            _safe_dual_distance(dual_cone_distance, game, w, tau_t),
                            tau_t, eta_at(params, t),
                            float(w.mu.min()), float(w.nu.min()), 2.0 * K * tau_t)
            monitor.row(rec)
            yield rec
        if t == T:
            return
        event = sample_round(game, w, rng)
        new_min = update(pmin, event.action_min, event.loss)
        new_max = update(pmax, event.action_max, event.loss)
        monitor.step(pmin.policy, new_min.policy, check_ratio)
        monitor.step(pmax.policy, new_max.policy, check_ratio)
        pmin, pmax = new_min, new_max


def run_efg(config, monitor=None):
    """Yield ``RunRecord`` rows for an extensive-form run (log-barrier only)."""
    game = config.resolve_game()
    if not isinstance(game, ExtensiveFormGame):
        raise ConfigError("run_efg needs an extensive-form game")
    if config.algorithm != "logbarrier":
        raise ConfigError("only the log-barrier learner is defined on extensive-form games")
    monitor = monitor if monitor is not None else Monitor()
    K = game.num_sequences
    monitor.K = K
    T = config.steps
    logged = set(config.log_times or log_steps(T, config.log_stride))
    params, _ = schedule_for(config, K, 2.0 * game.horizon)
    monitor.schedule(params, T)
    rng = np.random.default_rng(config.seed)
    pmin = TreeplexPlayerState.initial("min", game.min_treeplex, params)
    pmax = TreeplexPlayerState.initial("max", game.max_treeplex, params)
    for t in range(T + 1):
        w = (pmin.policy, pmax.policy)
        if t in logged:
            tau_t = tau_at(params, t)
            rec = RunRecord(t, efg_exploitability(game, w),
                            _safe_dual_distance(efg_dual_cone_distance, game, w, tau_t),
                            tau_t, eta_at(params, t),
                            float(w[0].values.min()), float(w[1].values.min()), 2.0 * K * tau_t)
            monitor.row(rec)
            yield rec
        if t == T:
            return
        traj = sample_trajectory(game, w, rng)
        new_min = treeplex_player_update(pmin, own_view(traj, "min"))
        new_max = treeplex_player_update(pmax, own_view(traj, "max"))
        for old, new in ((pmin, new_min), (pmax, new_max)):
            r = new.policy.constraint_residual()
            monitor.residual(r)
            monitor.step(old.policy.values, new.policy.values, residual=r)
        pmin, pmax = new_min, new_max


class RunResult(NamedTuple):
    records: list
    monitor: Monitor
    params: dict


def execute(config):
    """Run to completion, write the CSV (and a JSON sidecar) if ``config.out`` is set."""
    game = config.resolve_game()
    cfg = replace(config, game=game)
    monitor = Monitor()
    runner = run_matrix if isinstance(game, MatrixGame) else run_efg
    records = list(runner(cfg, monitor))
    info = {"algorithm": config.algorithm, "eta": config.eta, "tau": config.tau,
            "delta": config.delta, "seed": config.seed, "steps": config.steps}
    if config.algorithm == "euclidean":
        info["T0"] = 1 if config.T0 == "auto" else config.T0
    else:
        sigma = 2.0 if isinstance(game, MatrixGame) else 2.0 * game.horizon
        K = game.num_actions if isinstance(game, MatrixGame) else game.num_sequences
        params, report = schedule_for(cfg, K, sigma)
        info["T0"] = params.T0
        info["sigma_prime"] = report.sigma_prime
        info["validation_passed"] = report.passed
    if config.out:
        write_records(records, config.out)
        with open(config.out + ".json", "w", encoding="utf-8") as fh:
            json.dump({"config": info, "monitor": monitor.as_dict()}, fh, indent=1,
                      sort_keys=True)
            fh.write("\n")
    return RunResult(records, monitor, info)


class RateFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    tail_fraction: float
    num_points: int


def fit_rate(records, tail_fraction=0.5, T0=0):
    """Least-squares slope of ``log(eg)`` against ``log(t + T0)`` on the tail."""
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError("tail_fraction must lie in (0, 1]")
    records = list(records)
    n = len(records)
    tail = records[n - math.ceil(tail_fraction * n):] if n else []
    pts = [(r.t + T0, r.eg) for r in tail if r.eg > 0.0 and r.t + T0 > 0]
    if len(pts) < 10:
        raise InsufficientDataError(f"need at least 10 tail records with eg > 0, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    fit = stats.linregress(x, y)
    return RateFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2),
                   tail_fraction, len(pts))


@dataclass(frozen=True)
class SweepSpec:
    """Grid of runs: every combination of ``eta``, ``tau``, ``delta`` and seed."""

    game: str
    steps: int
    seeds: tuple = (0,)
    eta: tuple = (0.05,)
    tau: tuple = (10.0,)
    delta: tuple = (0.05,)
    algorithm: str = "logbarrier"
    T0: object = "auto"
    out_dir: str = None
    workers: int = 1
    log_stride: object = "geometric"
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, doc):
        known = {k: v for k, v in doc.items() if k in cls.__dataclass_fields__}
        for name in ("seeds", "eta", "tau", "delta"):
            if name in known:
                v = known[name]
                known[name] = tuple(v) if isinstance(v, list) else (v,)
        if "game" not in known or "steps" not in known:
            raise ConfigError("sweep config needs 'game' and 'steps'")
        return cls(**known)

    def configs(self):
        out = []
        for eta in self.eta:
            for tau in self.tau:
                for delta in self.delta:
                    for seed in self.seeds:
                        path = None
                        if self.out_dir:
                            name = f"run_eta{eta:g}_tau{tau:g}_delta{delta:g}_seed{seed}.csv"
                            path = os.path.join(self.out_dir, name)
                        out.append(RunConfig(self.game, self.steps, self.algorithm, eta, tau,
                                             delta, self.T0, seed, self.log_stride, None, path))
        return out


def _sweep_one(config):
    result = execute(config)
    last = result.records[-1]
    return {"eta": config.eta, "tau": config.tau, "delta": config.delta, "seed": config.seed,
            "T0": result.params["T0"], "final_eg": last.eg, "final_d_tau": last.d_tau,
            "out": config.out}


def sweep(spec):
    """Run independent configurations, in parallel when ``workers > 1``."""
    configs = spec.configs()
    if spec.out_dir:
        os.makedirs(spec.out_dir, exist_ok=True)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(_sweep_one, configs))
    return [_sweep_one(c) for c in configs]
