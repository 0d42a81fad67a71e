"""Uncoupled bandit learning in zero-sum games via log-barrier regularized mirror descent."""

from .baselines import BaselineConfig, entropy_step, euclidean_step, project_simplex
from .efg import (ExtensiveFormGame, State, TreeplexPlayerState, efg_dual_cone_distance,
                  efg_exploitability, efg_pseudo_gradient, efg_regularized_estimate,
                  best_response_value, sample_trajectory, treeplex_player_update, validate_game)
from .errors import (ConfigError, DomainError, GameError, GameFormatError,
                     InfeasibleParametersError, InsufficientDataError, NumericalError, ShapeError,
                     StepDomainError)
from .fileio import RunRecord, load_game, read_records, save_game, write_records
from .games import embed_matrix, kuhn_toy, matching_pennies, random_matrix_game, two_stage_toy
from .harness import Monitor, RateFit, RunConfig, execute, fit_rate, run_efg, run_matrix, sweep
from .matrix import (FeedbackEvent, MatrixGame, Profile, dual_cone_distance, exploitability,
                     importance_estimates, local_norm, pseudo_gradient, sample_round)
from .omd import (PlayerState, ScheduleParams, ValidationReport, derive_T0, eta_at, mirror_step,
                  player_update, regularized_estimate, tau_at, validate)
from .treeplex import (Treeplex, TreeplexPolicy, behavioral_to_sequence, sequence_to_behavioral,
                       treeplex_mirror_step)

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "entropy_step",
    "euclidean_step",
    "project_simplex",
    "ExtensiveFormGame",
    "State",
    "TreeplexPlayerState",
    "efg_dual_cone_distance",
    "efg_exploitability",
    "efg_pseudo_gradient",
    "efg_regularized_estimate",
    "best_response_value",
    "sample_trajectory",
    "treeplex_player_update",
    "validate_game",
    "ConfigError",
    "DomainError",
    "GameError",
    "GameFormatError",
    "InfeasibleParametersError",
    "InsufficientDataError",
    "NumericalError",
    "ShapeError",
    "StepDomainError",
    "RunRecord",
    "load_game",
    "read_records",
    "save_game",
    "write_records",
    "embed_matrix",
    "kuhn_toy",
    "matching_pennies",
    "random_matrix_game",
    "two_stage_toy",
    "Monitor",
    "RateFit",
    "RunConfig",
    "execute",
    "fit_rate",
    "run_efg",
    "run_matrix",
    "sweep",
    "FeedbackEvent",
    "MatrixGame",
    "Profile",
    "dual_cone_distance",
    "exploitability",
    "importance_estimates",
    "local_norm",
    "pseudo_gradient",
    "sample_round",
    "PlayerState",
    "ScheduleParams",
    "ValidationReport",
    "derive_T0",
    "eta_at",
    "mirror_step",
    "player_update",
    "regularized_estimate",
    "tau_at",
    "validate",
    "Treeplex",
    "TreeplexPolicy",
    "behavioral_to_sequence",
    "sequence_to_behavioral",
    "treeplex_mirror_step",
]
