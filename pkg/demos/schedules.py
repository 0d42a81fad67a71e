"""
Choosing schedule constants
===========================

The step size and regularization decay as (t + T0)^(-3/4) and
log((t + T0)/delta) (t + T0)^(-1/4). This checks a few candidate settings
before committing to a long run.
"""

from logbarrier_games import ScheduleParams, derive_T0, eta_at, tau_at, validate
from logbarrier_games.errors import InfeasibleParametersError
from logbarrier_games.omd import admissible_T0

# default setting on a 2x2 game (K = 4 actions in total)
T0 = derive_T0(0.05, 10.0, 0.05)
params = ScheduleParams(0.05, 10.0, T0, 0.05)
print(validate(params, K=4).format())

# the first few schedule values
for t in (0, 10, 1000, 100_000):
    print(f"t={t:>7d}  eta_t={eta_at(params, t):.3e}  tau_t={tau_at(params, t):.3f}")

# larger games need a larger offset for the step-size check
for K in (4, 52, 400):
    print(f"K={K:>4d}  smallest admissible T0 = {admissible_T0(0.05, 10.0, 0.05, K, sigma=4.0)}")

# tau close to one leaves no feasible offset
try:
    derive_T0(0.05, 1.01, 0.99)
except InfeasibleParametersError as exc:
    print("infeasible:", exc)
