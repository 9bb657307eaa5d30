"""colsafe: safe policy-parameter optimization with Nadaraya-Watson bounds.

Submodules
----------
kernel
    Compactly supported smoothing kernels and the normalized pair weight.
nw_estimator
    Incremental Nadaraya-Watson estimator with high-probability error bounds.
safe_learn
    Safe-set machinery and the optimization loop.
benchmarks
    Synthetic and LQR tuning problems with ground-truth oracles.
gp_baseline
    Deliberately dense Gaussian-process SafeOpt baseline.
concentration
    Monte-Carlo verification of the concentration bounds.
cli
    Command-line front end (run / compare / verify-bounds).
"""

__version__ = "0.1.0"

from .kernel import KernelSpec, evaluate_base, evaluate_pair
from .nw_estimator import NO_DATA, EstimateResult, EstimatorState, Observation
from .safe_learn import (
    CONVERGED,
    BoundState,
    DomainGrid,
    LoopState,
    best_guess,
    compute_expanders,
    compute_maximizers,
    run,
    select_next,
    update_bounds,
    update_safe_set,
)
from .benchmarks import ProblemSpec, evaluate, make_lqr_problem, make_synthetic_2d

__all__ = [
    "KernelSpec",
    "evaluate_base",
    "evaluate_pair",
    "NO_DATA",
    "EstimateResult",
    "EstimatorState",
    "Observation",
    "CONVERGED",
    "BoundState",
    "DomainGrid",
    "LoopState",
    "best_guess",
    "compute_expanders",
    "compute_maximizers",
    "run",
    "select_next",
    "update_bounds",
    "update_safe_set",
    "ProblemSpec",
    "evaluate",
    "make_lqr_problem",
    "make_synthetic_2d",
]
