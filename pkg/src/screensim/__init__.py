"""Simulation and allocation optimization for multi-stage screening pipelines."""

from .allocation import (
    Allocation,
    CostModel,
    InfeasibleBudgetError,
    dominates,
    enumerate_extremal_allocations,
    enumerate_feasible_allocations,
    is_feasible,
    total_cost,
)
from .pipeline import (
    RewardDistribution,
    SimulationTrace,
    estimate_reward_distribution,
    estimate_reward_distributions,
    multi_fidelity_reward,
    select_survivors_exploit,
    simulate_once,
)
from .policy import (
    PolicyOutcome,
    random_baseline_distribution,
    random_baseline_trials,
    ucb_score,
    xplt_select,
)
from .prior import (
    PriorModel,
    PriorSpec,
    build_prior,
    build_sq_exp_covariance,
    sample_latent_points,
    stage_distance_features,
)
from .sampler import (
    CholeskyError,
    DegenerateStageError,
    SamplerState,
    cholesky_factor,
    condition_and_filter,
    dense_joint_covariance,
    init_sampler,
    sample_current_stage,
)

__version__ = "0.1.0"
