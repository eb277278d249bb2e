"""Meta-policies over allocations and the no-screening random baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._random import BASELINE_STREAM, make_rng
from .allocation import (
    Allocation,
    CostModel,
    enumerate_extremal_allocations,
    enumerate_feasible_allocations,
)
from .pipeline import RewardDistribution, estimate_reward_distributions
from .prior import PriorModel
from .sampler import candidate_cholesky


@dataclass(frozen=True)
class EvaluatedAllocation:
    allocation: Allocation
    mean: float
    variance: float
    n_sims: int


@dataclass(frozen=True)
class PolicyOutcome:
    """Result of an XPLT optimization.

    ``all_evaluated`` follows enumeration order (lexicographically
    descending allocations).
    """

    chosen: Allocation
    reward_dist: RewardDistribution
    all_evaluated: tuple[EvaluatedAllocation, ...]

    def to_json(self) -> dict:
        return {
            "chosen": list(self.chosen.counts),
            "mean_reward": self.reward_dist.mean,
            "var_reward": self.reward_dist.variance,
            "n_sims": self.reward_dist.n_sims,
            "evaluated": [
                {
                    "alloc": list(e.allocation.counts),
                    "mean_reward": e.mean,
                    "var_reward": e.variance,
                    "n_sims": e.n_sims,
                }
                for e in self.all_evaluated
            ],
        }


def xplt_select(
    prior: PriorModel,
    cost: CostModel,
    n_sims: int,
    base_seed: int,
    *,
    all_feasible: bool = False,
    noise_std: float = 0.0,
) -> PolicyOutcome:
    """Pick the allocation with the highest Monte-Carlo mean reward.

    Every allocation is simulated with the same per-index seeds (common
    random numbers). Ties go to the lexicographically largest allocation.
    ``all_feasible`` evaluates the whole feasible set instead of only its
    extremal points.
    """
    if cost.n != prior.n:
        raise ValueError(f"cost model has {cost.n} stages, prior has {prior.n}")
    if all_feasible:
        allocs = enumerate_feasible_allocations(cost, prior.m)
    else:
        allocs = enumerate_extremal_allocations(cost, prior.m, prior.n)
    dists = estimate_reward_distributions(prior, allocs, n_sims, base_seed, noise_std)

    best = max(range(len(allocs)), key=lambda i: (dists[i].mean, allocs[i].counts))
    table = tuple(
        EvaluatedAllocation(a, d.mean, d.variance, d.n_sims) for a, d in zip(allocs, dists)
    )
    return PolicyOutcome(allocs[best], dists[best], table)


def ucb_score(dist: RewardDistribution, c: float) -> float:
    """Upper confidence bound ``mean + c * std``."""
    if c < 0:
        raise ValueError("c must be non-negative")
    if dist.n_sims < 2:
        raise ValueError("need at least two samples")
    return dist.mean + c * math.sqrt(dist.variance)


def random_baseline_trials(cost: CostModel) -> int:
    """Number of final-stage trials the whole budget buys."""
    k = int(math.floor(cost.budget / cost.costs[-1] * (1.0 + 1e-12)))
    if k < 1:
        raise ValueError("budget below one final-stage trial")
    return k


def random_baseline_rewards(prior: PriorModel, k: int, n_sims: int, base_seed: int) -> np.ndarray:
    """Per-simulation rewards of ``k`` uniform-with-replacement final-stage trials.

    Each simulation first draws the ``m`` normals behind every candidate's
    final-stage score and then the ``k`` candidate indices, so at a fixed
    seed a larger ``k`` evaluates a superset of the smaller ``k``'s picks.
    Repeated picks reuse the same score.
    """
    if k < 1:
        raise ValueError("budget below one final-stage trial")
    L = candidate_cholesky(prior)
    scale = math.sqrt(max(float(prior.Sigma[-1, -1]), 0.0))
    out = np.empty(n_sims)
    for i in range(1, n_sims + 1):
        rng = make_rng((base_seed, i), BASELINE_STREAM)
        z = rng.standard_normal(prior.m)
        # one double per pick keeps the pick sequence prefix-stable in k;
        # bounded integer draws are not
        u = rng.random(k)
        picks = np.unique(np.minimum((u * prior.m).astype(np.intp), prior.m - 1))
        # score every candidate once so all k share bit-identical scores
        out[i - 1] = scale * np.max((L @ z)[picks])
    return out


def random_baseline_distribution(
    prior: PriorModel, cost: CostModel, n_sims: int, base_seed: int
) -> RewardDistribution:
    """Reward distribution of spending the whole budget on random final-stage trials."""
    if n_sims < 2:
        raise ValueError("n_sims must be >= 2")
    k = random_baseline_trials(cost)
    return RewardDistribution.from_samples(random_baseline_rewards(prior, k, n_sims, base_seed))
