"""Pipeline simulation under the pure-exploitation inter-stage policy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._random import NOISE_STREAM, TRUTH_STREAM, SeedLike, _entropy, make_rng
from .allocation import Allocation, AllocationLike
from .prior import PriorModel
from .sampler import condition_and_filter, init_sampler, sample_current_stage


def select_survivors_exploit(scores, k: int) -> np.ndarray:
    """Positions of the ``k`` highest scores, in increasing position order.

    Ties go to the smaller position.
    """
    s = np.asarray(scores, dtype=float)
    if not 1 <= k < s.shape[0]:
        raise ValueError(f"k must satisfy 1 <= k < {s.shape[0]}, got {k}")
    order = np.argsort(-s, kind="stable")
    return np.sort(order[:k])


def multi_fidelity_reward(final_scores) -> float:
    """Best final-stage score among the surviving candidates."""
    s = np.asarray(final_scores, dtype=float)
    if s.size == 0:
        raise ValueError("no final scores to reward")
    return float(np.max(s))


@dataclass
class StageRecord:
    survivor_ids: np.ndarray
    scores: np.ndarray


@dataclass
class SimulationTrace:
    """One simulated pipeline execution."""

    allocation: Allocation
    seed: tuple[int, ...]
    stages: list[StageRecord] = field(default_factory=list)
    reward: float = float("nan")

    def to_json(self) -> dict:
        return {
            "seed": list(self.seed),
            "allocation": list(self.allocation.counts),
            "stages": [
                {"survivors": rec.survivor_ids.tolist(), "scores": rec.scores.tolist()}
                for rec in self.stages
            ],
            "reward": self.reward,
        }


def _as_allocation(alloc: AllocationLike) -> Allocation:
    return alloc if isinstance(alloc, Allocation) else Allocation(tuple(alloc))


def simulate_once(
    prior: PriorModel,
    alloc: AllocationLike,
    seed: SeedLike,
    noise_std: float = 0.0,
) -> SimulationTrace:
    """Simulate the pipeline once with a fresh ground truth drawn from ``prior``.

    Ground-truth scores are sampled lazily; every stage consumes ``m``
    normals from the truth stream, so simulations sharing a seed share their
    ground truth across allocations. With ``noise_std > 0`` the screening
    decisions see ``truth + noise`` (noise from a separate stream) while the
    reward is the best ground-truth final score.
    """
    alloc = _as_allocation(alloc)
    counts = alloc.counts
    if len(counts) != prior.n:
        raise ValueError(f"allocation has {len(counts)} stages, prior has {prior.n}")
    if counts[0] != prior.m:
        raise ValueError(f"first stage must evaluate all {prior.m} candidates, got {counts[0]}")
    key = _entropy(seed)
    truth_rng = make_rng(key, TRUTH_STREAM)
    noise_rng = make_rng(key, NOISE_STREAM) if noise_std > 0 else None

    trace = SimulationTrace(alloc, key)
    state = init_sampler(prior)
    for j in range(prior.n):
        truth = sample_current_stage(state, truth_rng)
        trace.stages.append(StageRecord(state.survivor_ids, truth))
        if j == prior.n - 1:
            break
        observed = truth
        if noise_rng is not None:
            observed = truth + noise_std * noise_rng.standard_normal(truth.shape[0])
        keep = select_survivors_exploit(observed, counts[j + 1])
        state = condition_and_filter(state, truth, keep)
    trace.reward = multi_fidelity_reward(trace.stages[-1].scores)
    return trace


@dataclass(frozen=True)
class RewardDistribution:
    """Empirical reward sample with its mean and (n-1) sample variance."""

    samples: np.ndarray
    mean: float
    variance: float

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "RewardDistribution":
        arr = np.asarray(samples, dtype=float)
        if arr.size < 2:
            raise ValueError("need at least two samples")
        arr.setflags(write=False)
        return cls(arr, float(np.mean(arr)), float(np.var(arr, ddof=1)))

    @property
    def n_sims(self) -> int:
        return int(self.samples.shape[0])

    @property
    def std_error(self) -> float:
        return float(np.sqrt(self.variance / self.n_sims))


def simulate_allocations(
    prior: PriorModel,
    allocs: Sequence[Allocation],
    seed: SeedLike,
    noise_std: float = 0.0,
) -> np.ndarray:
    """Rewards of several allocations on one shared ground-truth draw.

    Bit-identical to calling :func:`simulate_once` for each allocation with
    the same ``seed``; the first stage (which every allocation evaluates in
    full) is sampled and conditioned once and the generator states are
    cloned for the remaining stages.
    """
    if prior.n == 1:
        return np.array([simulate_once(prior, a, seed, noise_std).reward for a in allocs])
    key = _entropy(seed)
    truth_rng = make_rng(key, TRUTH_STREAM)
    noise_rng = make_rng(key, NOISE_STREAM) if noise_std > 0 else None

    state0 = init_sampler(prior)
    y1 = sample_current_stage(state0, truth_rng)
    observed1 = y1
    if noise_rng is not None:
        observed1 = y1 + noise_std * noise_rng.standard_normal(y1.shape[0])
    truth_after = truth_rng.bit_generator.state
    noise_after = noise_rng.bit_generator.state if noise_rng is not None else None
    order1 = np.argsort(-observed1, kind="stable")

    rewards = np.empty(len(allocs))
    for a_idx, alloc in enumerate(allocs):
        counts = alloc.counts
        if len(counts) != prior.n or counts[0] != prior.m:
            raise ValueError(f"allocation {alloc} does not fit prior with m={prior.m}, n={prior.n}")
        truth_rng.bit_generator.state = truth_after
        if noise_rng is not None:
            noise_rng.bit_generator.state = noise_after
        keep = np.sort(order1[: counts[1]])
        state = condition_and_filter(state0, y1, keep)
        truth = None
        for j in range(1, prior.n):
            truth = sample_current_stage(state, truth_rng)
            if j == prior.n - 1:
                break
            observed = truth
            if noise_rng is not None:
                observed = truth + noise_std * noise_rng.standard_normal(truth.shape[0])
            state = condition_and_filter(state, truth, select_survivors_exploit(observed, counts[j + 1]))
        rewards[a_idx] = multi_fidelity_reward(truth)
    return rewards


def estimate_reward_distributions(
    prior: PriorModel,
    allocs: Sequence[AllocationLike],
    n_sims: int,
    base_seed: int,
    noise_std: float = 0.0,
) -> list[RewardDistribution]:
    """Reward distributions for several allocations under common random numbers.

    Same seeds and results as calling :func:`estimate_reward_distribution`
    per allocation, but the shared first stage is simulated once per index.
    """
    if n_sims < 2:
        raise ValueError("n_sims must be >= 2")
    allocs = [_as_allocation(a) for a in allocs]
    table = np.empty((n_sims, len(allocs)))
    for i in range(1, n_sims + 1):
        table[i - 1] = simulate_allocations(prior, allocs, (base_seed, i), noise_std)
    return [RewardDistribution.from_samples(np.ascontiguousarray(table[:, a])) for a in range(len(allocs))]


def estimate_reward_distribution(
    prior: PriorModel,
    alloc: AllocationLike,
    n_sims: int,
    base_seed: int,
    noise_std: float = 0.0,
) -> RewardDistribution:
    """Monte-Carlo reward distribution; simulation ``i`` uses seed ``(base_seed, i)``, i = 1..n_sims."""
    if n_sims < 2:
        raise ValueError("n_sims must be >= 2")
    alloc = _as_allocation(alloc)
    rewards = [
        simulate_once(prior, alloc, (base_seed, i), noise_std).reward for i in range(1, n_sims + 1)
    ]
    return RewardDistribution.from_samples(rewards)
