"""Parameter sweeps and prior-sampling studies built on the core package."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
from scipy import stats

from ..allocation import Allocation, CostModel, InfeasibleBudgetError
from ..pipeline import RewardDistribution, estimate_reward_distribution
from ..policy import PolicyOutcome, random_baseline_distribution, xplt_select
from ..prior import PriorModel, build_prior, stage_distance_features
from ..sampler import candidate_cholesky
from .config import ExperimentConfig

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ResultRow:
    """One flat output record; field order is the CSV column order."""

    param: str
    value: Optional[float]
    replicate: int
    policy: str
    alloc: str
    mean_reward: Optional[float]
    var_reward: Optional[float]
    n_sims: int
    d12: Optional[float] = None
    d13: Optional[float] = None
    wall_s: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.alloc != INFEASIBLE

    @property
    def allocation(self) -> Optional[Allocation]:
        return Allocation.parse(self.alloc) if self.feasible and self.alloc else None


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """``map`` that may run on a thread pool but always returns results in input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _distances(prior: PriorModel) -> tuple[Optional[float], Optional[float]]:
    if prior.n < 3:
        return None, None
    return stage_distance_features(prior.stage_latents)


def _xplt_row(param, value, replicate, prior, cost, cfg: ExperimentConfig, sim_seed: int) -> tuple[ResultRow, Optional[PolicyOutcome]]:
    d12, d13 = _distances(prior)
    t0 = time.perf_counter()
    try:
        outcome = xplt_select(
            prior, cost, cfg.n_sims, sim_seed, all_feasible=cfg.all_feasible, noise_std=cfg.noise_std
        )
    except InfeasibleBudgetError as exc:
        log.warning("%s=%s replicate %d: %s", param, value, replicate, exc)
        return ResultRow(param, value, replicate, "xplt", INFEASIBLE, None, None, 0, d12, d13), None
    dist = outcome.reward_dist
    row = ResultRow(
        param, value, replicate, "xplt", str(outcome.chosen), dist.mean, dist.variance, dist.n_sims,
        d12, d13, time.perf_counter() - t0,
    )
    return row, outcome


def _random_row(param, value, replicate, prior, cost, cfg: ExperimentConfig, sim_seed: int) -> ResultRow:
    d12, d13 = _distances(prior)
    t0 = time.perf_counter()
    try:
        dist = random_baseline_distribution(prior, cost, cfg.n_sims, sim_seed)
    except ValueError as exc:
        log.warning("%s=%s replicate %d: %s", param, value, replicate, exc)
        return ResultRow(param, value, replicate, "random", INFEASIBLE, None, None, 0, d12, d13)
    return ResultRow(
        param, value, replicate, "random", "", dist.mean, dist.variance, dist.n_sims,
        d12, d13, time.perf_counter() - t0,
    )


def _policy_rows(param, value, replicate, prior, cost, cfg, sim_seed) -> list[ResultRow]:
    candidate_cholesky(prior)
    xrow, _ = _xplt_row(param, value, replicate, prior, cost, cfg, sim_seed)
    rrow = _random_row(param, value, replicate, prior, cost, cfg, sim_seed)
    return [xrow, rrow]


def run_optimize(cfg: ExperimentConfig, replicate: int = 0) -> tuple[list[ResultRow], Optional[PolicyOutcome], PriorModel]:
    prior = build_prior(cfg.prior_spec(replicate))
    row, outcome = _xplt_row("none", None, replicate, prior, cfg.cost_model(), cfg, cfg.sim_seed(replicate))
    return [row], outcome, prior


def run_baseline(cfg: ExperimentConfig, replicate: int = 0) -> tuple[list[ResultRow], PriorModel]:
    prior = build_prior(cfg.prior_spec(replicate))
    row = _random_row("none", None, replicate, prior, cfg.cost_model(), cfg, cfg.sim_seed(replicate))
    return [row], prior


def run_simulate(cfg: ExperimentConfig, alloc: Allocation, replicate: int = 0) -> tuple[list[ResultRow], PriorModel]:
    """Reward distribution of one fixed allocation (policy ``fixed``)."""
    prior = build_prior(cfg.prior_spec(replicate))
    d12, d13 = _distances(prior)
    t0 = time.perf_counter()
    dist = estimate_reward_distribution(prior, alloc, cfg.n_sims, cfg.sim_seed(replicate), cfg.noise_std)
    row = ResultRow(
        "none", None, replicate, "fixed", str(alloc), dist.mean, dist.variance, dist.n_sims,
        d12, d13, time.perf_counter() - t0,
    )
    return [row], prior


def _sweep_cell(cfg: ExperimentConfig, value: Optional[float], replicate: int) -> list[ResultRow]:
    axis = cfg.sweep_axis
    budget = cfg.budget
    overrides = {}
    if axis == "C_max":
        budget = float(value)
    elif axis in ("m", "d_s", "d_x"):
        overrides[axis] = int(value)
    elif axis in ("ell_s", "ell_x"):
        overrides[axis] = float(value)
    prior = build_prior(cfg.prior_spec(replicate, **overrides))
    cost = cfg.cost_model(budget=budget)
    return _policy_rows(axis, value, replicate, prior, cost, cfg, cfg.sim_seed(replicate))


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """Both policies for every sweep value and prior replicate.

    A replicate keeps its latent seeds and simulation seeds across sweep
    values, so each replicate traces one curve through the swept parameter.
    """
    values: Iterable[Optional[float]] = cfg.sweep_values if cfg.sweep_axis != "none" else [None]
    cells = [(v, r) for v in values for r in range(cfg.replicates)]
    chunks = ordered_map(lambda c: _sweep_cell(cfg, *c), cells, workers)
    return [row for chunk in chunks for row in chunk]


def stage_sampled_priors(cfg: ExperimentConfig, count: int) -> list[PriorModel]:
    """Priors sharing the candidate latents of replicate 0 but with fresh stage latents."""
    spec = cfg.prior_spec(0)
    return [build_prior(spec, stage_seed=cfg.stage_sample_seed(k)) for k in range(count)]


def run_heatmap(cfg: ExperimentConfig, n_priors: Optional[int] = None, workers: int = 1) -> list[ResultRow]:
    """XPLT and random rewards for many stage-latent samples, tagged with (d12, d13)."""
    if cfg.n != 3:
        raise ValueError("heatmap defined for 3 stages")
    count = cfg.n_priors if n_priors is None else n_priors
    priors = stage_sampled_priors(cfg, count)
    cost = cfg.cost_model()
    seed = cfg.sim_seed(0)
    candidate_cholesky(priors[0])

    def cell(k: int) -> list[ResultRow]:
        return _policy_rows("prior", float(k), 0, priors[k], cost, cfg, seed)

    chunks = ordered_map(cell, list(range(count)), workers)
    return [row for chunk in chunks for row in chunk]


def run_throughput(cfg: ExperimentConfig, n_priors: Optional[int] = None, workers: int = 1) -> list[ResultRow]:
    """Chosen allocation and XPLT reward for many stage-latent samples."""
    if cfg.n < 2:
        raise ValueError("throughput study needs at least 2 stages")
    count = cfg.n_priors if n_priors is None else n_priors
    priors = stage_sampled_priors(cfg, count)
    cost = cfg.cost_model()
    seed = cfg.sim_seed(0)

    def cell(k: int) -> ResultRow:
        return _xplt_row("prior", float(k), 0, priors[k], cost, cfg, seed)[0]

    return ordered_map(cell, list(range(count)), workers)


def run_cost_base_study(
    cfg: ExperimentConfig, bases: Optional[Sequence[float]] = None, workers: int = 1
) -> list[ResultRow]:
    """Costs ``(1, b, b^2)`` for each base ``b`` and each (budget, m) pair.

    The row value is the budget ratio ``C_max / (b^2 * m)``.
    """
    if cfg.n != 3:
        raise ValueError("cost-base study defined for 3 stages")
    bases = tuple(cfg.cost_bases if bases is None else bases)
    budgets = cfg.study_budgets or (cfg.budget,)
    ms = cfg.study_m or (cfg.m,)
    cells = [(b, m, c, r) for b in bases for m in ms for c in budgets for r in range(cfg.replicates)]

    def cell(args) -> list[ResultRow]:
        b, m, c_max, r = args
        prior = build_prior(cfg.prior_spec(r, m=m))
        cost = CostModel((1.0, b, b * b), c_max)
        ratio = c_max / (b * b * m)
        return _policy_rows(f"cost_base={b:g},m={m}", ratio, r, prior, cost, cfg, cfg.sim_seed(r))

    chunks = ordered_map(cell, cells, workers)
    return [row for chunk in chunks for row in chunk]


def _by_prior(rows: Sequence[ResultRow]) -> dict[float, dict[str, ResultRow]]:
    out: dict[float, dict[str, ResultRow]] = {}
    for row in rows:
        out.setdefault(row.value, {})[row.policy] = row
    return out


def heatmap_summary(rows: Sequence[ResultRow]) -> dict:
    """Worse-than-random fractions below (d13 < d12) and on/above the diagonal."""
    below = [0, 0]
    above = [0, 0]
    for pair in _by_prior(rows).values():
        x, r = pair.get("xplt"), pair.get("random")
        if x is None or r is None or not x.feasible or not r.feasible:
            continue
        bucket = below if x.d13 < x.d12 else above
        bucket[0] += x.mean_reward < r.mean_reward
        bucket[1] += 1
    frac = lambda b: b[0] / b[1] if b[1] else None
    return {
        "n_below": below[1],
        "n_above": above[1],
        "worse_frac_below": frac(below),
        "worse_frac_above": frac(above),
    }


def throughput_correlation(rows: Sequence[ResultRow]) -> Optional[float]:
    """Spearman correlation between the final-stage allocation and XPLT mean reward.

    ``None`` when undefined (fewer than 3 feasible rows or a constant column).
    """
    pts = [(r.allocation.counts[-1], r.mean_reward) for r in rows if r.policy == "xplt" and r.feasible]
    if len(pts) < 3:
        return None
    final, reward = np.array(pts, dtype=float).T
    if np.all(final == final[0]) or np.all(reward == reward[0]):
        return None
    rho = stats.spearmanr(final, reward).statistic
    return float(rho)


def summarize_distribution(dist: RewardDistribution) -> dict:
    return {"mean": dist.mean, "variance": dist.variance, "n_sims": dist.n_sims, "std_error": dist.std_error}
