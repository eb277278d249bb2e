"""Stage allocations, costs and the extremal feasible set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np


@dataclass(frozen=True, order=True)
class Allocation:
    """Candidates evaluated per stage, ``m_1 > m_2 > ... > m_n >= 1``."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise ValueError("allocation must have at least one stage")
        if counts[-1] < 1:
            raise ValueError(f"every stage needs at least one candidate: {counts}")
        if any(a <= b for a, b in zip(counts, counts[1:])):
            raise ValueError(f"allocation must be strictly decreasing: {counts}")

    @classmethod
    def parse(cls, text: str) -> "Allocation":
        """Parse ``"500,20,18"``."""
        try:
            counts = tuple(int(tok) for tok in text.split(","))
        except ValueError:
            raise ValueError(f"cannot parse allocation {text!r}") from None
        return cls(counts)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self.counts)

    def __len__(self) -> int:
        return len(self.counts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.counts)

    def __getitem__(self, j: int) -> int:
        return self.counts[j]


AllocationLike = Union[Allocation, Sequence[int]]


def _counts(alloc: AllocationLike) -> tuple[int, ...]:
    return alloc.counts if isinstance(alloc, Allocation) else tuple(int(c) for c in alloc)


@dataclass(frozen=True)
class CostModel:
    """Per-evaluation stage costs and the total budget."""

    costs: tuple[float, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        object.__setattr__(self, "budget", float(self.budget))
        if not self.costs or any(not c > 0 for c in self.costs):
            raise ValueError(f"costs must be positive: {self.costs}")
        if not self.budget > 0:
            raise ValueError(f"budget must be positive: {self.budget}")

    @property
    def n(self) -> int:
        return len(self.costs)


def total_cost(alloc: AllocationLike, cost: CostModel) -> float:
    counts = _counts(alloc)
    if len(counts) != cost.n:
        raise ValueError(f"allocation has {len(counts)} stages but cost model has {cost.n}")
    return float(sum(m * c for m, c in zip(counts, cost.costs)))


def is_feasible(alloc: AllocationLike, cost: CostModel, m: int) -> bool:
    counts = _counts(alloc)
    if len(counts) != cost.n or counts[0] != m or counts[-1] < 1:
        return False
    if any(a <= b for a, b in zip(counts, counts[1:])):
        return False
    return _fits(total_cost(counts, cost), cost.budget)


def dominates(a: AllocationLike, b: AllocationLike) -> bool:
    """True iff ``a >= b`` componentwise and ``a != b``."""
    ca, cb = _counts(a), _counts(b)
    if len(ca) != len(cb):
        raise ValueError("allocations have different lengths")
    return all(x >= y for x, y in zip(ca, cb)) and ca != cb


class InfeasibleBudgetError(ValueError):
    pass


_BUDGET_RTOL = 1e-9


def _fits(spend: float, budget: float) -> bool:
    # relative slack so that rescaling costs and budget together never flips feasibility
    return spend <= budget * (1.0 + _BUDGET_RTOL)


def _cheapest_cost(cost: CostModel, m: int) -> float:
    # m_1 = m, then the tail n-1, n-2, ..., 1
    n = cost.n
    return cost.costs[0] * m + sum(cost.costs[j] * (n - j) for j in range(1, n))


def _check_budget(cost: CostModel, m: int) -> None:
    n = cost.n
    if m < n:
        raise InfeasibleBudgetError(f"budget infeasible: {n} stages need at least {n} candidates, got m={m}")
    cheapest = _cheapest_cost(cost, m)
    if not _fits(cheapest, cost.budget):
        raise InfeasibleBudgetError(f"budget infeasible: cheapest allocation costs {cheapest:g}")


def _pareto_filter(cands: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Keep the candidates not dominated by any other candidate."""
    if not cands:
        return []
    arr = np.array(sorted(set(cands), reverse=True))
    keep = []
    for i, row in enumerate(arr):
        ge = np.all(arr >= row, axis=1)
        ge[i] = False
        if not ge.any():
            keep.append(tuple(int(v) for v in row))
    return keep


def enumerate_extremal_allocations(cost: CostModel, m: int, n: int | None = None) -> list[Allocation]:
    """Feasible allocations not dominated by another feasible allocation.

    Stages ``2..n-1`` are enumerated depth-first over every count the
    remaining budget allows; the last stage then takes its largest feasible
    count, since any smaller value is dominated. A final Pareto filter removes
    prefixes dominated by others. Output is sorted lexicographically,
    descending.

    Raises:
        InfeasibleBudgetError: if no feasible allocation exists.
    """
    n = cost.n if n is None else n
    if n != cost.n:
        raise ValueError(f"n={n} does not match cost model with {cost.n} stages")
    _check_budget(cost, m)
    if n == 1:
        return [Allocation((m,))]
    c = cost.costs
    # minimal spend of stages j..n-1 (0-based) given strictly decreasing counts ending at 1
    tail_min = [sum(c[k] * (n - k) for k in range(j, n)) for j in range(n + 1)]

    cands: list[tuple[int, ...]] = []
    budget = cost.budget

    def visit(prefix: list[int], spent: float) -> None:
        j = len(prefix)
        upper_by_order = prefix[-1] - 1
        if j == n - 1:
            top = min(upper_by_order, int(np.floor((budget - spent) / c[j])) + 1)
            while top >= 1 and not _fits(spent + top * c[j], budget):
                top -= 1
            if top >= 1:
                cands.append(tuple(prefix) + (top,))
            return
        for mj in range(n - j, upper_by_order + 1):
            if not _fits(spent + mj * c[j] + tail_min[j + 1], budget):
                break
            prefix.append(mj)
            visit(prefix, spent + mj * c[j])
            prefix.pop()

    visit([m], c[0] * m)
    return [Allocation(a) for a in _pareto_filter(cands)]


def enumerate_feasible_allocations(cost: CostModel, m: int) -> list[Allocation]:
    """Every feasible allocation, sorted lexicographically descending."""
    _check_budget(cost, m)
    n = cost.n
    c = cost.costs
    out: list[tuple[int, ...]] = []
    tail_min = [sum(c[k] * (n - k) for k in range(j, n)) for j in range(n + 1)]

    def visit(prefix: list[int], spent: float) -> None:
        j = len(prefix)
        if j == n:
            out.append(tuple(prefix))
            return
        for mj in range(n - j, prefix[-1]):
            if not _fits(spent + mj * c[j] + tail_min[j + 1], cost.budget):
                break
            prefix.append(mj)
            visit(prefix, spent + mj * c[j])
            prefix.pop()

    visit([m], c[0] * m)
    out.sort(reverse=True)
    return [Allocation(a) for a in out]
