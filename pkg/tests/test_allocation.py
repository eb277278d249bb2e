import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screensim.allocation import (
    Allocation,
    CostModel,
    InfeasibleBudgetError,
    dominates,
    enumerate_extremal_allocations,
    enumerate_feasible_allocations,
    is_feasible,
    total_cost,
)

BASE = CostModel((1.0, 10.0, 100.0), 2500.0)


def brute_force_extremal(costs, budget, m):
    """Every strictly decreasing tail, then an O(k^2) Pareto filter."""
    n = len(costs)
    feas = []
    for tail in itertools.combinations(range(m - 1, 0, -1), n - 1):
        counts = (m,) + tail
        if sum(c * k for c, k in zip(costs, counts)) <= budget:
            feas.append(counts)
    ext = [a for a in feas if not any(b != a and all(x >= y for x, y in zip(b, a)) for b in feas)]
    return sorted(ext, reverse=True), feas


class TestAllocation:
    def test_parse_and_str(self):
        a = Allocation.parse("500, 20,18")
        assert a.counts == (500, 20, 18)
        assert str(a) == "500,20,18"
        assert len(a) == 3 and a[1] == 20 and list(a) == [500, 20, 18]

    @pytest.mark.parametrize("counts", [(), (5, 5), (3, 4), (3, 0)])
    def test_rejects_invalid(self, counts):
        with pytest.raises(ValueError):
            Allocation(counts)

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            Allocation.parse("500,x")


class TestCost:
    @pytest.mark.parametrize(
        "counts, costs, expected",
        [((500, 20, 18), (1, 10, 100), 2500), ((5,), (2,), 10), ((500, 190, 1), (1, 10, 100), 2500)],
    )
    def test_total_cost(self, counts, costs, expected):
        assert total_cost(counts, CostModel(costs, 1e9)) == expected

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            total_cost((500, 20), BASE)

    @pytest.mark.parametrize(
        "counts, expected",
        [((500, 20, 18), True), ((500, 20, 20), False), ((500, 21, 18), False), ((499, 20, 18), False)],
    )
    def test_is_feasible(self, counts, expected):
        assert is_feasible(counts, BASE, 500) is expected

    @pytest.mark.parametrize("costs, budget", [((1.0, 0.0), 10.0), ((1.0, 2.0), 0.0), ((1.0, -1.0), 5.0)])
    def test_cost_model_validation(self, costs, budget):
        with pytest.raises(ValueError):
            CostModel(costs, budget)


class TestDominates:
    def test_examples(self):
        assert dominates((500, 30, 5), (500, 20, 5))
        assert not dominates((500, 30, 5), (500, 20, 6))
        assert not dominates((500, 30, 5), (500, 30, 5))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dominates((3, 2), (3, 2, 1))


class TestExtremal:
    def test_base_setting(self):
        got = [a.counts for a in enumerate_extremal_allocations(BASE, 500, 3)]
        assert got == [(500, 200 - 10 * k, k) for k in range(1, 19)]
        assert got == brute_force_extremal((1, 10, 100), 2500, 500)[0]

    def test_two_stage_toy(self):
        got = enumerate_extremal_allocations(CostModel((1.0, 1.0), 3 + 2), 3, 2)
        assert [a.counts for a in got] == [(3, 2)]

    def test_infeasible_budget(self):
        with pytest.raises(InfeasibleBudgetError, match="budget infeasible: cheapest allocation costs 620"):
            enumerate_extremal_allocations(CostModel((1.0, 10.0, 100.0), 600.0), 500)

    def test_too_few_candidates(self):
        with pytest.raises(InfeasibleBudgetError):
            enumerate_extremal_allocations(CostModel((1.0, 1.0, 1.0), 100.0), 2)

    def test_n_mismatch(self):
        with pytest.raises(ValueError):
            enumerate_extremal_allocations(BASE, 500, 4)

    def test_budget_tolerance(self):
        # 0.1 * 3 is not exactly 0.3 in binary; the tight allocation must still count
        cost = CostModel((0.1, 0.1, 0.1), 0.1 * 3 + 0.1 * 2 + 0.1)
        got = [a.counts for a in enumerate_extremal_allocations(CostModel((0.1, 0.1, 0.1), 0.6), 3)]
        assert got == [(3, 2, 1)]
        assert is_feasible((3, 2, 1), cost, 3)

    @settings(max_examples=150, deadline=None)
    @given(
        m=st.integers(2, 30),
        costs=st.lists(st.integers(1, 20), min_size=2, max_size=4),
        slack=st.floats(0.0, 1.0),
    )
    def test_matches_brute_force(self, m, costs, slack):
        n = len(costs)
        if m < n:
            return
        cheapest = m * costs[0] + sum(c * (n - 1 - i) for i, c in enumerate(costs[1:]))
        dearest = m * costs[0] + sum(c * (m - 1 - i) for i, c in enumerate(costs[1:]))
        budget = cheapest + round(slack * (dearest - cheapest))
        expected, feasible = brute_force_extremal(costs, budget, m)
        cost = CostModel(tuple(float(c) for c in costs), budget)
        got = [a.counts for a in enumerate_extremal_allocations(cost, m)]
        assert got == expected
        # coverage and antichain
        for f in feasible:
            assert any(g == f or dominates(g, f) for g in got)
        for a, b in itertools.permutations(got, 2):
            assert not dominates(a, b)
        assert [a.counts for a in enumerate_feasible_allocations(cost, m)] == sorted(feasible, reverse=True)

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(3, 25), scale=st.floats(1e-3, 1e3), budget=st.integers(30, 400))
    def test_scaling_invariance(self, m, scale, budget):
        costs = (1.0, 3.0, 7.0)
        base = CostModel(costs, float(budget))
        scaled = CostModel(tuple(c * scale for c in costs), budget * scale)
        try:
            ref = enumerate_extremal_allocations(base, m)
        except InfeasibleBudgetError:
            with pytest.raises(InfeasibleBudgetError):
                enumerate_extremal_allocations(scaled, m)
            return
        assert enumerate_extremal_allocations(scaled, m) == ref

    def test_deterministic(self):
        a = enumerate_extremal_allocations(BASE, 500)
        b = enumerate_extremal_allocations(BASE, 500)
        assert a == b
