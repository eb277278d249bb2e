import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import expected_max_iid_normal, expected_max_with_replacement
from screensim._random import BASELINE_STREAM, make_rng
from screensim.allocation import Allocation, CostModel
from screensim.pipeline import RewardDistribution
from screensim.policy import (
    PolicyOutcome,
    random_baseline_distribution,
    random_baseline_rewards,
    random_baseline_trials,
    ucb_score,
    xplt_select,
)
from screensim.prior import PriorSpec, build_prior
from screensim.sampler import candidate_cholesky


class TestUcb:
    def test_zero_c_is_mean(self):
        d = RewardDistribution.from_samples([0.3, 1.7, 2.2])
        assert ucb_score(d, 0.0) == d.mean

    def test_zero_variance(self):
        assert ucb_score(RewardDistribution.from_samples([1.0, 1.0, 1.0]), 5.0) == 1.0

    def test_two_samples(self):
        score = ucb_score(RewardDistribution.from_samples([0.0, 2.0]), 1.0)
        assert score == pytest.approx(1 + math.sqrt(2), rel=1e-15)
        assert score == pytest.approx(2.414, abs=5e-4)

    def test_negative_c(self):
        with pytest.raises(ValueError):
            ucb_score(RewardDistribution.from_samples([0.0, 2.0]), -1.0)


class TestBaselineTrials:
    def test_base_budget(self):
        assert random_baseline_trials(CostModel((1.0, 10.0, 100.0), 2500.0)) == 25

    def test_exhaustive_budget(self):
        assert random_baseline_trials(CostModel((1.0, 10.0, 100.0), 50_000.0)) == 500

    def test_leftover_discarded(self):
        assert random_baseline_trials(CostModel((1.0, 10.0, 100.0), 2599.0)) == 25

    def test_too_small(self):
        with pytest.raises(ValueError, match="budget below one final-stage trial"):
            random_baseline_trials(CostModel((1.0, 10.0, 100.0), 99.0))


class TestRandomBaseline:
    def test_duplicates_reuse_scores(self):
        prior = build_prior(PriorSpec(m=5))
        L = candidate_cholesky(prior)
        rewards = random_baseline_rewards(prior, 40, 20, 3)
        for i in range(1, 21):
            rng = make_rng((3, i), BASELINE_STREAM)
            y = L @ rng.standard_normal(5)
            # 40 picks from 5 candidates almost surely cover all of them
            assert rewards[i - 1] == y.max()

    def test_never_exceeds_global_max(self):
        prior = build_prior(PriorSpec(m=50, seed=2))
        L = candidate_cholesky(prior)
        scale = math.sqrt(prior.Sigma[-1, -1])
        rewards = random_baseline_rewards(prior, 25, 200, 9)
        for i in range(1, 201):
            z = make_rng((9, i), BASELINE_STREAM).standard_normal(50)
            assert rewards[i - 1] <= scale * (L @ z).max()

    def test_pointwise_monotone_in_k(self):
        prior = build_prior(PriorSpec(m=80, seed=1))
        prev = random_baseline_rewards(prior, 1, 300, 4)
        for k in (2, 5, 25, 100, 400):
            cur = random_baseline_rewards(prior, k, 300, 4)
            assert np.all(cur >= prev)
            prev = cur

    def test_deterministic(self):
        prior = build_prior(PriorSpec(m=30))
        cost = CostModel((1.0, 10.0, 100.0), 2500.0)
        a = random_baseline_distribution(prior, cost, 50, 1)
        b = random_baseline_distribution(prior, cost, 50, 1)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_calibration_against_occupancy_oracle(self):
        oracle = expected_max_with_replacement(25, 500)
        # frozen values of the independent oracles
        assert oracle == pytest.approx(1.9547523086512295, abs=1e-9)
        assert expected_max_iid_normal(25) == pytest.approx(1.9653146097903598, abs=1e-9)
        prior = build_prior(PriorSpec(m=500, ell_x=1e-3))
        d = random_baseline_distribution(prior, CostModel((1.0, 10.0, 100.0), 2500.0), 5000, 0)
        assert abs(d.mean - oracle) <= 0.05
        assert abs(d.mean - 1.97) <= 0.05


class TestXplt:
    def test_single_extremal_allocation(self):
        prior = build_prior(PriorSpec(m=4))
        cost = CostModel((1.0, 1.0, 1.0), 4 + 2 + 1)
        out = xplt_select(prior, cost, 5, 0)
        assert out.chosen == Allocation((4, 2, 1))
        assert len(out.all_evaluated) == 1

    def test_chosen_has_max_mean(self):
        prior = build_prior(PriorSpec(m=40, seed=3))
        out = xplt_select(prior, CostModel((1.0, 10.0, 100.0), 600.0), 50, 2)
        means = [e.mean for e in out.all_evaluated]
        assert out.reward_dist.mean == max(means)
        chosen = [e for e in out.all_evaluated if e.allocation == out.chosen]
        assert chosen[0].mean == out.reward_dist.mean

    def test_ties_prefer_lexicographically_largest(self):
        # Sigma all ones and X = I: every allocation reaches the global max
        spec = PriorSpec(m=6, ell_x=1e-3, ell_s=10.0)
        prior = build_prior(spec)
        out = xplt_select(prior, CostModel((1.0, 1.0, 1.0), 100.0), 10, 0, all_feasible=True)
        assert len({e.mean for e in out.all_evaluated}) == 1
        assert out.chosen == max(e.allocation for e in out.all_evaluated)

    def test_stage_count_mismatch(self):
        with pytest.raises(ValueError):
            xplt_select(build_prior(PriorSpec(m=10)), CostModel((1.0, 2.0), 30.0), 5, 0)

    def test_json_round_trip(self):
        prior = build_prior(PriorSpec(m=20))
        out = xplt_select(prior, CostModel((1.0, 10.0, 100.0), 300.0), 5, 0)
        data = json.loads(json.dumps(out.to_json()))
        assert data["chosen"] == list(out.chosen.counts)
        assert len(data["evaluated"]) == len(out.all_evaluated)
        assert isinstance(out, PolicyOutcome)

    @settings(max_examples=30, deadline=None)
    @given(
        shift=st.integers(-400, 400).map(lambda v: v / 8),
        means=st.lists(st.integers(-24, 24).map(lambda v: v / 8), min_size=2, max_size=8),
    )
    def test_argmax_invariant_to_shift(self, shift, means):
        # dyadic values keep the shifted means exact
        allocs = [Allocation((20, 10 - i, 1)) for i in range(len(means))]
        pick = lambda ms: max(range(len(ms)), key=lambda i: (ms[i], allocs[i].counts))
        shifted = [RewardDistribution.from_samples([m + shift, m + shift]).mean for m in means]
        assert pick(means) == pick(shifted)
        d = RewardDistribution.from_samples([means[0], means[1]])
        assert ucb_score(d, 0.0) == d.mean


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="top-quartile priors favour m*_3 of 16-18 at this seed")
def test_high_reward_priors_spend_about_half_on_final_stage(throughput_rows):
    rows = [r for r in throughput_rows if r.feasible]
    means = np.array([r.mean_reward for r in rows])
    top = [r for r, v in zip(rows, means) if v >= np.quantile(means, 0.75)]
    m3 = np.median([r.allocation.counts[-1] for r in top])
    assert 10 <= m3 <= 15
