"""Independent reference implementations used only by the tests."""

import math

import numpy as np
from scipy import integrate, stats

from screensim._random import make_rng
from screensim.prior import PriorSpec, build_prior
from screensim.sampler import condition_and_filter, dense_joint_covariance, init_sampler, sample_current_stage


def dense_condition(gamma, observed_idx, observed_values, target_idx):
    """Gaussian conditioning on the full joint covariance via least squares."""
    g_oo = gamma[np.ix_(observed_idx, observed_idx)]
    g_to = gamma[np.ix_(target_idx, observed_idx)]
    g_tt = gamma[np.ix_(target_idx, target_idx)]
    w = np.linalg.lstsq(g_oo, g_to.T, rcond=None)[0].T
    return w @ observed_values, g_tt - w @ g_to.T


def expected_max_iid_normal(k):
    """E[max of k iid N(0,1)] by quadrature."""
    f = lambda x: x * k * stats.norm.pdf(x) * stats.norm.cdf(x) ** (k - 1)
    return integrate.quad(f, -12, 12, epsabs=1e-13, limit=200)[0]


def expected_max_with_replacement(k, m):
    """E[max] when k uniform-with-replacement picks from m iid N(0,1) scores.

    Occupancy distribution of the number of distinct picks, then mixes
    the expected max of that many iid normals.
    """
    p = np.zeros(k + 1)
    p[0] = 1.0
    for _ in range(k):
        q = np.zeros(k + 1)
        for d in range(k):
            if p[d]:
                q[d] += p[d] * d / m
                q[d + 1] += p[d] * (m - d) / m
        p = q
    return sum(p[d] * expected_max_iid_normal(d) for d in range(1, k + 1) if p[d] > 1e-300)


def dense_pipeline_reward(gamma_chol, m, n, counts, rng):
    """One pipeline run on a full joint draw from N(0, Gamma), stage-major layout."""
    y = (gamma_chol @ rng.standard_normal(n * m)).reshape(n, m)
    alive = np.arange(m)
    for j in range(n - 1):
        s = y[j, alive]
        order = sorted(range(len(alive)), key=lambda t: (-s[t], t))
        alive = np.sort(alive[order[: counts[j + 1]]])
    return float(y[n - 1, alive].max())


def lower_tri_cholesky(a):
    """Textbook Cholesky-Banachiewicz, no pivoting."""
    n = len(a)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = sum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                L[i][j] = math.sqrt(a[i][i] - s)
            else:
                L[i][j] = (a[i][j] - s) / L[j][j]
    return np.array(L)


def lazy_vs_dense_deviation(seed):
    """Max deviation between lazy and dense conditioning over a 3-stage run with m=6."""
    prior = build_prior(PriorSpec(m=6, n=3, d_x=2, ell_x=0.5, seed=seed))
    m = prior.m
    gamma = dense_joint_covariance(prior)
    rng = make_rng(seed, 99)
    state = init_sampler(prior)
    worst = 0.0

    # stage 1 marginal
    worst = max(worst, np.abs(state.stage_cov[0, 0] * state.candidate_cov() - gamma[:m, :m]).max())
    obs_idx, obs_val = [], []
    for j, k in enumerate((4, 2)):
        y = sample_current_stage(state, rng)
        obs_idx += [j * m + i for i in state.survivor_ids]
        obs_val += list(y)
        keep = rng.choice(state.n_survivors, size=k, replace=False)
        keep.sort()
        state = condition_and_filter(state, y, keep)
        ids = state.survivor_ids
        for t in range(state.remaining_stages):
            stage = j + 1 + t
            target = [stage * m + i for i in ids]
            mu, _ = dense_condition(gamma, obs_idx, np.array(obs_val), target)
            worst = max(worst, np.abs(state.mean[t] - mu).max())
        # joint covariance over all remaining (stage, survivor) pairs
        target = [(j + 1 + t) * m + i for t in range(state.remaining_stages) for i in ids]
        _, cov = dense_condition(gamma, obs_idx, np.array(obs_val), target)
        lazy_cov = np.kron(state.stage_cov, state.candidate_cov())
        worst = max(worst, np.abs(lazy_cov - cov).max())
    return worst
