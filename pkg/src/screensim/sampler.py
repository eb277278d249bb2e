"""Lazy stage-wise sampling from a separable Gaussian prior.

Scores are drawn one stage at a time and only for candidates still in the
pipeline. After a stage is observed, the remaining stages are conditioned on
it with a rank-one Kronecker update and the screened-out candidates are
dropped. The running state has size ``m_j * (n - j + 1)`` (mean),
``(n - j + 1)^2`` (stage covariance) and ``m_j * m`` (candidate factor rows).
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .prior import PriorModel

JITTER_START = 1e-10
JITTER_MAX = 1e-6
# leading residual stage variance at or below this is treated as "no information left"
VARIANCE_FLOOR = 1e-12
# a leading residual variance below -NEGATIVE_TOL * scale means the stage covariance is not PSD
NEGATIVE_TOL = 1e-8
DENSE_ORACLE_LIMIT = 2000


class CholeskyError(np.linalg.LinAlgError):
    """Raised when a matrix cannot be factorized even after maximal jitter."""

    def __init__(self, pivot: int, jitter: float):
        self.pivot = pivot
        self.jitter = jitter
        super().__init__(f"matrix not positive definite at pivot {pivot} (jitter {jitter:.3g})")


class DegenerateStageError(ValueError):
    pass


def _jitter_schedule():
    eps = JITTER_START
    while eps < JITTER_MAX:
        yield eps
        eps *= 2.0
    yield JITTER_MAX


def cholesky_factor(matrix: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, adding diagonal jitter only if needed.

    The first attempt uses the matrix as given. On failure ``eps * scale * I``
    is added, where ``scale`` is the mean diagonal and ``eps`` doubles from
    1e-10 up to 1e-6.

    Raises:
        CholeskyError: if the last attempt still fails; ``pivot`` is the
            1-based index of the failing leading minor.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    scale = float(np.mean(np.diag(a)))
    if not scale > 0:
        scale = 1.0
    # row-major result: simulations slice rows of the factor
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info == 0:
        return np.ascontiguousarray(c)
    eye = np.eye(a.shape[0])
    for eps in _jitter_schedule():
        c, info = lapack.dpotrf(a + eps * scale * eye, lower=1, clean=1)
        if info == 0:
            return np.ascontiguousarray(c)
    raise CholeskyError(int(info), JITTER_MAX * scale)


_chol_cache: "weakref.WeakKeyDictionary[PriorModel, np.ndarray]" = weakref.WeakKeyDictionary()
_chol_lock = threading.Lock()


def candidate_cholesky(prior: PriorModel) -> np.ndarray:
    """Cholesky factor of ``prior.X``, computed once per prior object."""
    with _chol_lock:
        L = _chol_cache.get(prior)
        if L is None:
            L = cholesky_factor(prior.X)
            L.setflags(write=False)
            _chol_cache[prior] = L
    return L


@dataclass(frozen=True)
class SamplerState:
    """Conditional distribution of the not-yet-sampled scores.

    Attributes:
        stage_cov: Residual stage covariance for the remaining stages.
        mean: Conditional means, shape ``(remaining stages, survivors)``;
            ``flat_mean`` gives the stage-major vector.
        chol_rows: Rows of the candidate Cholesky factor for the survivors,
            shape ``(survivors, m)``.
        survivor_ids: Original (0-based) candidate indices, increasing.
        stage_index: 1-based index of the next stage to sample.
    """

    stage_cov: np.ndarray
    mean: np.ndarray
    chol_rows: np.ndarray
    survivor_ids: np.ndarray
    stage_index: int

    @property
    def remaining_stages(self) -> int:
        return self.stage_cov.shape[0]

    @property
    def n_survivors(self) -> int:
        return self.survivor_ids.shape[0]

    @property
    def flat_mean(self) -> np.ndarray:
        return self.mean.reshape(-1)

    def candidate_cov(self) -> np.ndarray:
        """Candidate covariance among survivors, ``chol_rows @ chol_rows.T``."""
        return self.chol_rows @ self.chol_rows.T


def init_sampler(prior: PriorModel) -> SamplerState:
    L = candidate_cholesky(prior)
    return SamplerState(
        stage_cov=np.array(prior.Sigma),
        mean=np.zeros((prior.n, prior.m)),
        chol_rows=L,
        survivor_ids=np.arange(prior.m),
        stage_index=1,
    )


def sample_current_stage(state: SamplerState, rng: np.random.Generator) -> np.ndarray:
    """Draw the current stage's scores for every survivor.

    Always consumes exactly ``m`` standard normals (the original candidate
    count), whatever the number of survivors.
    """
    if state.remaining_stages < 1:
        raise ValueError("no stages left to sample")
    z = rng.standard_normal(state.chol_rows.shape[1])
    var = max(float(state.stage_cov[0, 0]), 0.0)
    if var == 0.0:
        return state.mean[0].copy()
    return state.mean[0] + np.sqrt(var) * (state.chol_rows @ z)


def condition_and_filter(state: SamplerState, observed, survivors) -> SamplerState:
    """Condition the remaining stages on ``observed`` and keep ``survivors``.

    Args:
        state: State whose current stage produced ``observed``.
        observed: Current-stage scores, one per current survivor.
        survivors: Positions (into the current survivor list) that advance.

    Returns:
        The state for the next stage.

    Raises:
        DegenerateStageError: if the leading residual stage variance is
            materially negative.
    """
    y = np.asarray(observed, dtype=float)
    keep = np.asarray(survivors, dtype=np.intp)
    k = state.n_survivors
    if state.remaining_stages < 2:
        raise ValueError("need at least two remaining stages to condition")
    if y.shape != (k,):
        raise ValueError(f"expected {k} observed scores, got shape {y.shape}")
    if keep.size == 0 or keep.size >= k:
        raise ValueError(f"must keep between 1 and {k - 1} candidates, got {keep.size}")
    if np.any(np.diff(keep) <= 0) or keep[0] < 0 or keep[-1] >= k:
        raise ValueError("survivor positions must be strictly increasing and in range")

    S = state.stage_cov
    s11 = float(S[0, 0])
    scale = max(float(np.max(np.abs(np.diag(S)))), 1.0)
    if s11 < -NEGATIVE_TOL * scale:
        raise DegenerateStageError(f"degenerate leading stage variance {s11:.3g}")
    if s11 <= VARIANCE_FLOOR:
        # the observed stage carries no new information
        tail_mean = state.mean[1:]
        new_cov = S[1:, 1:].copy()
    else:
        gain = S[1:, 0] / s11
        tail_mean = state.mean[1:] + np.outer(gain, y - state.mean[0])
        new_cov = S[1:, 1:] - np.outer(S[1:, 0], S[1:, 0]) / s11
        new_cov = 0.5 * (new_cov + new_cov.T)
    return SamplerState(
        stage_cov=new_cov,
        mean=tail_mean[:, keep],
        chol_rows=state.chol_rows[keep],
        survivor_ids=state.survivor_ids[keep],
        stage_index=state.stage_index + 1,
    )


def dense_joint_covariance(prior: PriorModel) -> np.ndarray:
    """Explicit ``Sigma kron X``; entry ``(j*m + i, l*m + k)`` is ``Sigma[j, l] * X[i, k]``.

    Only meant as a test oracle for small problems.
    """
    size = prior.n * prior.m
    if size > DENSE_ORACLE_LIMIT:
        raise ValueError(f"dense covariance of size {size} exceeds oracle limit {DENSE_ORACLE_LIMIT}")
    return np.kron(prior.Sigma, prior.X)
