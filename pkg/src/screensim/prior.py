"""Separable Gaussian priors over candidate-by-stage scores.

Scores ``Y[i, j]`` (candidate ``i``, stage ``j``) are modelled jointly as
``N(0, Sigma kron X)``: ``Sigma`` is an ``n x n`` stage covariance and ``X`` an
``m x m`` candidate covariance. Both come from a squared-exponential kernel
evaluated on latent points drawn uniformly from a unit hypercube.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._random import CANDIDATE_STREAM, STAGE_STREAM, make_rng


@dataclass(frozen=True)
class PriorSpec:
    """Hyperparameters of the latent-space prior.

    Attributes:
        m: Number of initial candidates.
        n: Number of stages.
        d_x: Latent candidate dimension.
        d_s: Latent stage dimension.
        ell_x: Candidate length-scale.
        ell_s: Stage length-scale.
        sigma_x: Candidate amplitude.
        sigma_s: Stage amplitude.
        seed: Seed for latent sampling.
    """

    m: int = 500
    n: int = 3
    d_x: int = 8
    d_s: int = 1
    ell_x: float = 1.0
    ell_s: float = 0.2
    sigma_x: float = 1.0
    sigma_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.m >= self.n >= 1):
            raise ValueError(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        if self.d_x < 1 or self.d_s < 1:
            raise ValueError("latent dimensions must be >= 1")
        for name in ("ell_x", "ell_s", "sigma_x", "sigma_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def sample_latent_points(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` points uniformly from ``[0, 1]^dim``.

    Rows are drawn in order, so the first ``k`` rows of a larger draw equal a
    draw of ``k`` rows from the same stream.
    """
    if count < 1 or dim < 1:
        raise ValueError("count and dim must be >= 1")
    return rng.random((count, dim))


def build_sq_exp_covariance(points: np.ndarray, sigma: float, length_scale: float) -> np.ndarray:
    """Squared-exponential kernel matrix.

    Entry ``(i, j)`` is ``sigma**2 * exp(-|p_i - p_j|^2 / (2 * length_scale**2))``.

    Args:
        points: Array of shape ``(k, d)``; a 1-D array is read as ``k`` scalars.
        sigma: Amplitude.
        length_scale: Kernel length-scale, in latent-space units.

    Returns:
        Symmetric ``(k, k)`` array with ``sigma**2`` on the diagonal.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    if sigma <= 0 or length_scale <= 0:
        raise ValueError("sigma and length_scale must be positive")
    sq = cdist(pts, pts, "sqeuclidean")
    return sigma**2 * np.exp(-sq / (2.0 * length_scale**2))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PriorModel:
    """Realized prior: latent points plus the two kernel matrices.

    Instances are read-only and may be shared between concurrent simulations.
    The full ``nm x nm`` covariance is never formed here.
    """

    spec: PriorSpec
    candidate_latents: np.ndarray
    stage_latents: np.ndarray
    X: np.ndarray = field(repr=False)
    Sigma: np.ndarray = field(repr=False)

    @classmethod
    def from_latents(cls, spec: PriorSpec, candidate_latents, stage_latents) -> "PriorModel":
        """Build a prior from explicit latent points (shapes must match ``spec``)."""
        cand = _frozen(np.atleast_2d(np.asarray(candidate_latents, dtype=float)))
        stages = _frozen(np.atleast_2d(np.asarray(stage_latents, dtype=float)))
        if cand.shape != (spec.m, spec.d_x):
            raise ValueError(f"candidate latents have shape {cand.shape}, expected {(spec.m, spec.d_x)}")
        if stages.shape != (spec.n, spec.d_s):
            raise ValueError(f"stage latents have shape {stages.shape}, expected {(spec.n, spec.d_s)}")
        X = _frozen(build_sq_exp_covariance(cand, spec.sigma_x, spec.ell_x))
        Sigma = _frozen(build_sq_exp_covariance(stages, spec.sigma_s, spec.ell_s))
        return cls(spec, cand, stages, X, Sigma)

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def n(self) -> int:
        return self.spec.n


def build_prior(spec: PriorSpec, stage_seed: int | None = None) -> PriorModel:
    """Sample latents and build the prior described by ``spec``.

    Candidate and stage latents come from separate streams derived from
    ``spec.seed``, so changing ``m`` leaves the stage latents untouched (and
    keeps the first candidates' latents as a prefix). ``stage_seed`` replaces
    the seed of the stage stream only.
    """
    cand_rng = make_rng(spec.seed, CANDIDATE_STREAM)
    stage_rng = make_rng(spec.seed if stage_seed is None else stage_seed, STAGE_STREAM)
    cand = sample_latent_points(spec.m, spec.d_x, cand_rng)
    stages = sample_latent_points(spec.n, spec.d_s, stage_rng)
    return PriorModel.from_latents(spec, cand, stages)


def stage_distance_features(stage_latents) -> tuple[float, float]:
    """Distances from stage 1 to stages 2 and 3 in latent space."""
    s = np.asarray(stage_latents, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[0] < 3:
        raise ValueError("stage distance features requires >=3 stages")
    d12 = float(np.linalg.norm(s[1] - s[0]))
    d13 = float(np.linalg.norm(s[2] - s[0]))
    return d12, d13
