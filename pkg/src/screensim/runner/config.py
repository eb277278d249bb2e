"""Experiment configuration: a flat JSON object with CLI overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from .._random import derive_seed
from ..allocation import CostModel
from ..prior import PriorSpec

SWEEP_AXES = ("none", "C_max", "m", "d_s", "d_x", "ell_s", "ell_x")

# seed tags for the sub-experiments derived from ExperimentConfig.seed
PRIOR_TAG = 11
SIM_TAG = 12
STAGE_SAMPLE_TAG = 13

PAPER_SCALE = {"m": 500}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a run.

    Defaults are desk-scale (``m=100``); ``paper_scale()`` restores the
    500-candidate base setting.
    """

    m: int = 100
    n: int = 3
    d_x: int = 8
    d_s: int = 1
    ell_x: float = 1.0
    ell_s: float = 0.2
    sigma_x: float = 1.0
    sigma_s: float = 1.0
    costs: tuple[float, ...] = (1.0, 10.0, 100.0)
    budget: float = 2500.0
    n_sims: int = 200
    sweep_axis: str = "none"
    sweep_values: tuple[float, ...] = ()
    replicates: int = 1
    n_priors: int = 50
    cost_bases: tuple[float, ...] = (5.0, 10.0)
    study_budgets: tuple[float, ...] = ()
    study_m: tuple[int, ...] = ()
    noise_std: float = 0.0
    all_feasible: bool = False
    seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        for name in ("costs", "sweep_values", "cost_bases", "study_budgets"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "study_m", tuple(int(v) for v in self.study_m))
        self.validate()

    def validate(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        vals = self.sweep_values
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"sweep values must be strictly increasing: {list(vals)}")
        if self.sweep_axis != "none" and not vals:
            raise ConfigError(f"sweep over {self.sweep_axis} needs sweep_values")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n_sims < 2:
            raise ConfigError("n_sims must be >= 2")
        if self.n_priors < 1:
            raise ConfigError("n_priors must be >= 1")
        if len(self.costs) != self.n:
            raise ConfigError(f"{len(self.costs)} costs given for {self.n} stages")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        try:
            self.prior_spec(0)
            self.cost_model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def prior_spec(self, replicate: int = 0, **overrides) -> PriorSpec:
        """Prior hyperparameters for one replicate; overrides apply to spec fields."""
        base = dict(
            m=self.m, n=self.n, d_x=self.d_x, d_s=self.d_s, ell_x=self.ell_x, ell_s=self.ell_s,
            sigma_x=self.sigma_x, sigma_s=self.sigma_s, seed=self.prior_seed(replicate),
        )
        base.update(overrides)
        return PriorSpec(**base)

    def prior_seed(self, replicate: int) -> int:
        return derive_seed(self.seed, PRIOR_TAG, replicate)

    def sim_seed(self, replicate: int) -> int:
        return derive_seed(self.seed, SIM_TAG, replicate)

    def stage_sample_seed(self, index: int) -> int:
        return derive_seed(self.seed, STAGE_SAMPLE_TAG, index)

    def cost_model(self, budget: float | None = None, costs=None) -> CostModel:
        return CostModel(tuple(self.costs if costs is None else costs), self.budget if budget is None else budget)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        """Read a config file; ``overrides`` (e.g. from CLI flags) win over file values."""
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.update(overrides)
        return cls.from_dict(data)

    def paper_scale(self) -> "ExperimentConfig":
        return self.with_overrides(**PAPER_SCALE)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        try:
            return replace(self, **overrides)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
