# harness/config.py
"""
Experiment configuration shared by every protocol.

ExperimentConfig is the part of a run configuration that determines the
numbers in a report; the command line adds the data source and output
directory on top of it.
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from alignment.similarity import Metric
from fps.config import ModelConfig, TrainConfig
from fps_lab.serialization import stable_hash


class ProtocolKind(str, Enum):
    STANDARD = "standard"
    REALTIME = "realtime"
    ORACLE = "oracle"


class Method(str, Enum):
    FPS = "fps"
    ERM = "erm"


class Protocol(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ProtocolKind = ProtocolKind.STANDARD
    start: Optional[int] = Field(default=None, ge=0, description="first real-time anchor; default 60% of T")
    stride: int = Field(default=1, ge=1, description="steps between real-time retrains")
    warm_start: bool = True
    retrain_epochs: int = Field(default=5, ge=0, description="epochs per warm retrain; 0 reuses the previous model")
    validation_fraction: float = Field(default=0.2, ge=0.0, lt=1.0, description="leading share of real-time steps used for validation")
    seeds: Optional[List[int]] = Field(default=None, description="explicit ensemble seeds; overrides seed/ensemble_size")
    reestimate_tau: bool = Field(default=True, description="re-align at every real-time step")

    @model_validator(mode="after")
    def _check_seeds(self):
        if self.seeds is not None and (not self.seeds or len(set(self.seeds)) != len(self.seeds)):
            raise ValueError("protocol seeds must be a non-empty list of distinct integers")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    methods: List[Method] = Field(default_factory=lambda: [Method.FPS, Method.ERM])
    lookback: int = Field(default=16, ge=1)
    horizon: int = Field(default=8, ge=1)
    split_ratios: Tuple[float, float, float] = (0.6, 0.2, 0.2)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    protocol: Protocol = Field(default_factory=Protocol)
    metric: Metric = Metric.COSINE
    grid: Dict[str, List[Any]] = Field(default_factory=dict, description="TrainConfig/ModelConfig field -> candidates")
    seed: int = 0
    ensemble_size: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if not self.methods or len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must be a non-empty list without repeats")
        if any(r <= 0 for r in self.split_ratios) or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError("split_ratios must be three positive numbers summing to 1")
        return self

    @property
    def seeds(self) -> List[int]:
        if self.protocol.seeds is not None:
            return list(self.protocol.seeds)
        return [self.seed + k for k in range(self.ensemble_size)]

    def train_for(self, seed: int, **updates) -> TrainConfig:
        return self.train.model_copy(update={"seed": seed, **updates})

    def config_hash(self) -> str:
        """Hash of everything but the seeds: ensemble members and reruns share it."""
        payload = self.model_dump(mode="json")
        payload.pop("seed", None)
        payload["train"].pop("seed", None)
        payload["protocol"].pop("seeds", None)
        return stable_hash(payload)
