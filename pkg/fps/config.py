# fps/config.py
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from seqmodel.optim import OptimizerKind
from seqmodel.params import Cell


class Schedule(str, Enum):
    JOINT = "joint"
    TWO_PHASE = "two_phase"


class TrainConfig(BaseModel):
    """Optimization surface shared by FPS and ERM so the comparison is like for like."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    lambda1: float = Field(default=1.0, ge=0.0, description="weight of the delay-translation loss")
    lambda2: float = Field(default=1.0, ge=0.0, description="weight of the forecasting loss")
    epochs: int = Field(default=60, ge=1)
    learning_rate: float = Field(default=5e-3, gt=0.0)
    batch_size: int = Field(default=32, ge=1)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    clip: float = Field(default=5.0, ge=0.0, description="global-norm clip threshold; 0 disables")
    seed: int = 0
    patience: int = Field(default=10, ge=1, description="epochs without validation improvement before stopping")
    schedule: Schedule = Schedule.JOINT
    pretrain_epochs: int = Field(default=20, ge=0, description="translation-only epochs of the two-phase schedule")


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    translator_hidden: int = Field(default=16, ge=1)
    forecaster_hidden: int = Field(default=16, ge=1)
    forecaster_cell: Cell = Cell.GRU
    forecaster_reads_lookback: bool = Field(
        default=True, description="FPS forecaster also reads the observed performative lookback next to X̂^DR",
    )
