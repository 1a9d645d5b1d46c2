# fps/predictors.py
"""
Trained predictors and their prediction paths.

Samples passed in are in original units; predictors scale them with their
own Scaler and return forecasts de-scaled to original units.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from fps_lab.errors import EvaluationError, TrainingError
from fps.batches import WindowBatch
from fps.losses import erm_input, forecaster_input, translate
from seqmodel.networks import forecast_graph
from seqmodel.params import ParamSet
from seqmodel.tensor import Tensor
from series.datasets import WindowSample
from series.scaling import Scaler


def _constants(params: ParamSet):
    return {name: Tensor(value) for name, value in params.values.items()}


@dataclass(frozen=True)
class FpsModel:
    """θ_FPS = g_τ(f_τ(·)) with the delays frozen at training time."""

    tau: Tuple[int, ...]
    f_params: ParamSet
    g_params: ParamSet
    scaler: Scaler
    lookback: int
    horizon: int
    n_performative: int
    config_hash: str = ""
    seed: int = 0
    method: str = "fps"
    chosen_epoch: int = 0
    notes: Tuple[str, ...] = field(default_factory=tuple)
    reads_lookback: bool = False

    @property
    def parameter_count(self) -> int:
        return self.f_params.count + self.g_params.count

    def manifest(self) -> dict:
        return {
            "method": self.method,
            "tau": list(self.tau),
            "reads_lookback": self.reads_lookback,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "chosen_epoch": self.chosen_epoch,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "parameters": {"translator": self.f_params.count, "forecaster": self.g_params.count, "total": self.parameter_count},
            "architectures": {"translator": self.f_params.arch.describe(), "forecaster": self.g_params.arch.describe()},
            "scaler": self.scaler.stats(),
        }


@dataclass(frozen=True)
class ErmModel:
    """Single forecaster g trained on (X^L, Y^L) -> Y^H."""

    g_params: ParamSet
    scaler: Scaler
    lookback: int
    horizon: int
    n_performative: int
    config_hash: str = ""
    seed: int = 0
    method: str = "erm"
    chosen_epoch: int = 0

    @property
    def parameter_count(self) -> int:
        return self.g_params.count

    def manifest(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "chosen_epoch": self.chosen_epoch,
            "lookback": self.lookback,
            "horizon": self.horizon,
            "parameters": {"forecaster": self.g_params.count, "total": self.parameter_count},
            "architectures": {"forecaster": self.g_params.arch.describe()},
            "scaler": self.scaler.stats(),
        }


Model = Union[FpsModel, ErmModel]


def _scaled_batch(model: Model, samples: Sequence[WindowSample]) -> WindowBatch:
    if model is None:
        raise TrainingError("model is not fitted")
    if not samples:
        raise EvaluationError("no samples to predict")
    scaled = []
    for s in samples:
        if s.x_look.shape[0] != model.lookback:
            raise EvaluationError(f"sample at {s.t} has lookback {s.x_look.shape[0]}, model expects {model.lookback}")
        scaled.append(model.scaler.scale_sample(s, model.n_performative))
    return WindowBatch.from_samples(scaled, model.n_performative, need_horizon=False)


def predict_scaled(model: Model, batch: WindowBatch) -> np.ndarray:
    """Forecasts in scaled units for an already scaled batch, shape (B, H)."""
    if isinstance(model, FpsModel):
        delayed = translate(model.f_params, _constants(model.f_params), batch, model.tau)
        inputs = forecaster_input(delayed, batch, model.reads_lookback)
    elif isinstance(model, ErmModel):
        inputs = erm_input(batch)
    else:
        raise TrainingError("model is not fitted")
    return forecast_graph(model.g_params.arch, _constants(model.g_params), inputs).value


def predict_many(model: Model, samples: Sequence[WindowSample]) -> np.ndarray:
    batch = _scaled_batch(model, samples)
    return model.scaler.invert_target(predict_scaled(model, batch))


def predict(model: Model, sample: WindowSample) -> np.ndarray:
    """FPS: g_τ(f_τ(X^L_perf), X^L_nonperf, Y^L); ERM: g(X^L, Y^L); original units, length H."""
    return predict_many(model, [sample])[0]


def predict_oracle_many(model: FpsModel, samples: Sequence[WindowSample]) -> np.ndarray:
    if not isinstance(model, FpsModel):
        raise TrainingError("oracle prediction needs an FPS model")
    missing = [s.t for s in samples if s.x_dr is None]
    if missing:
        raise EvaluationError(f"x_dr absent for anchor {missing[0]}")
    batch = _scaled_batch(model, samples)
    inputs = forecaster_input(Tensor(batch.x_dr), batch, model.reads_lookback)
    scaled = forecast_graph(model.g_params.arch, _constants(model.g_params), inputs).value
    return model.scaler.invert_target(scaled)


def predict_oracle(model: FpsModel, sample: WindowSample) -> np.ndarray:
    """g_τ on the true delayed windows, bypassing f_τ."""
    return predict_oracle_many(model, [sample])[0]


def _member_signature(model: Model) -> tuple:
    archs = (model.g_params.arch,) if isinstance(model, ErmModel) else (model.f_params.arch, model.g_params.arch)
    tau = getattr(model, "tau", None)
    return (type(model), model.method, model.config_hash, model.lookback, model.horizon, model.n_performative, archs, tau)


def _check_members(models: Sequence[Model]) -> None:
    if not models:
        raise TrainingError("an ensemble needs at least one member")
    fields = ("type", "method", "config hash", "lookback", "horizon", "performative count", "architecture", "tau")
    first = _member_signature(models[0])
    for m in models[1:]:
        other = _member_signature(m)
        for name, a, b in zip(fields, first, other):
            if a != b:
                raise TrainingError(f"heterogeneous configs: ensemble members differ in {name} (seed {models[0].seed} vs {m.seed})")


def ensemble_predict_many(models: Sequence[Model], samples: Sequence[WindowSample], oracle: bool = False) -> np.ndarray:
    _check_members(models)
    run = predict_oracle_many if oracle else predict_many
    return np.mean([run(m, samples) for m in models], axis=0)


def ensemble_predict(models: Sequence[Model], sample: WindowSample) -> np.ndarray:
    """Element-wise mean of member forecasts."""
    return ensemble_predict_many(models, [sample])[0]
