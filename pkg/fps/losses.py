# fps/losses.py
"""
Delay-translation loss L_DT, forecasting loss L_TS and the graphs behind them.

The forecaster's input is always assembled from the translator's output
(estimated delayed windows) in forecaster_input(); ground-truth delayed
windows reach the forecaster only through the explicit oracle path.
"""

from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from fps_lab.errors import ShapeError, TrainingError
from fps.batches import WindowBatch
from seqmodel.networks import forecast_graph, seq2seq_graph
from seqmodel.params import ParamSet
from seqmodel.tensor import Tensor, concat

Leaves = Mapping[str, Tensor]


def translate(f_params: ParamSet, f_leaves: Leaves, batch: WindowBatch, tau: Sequence[int]) -> Tensor:
    """X̂^DR = f_τ(performative columns of X^L), shape (B, L, P)."""
    return seq2seq_graph(f_params.arch, f_leaves, batch.x_perf, tau)


def forecaster_input(delayed: Tensor, batch: WindowBatch, with_lookback: bool = False) -> Tensor:
    """
    concat(delayed performative windows, non-performative X^L, Y^L) along channels.
    with_lookback keeps the observed performative columns too:
    concat(X̂^DR, X^L, Y^L), X^L ordered performative first.
    """
    if delayed.shape != batch.x_perf.shape:
        raise ShapeError(f"delayed windows have shape {delayed.shape}, expected {batch.x_perf.shape}")
    parts = [delayed]
    if with_lookback:
        parts.append(Tensor(batch.x_look))
    elif batch.x_nonperf.shape[-1]:
        parts.append(Tensor(batch.x_nonperf))
    parts.append(Tensor(batch.y_channel))
    return concat(parts, axis=-1)


def erm_input(batch: WindowBatch) -> Tensor:
    return Tensor(np.concatenate([batch.x_look, batch.y_channel], axis=-1))


def translation_loss(estimated: Tensor, batch: WindowBatch) -> Tuple[Tensor, int]:
    """Masked MSE over samples carrying x_dr, averaged over samples, steps and features."""
    n = int(batch.has_dr.sum())
    if n == 0:
        return Tensor(0.0), 0
    mask = batch.has_dr.astype(np.float64)[:, None, None]
    squared = ((estimated - batch.x_dr) * mask).square()
    return squared.sum() * (1.0 / (n * batch.x_dr.shape[1] * batch.x_dr.shape[2])), n


def forecast_loss(predicted: Tensor, batch: WindowBatch) -> Tensor:
    if predicted.shape != batch.y_hor.shape:
        raise ShapeError(f"forecast has shape {predicted.shape}, horizon targets {batch.y_hor.shape}")
    return (predicted - batch.y_hor).square().mean()


def combined_loss(dt: Tensor, ts: Tensor, lambda1: float, lambda2: float) -> Tensor:
    """L_FPS = λ1·L_DT + λ2·L_TS."""
    return dt * lambda1 + ts * lambda2


# ----------------------------------------------------------------------
# plain-value entry points
# ----------------------------------------------------------------------
def _constants(params: ParamSet) -> Leaves:
    return {name: Tensor(value) for name, value in params.values.items()}


def loss_dt(f_params: ParamSet, samples, tau: Sequence[int]) -> float:
    batch = samples if isinstance(samples, WindowBatch) else WindowBatch.from_samples(samples, f_params.arch.input_dim)
    if not batch.has_dr.any():
        raise TrainingError("no translation targets")
    value, _ = translation_loss(translate(f_params, _constants(f_params), batch, tau), batch)
    return float(value.value)


def loss_ts(g_params: ParamSet, samples, x_dr_hat: np.ndarray, n_performative: Optional[int] = None,
            with_lookback: bool = False) -> float:
    x_dr_hat = np.asarray(x_dr_hat, dtype=np.float64)
    if isinstance(samples, WindowBatch):
        batch = samples
    else:
        batch = WindowBatch.from_samples(samples, n_performative if n_performative is not None else x_dr_hat.shape[-1])
    inputs = forecaster_input(Tensor(x_dr_hat), batch, with_lookback)
    predicted = forecast_graph(g_params.arch, _constants(g_params), inputs)
    return float(forecast_loss(predicted, batch).value)
