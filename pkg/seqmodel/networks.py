# seqmodel/networks.py
"""
Recurrent networks used by the delay translation and forecasting modules.

Graph builders take tracked leaves (ParamSet.track()) and return Tensors so a
loss can be differentiated; forward_* wrap them for plain inference.
"""

from typing import Mapping, Optional, Sequence, Union

import numpy as np

from fps_lab.errors import ShapeError
from seqmodel.params import Architecture, Cell, Kind, ParamSet
from seqmodel.tensor import Tensor, as_tensor, stack

Leaves = Mapping[str, Tensor]


def _batched(inputs) -> Tensor:
    t = as_tensor(inputs)
    if t.value.ndim == 2:
        t = Tensor(t.value[None, :, :]) if not t.requires_grad else _expand(t)
    if t.value.ndim != 3:
        raise ShapeError(f"expected (L, K) or (B, L, K) input, got {t.shape}")
    if not np.all(np.isfinite(t.value)):
        raise ShapeError("input holds non-finite values")
    return t


def _expand(t: Tensor) -> Tensor:
    return Tensor(t.value[None], (t,), lambda g: t._accumulate(g[0]))


def _check_input(arch: Architecture, x: Tensor) -> None:
    if x.shape[-1] != arch.input_dim:
        raise ShapeError(f"input has {x.shape[-1]} channels, network expects {arch.input_dim}")


def _rnn_step(leaves: Leaves, prefix: str, x: Tensor, h: Tensor) -> Tensor:
    return (x @ leaves[f"{prefix}.W_x"] + h @ leaves[f"{prefix}.W_h"] + leaves[f"{prefix}.b"]).tanh()


def _gru_step(leaves: Leaves, x: Tensor, h: Tensor) -> Tensor:
    r = (x @ leaves["cell.W_xr"] + h @ leaves["cell.W_hr"] + leaves["cell.br"]).sigmoid()
    z = (x @ leaves["cell.W_xz"] + h @ leaves["cell.W_hz"] + leaves["cell.bz"]).sigmoid()
    n = (x @ leaves["cell.W_xn"] + (r * h) @ leaves["cell.W_hn"] + leaves["cell.bn"]).tanh()
    return (1.0 - z) * n + z * h


def seq2seq_graph(arch: Architecture, leaves: Leaves, inputs, lead: Optional[Sequence[int]] = None) -> Tensor:
    """
    Encoder–decoder over L steps producing (B, L, P).

    The encoder reads the L input steps. Decoder step j is fed, per channel p,
    the observed input x[j+lead_p] while that index is inside the window and
    the decoder's own previous output once it runs past the end (the first
    previous output is the last observed input). Readout is residual:
    out_j = dec_in_j + h_j @ W_out + b_out.
    """
    if arch.kind is not Kind.SEQ2SEQ:
        raise ShapeError("seq2seq_graph needs a seq2seq architecture")
    x = _batched(inputs)
    _check_input(arch, x)
    batch, steps, channels = x.shape
    if steps != arch.output_len:
        raise ShapeError(f"input has {steps} steps, network unrolls {arch.output_len}")
    lead = np.zeros(channels, dtype=int) if lead is None else np.asarray(lead, dtype=int)
    if lead.shape != (channels,) or np.any(lead < 0):
        raise ShapeError(f"lead must hold one non-negative shift per channel, got {lead.tolist()}")

    data = x.value
    h = Tensor(np.zeros((batch, arch.hidden_dim)))
    for i in range(steps):
        h = _rnn_step(leaves, "enc", x.take(i, axis=1), h)

    prev: Union[Tensor, np.ndarray] = Tensor(data[:, -1, :])
    outputs = []
    for j in range(steps):
        source = j + lead
        known = (source <= steps - 1).astype(np.float64)
        observed = np.zeros((batch, channels))
        for p in range(channels):
            if known[p]:
                observed[:, p] = data[:, source[p], p]
        if known.all():
            dec_in = Tensor(observed)
        else:
            dec_in = Tensor(observed) + prev * (1.0 - known)
        h = _rnn_step(leaves, "dec", dec_in, h)
        out = dec_in + h @ leaves["out.W"] + leaves["out.b"]
        outputs.append(out)
        prev = out
    return stack(outputs, axis=1)


def forecast_graph(arch: Architecture, leaves: Leaves, inputs) -> Tensor:
    """Recurrent encoder over the L input steps, linear readout of H values from the last state."""
    if arch.kind is not Kind.FORECASTER:
        raise ShapeError("forecast_graph needs a forecaster architecture")
    x = _batched(inputs)
    _check_input(arch, x)
    h = Tensor(np.zeros((x.shape[0], arch.hidden_dim)))
    for i in range(x.shape[1]):
        step = x.take(i, axis=1)
        h = _gru_step(leaves, step, h) if arch.cell is Cell.GRU else _rnn_step(leaves, "cell", step, h)
    return h @ leaves["out.W"] + leaves["out.b"]


def _constant_leaves(params: ParamSet) -> Leaves:
    return {name: Tensor(value) for name, value in params.values.items()}


def forward_seq2seq(params: ParamSet, inputs: np.ndarray, lead: Optional[Sequence[int]] = None) -> np.ndarray:
    """(L, K) -> (L, P), or batched (B, L, K) -> (B, L, P)."""
    single = np.asarray(inputs).ndim == 2
    out = seq2seq_graph(params.arch, _constant_leaves(params), np.asarray(inputs, dtype=np.float64), lead).value
    return out[0] if single else out


def forward_forecast(params: ParamSet, inputs: np.ndarray) -> np.ndarray:
    """(L, K) -> (H,), or batched (B, L, K) -> (B, H)."""
    single = np.asarray(inputs).ndim == 2
    out = forecast_graph(params.arch, _constant_leaves(params), np.asarray(inputs, dtype=np.float64)).value
    return out[0] if single else out
