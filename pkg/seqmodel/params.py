# seqmodel/params.py
"""
Parameter containers and the architecture descriptor they are built from.

Weight matrices are stored (fan_in × fan_out) so a layer computes x @ W + b.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from fps_lab.errors import ShapeError
from seqmodel.tensor import Tensor


class Kind(str, Enum):
    SEQ2SEQ = "seq2seq"
    FORECASTER = "forecaster"


class Cell(str, Enum):
    RNN = "rnn"
    GRU = "gru"


GRU_GATES = ("r", "z", "n")


@dataclass(frozen=True)
class Architecture:
    """
    seq2seq:    input_dim K -> output_dim P per step over output_len L steps
                (P == K: the decoder consumes lag-shifted inputs or its own outputs)
    forecaster: input_dim K per step -> output_len H values from the last hidden state
    """

    kind: Kind
    input_dim: int
    hidden_dim: int
    output_dim: int
    output_len: int
    cell: Cell = Cell.RNN

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "cell", Cell(self.cell))
        if min(self.input_dim, self.hidden_dim, self.output_dim, self.output_len) < 1:
            raise ShapeError(f"architecture dimensions must be positive: {self}")
        if self.kind is Kind.SEQ2SEQ and self.output_dim != self.input_dim:
            raise ShapeError("seq2seq output_dim must equal input_dim")

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        K, Hd, P, n = self.input_dim, self.hidden_dim, self.output_dim, self.output_len
        if self.kind is Kind.SEQ2SEQ:
            return {
                "enc.W_x": (K, Hd), "enc.W_h": (Hd, Hd), "enc.b": (Hd,),
                "dec.W_x": (P, Hd), "dec.W_h": (Hd, Hd), "dec.b": (Hd,),
                "out.W": (Hd, P), "out.b": (P,),
            }
        shapes: Dict[str, Tuple[int, ...]] = {}
        if self.cell is Cell.GRU:
            for gate in GRU_GATES:
                shapes[f"cell.W_x{gate}"] = (K, Hd)
                shapes[f"cell.W_h{gate}"] = (Hd, Hd)
                shapes[f"cell.b{gate}"] = (Hd,)
        else:
            shapes.update({"cell.W_x": (K, Hd), "cell.W_h": (Hd, Hd), "cell.b": (Hd,)})
        shapes.update({"out.W": (Hd, n), "out.b": (n,)})
        return shapes

    def parameter_count(self) -> int:
        """
        seq2seq:         Hd(K+Hd+1) + Hd(P+Hd+1) + P(Hd+1)
        forecaster rnn:  Hd(K+Hd+1) + H(Hd+1)
        forecaster gru:  3·Hd(K+Hd+1) + H(Hd+1)
        """
        K, Hd, P, n = self.input_dim, self.hidden_dim, self.output_dim, self.output_len
        if self.kind is Kind.SEQ2SEQ:
            return Hd * (K + Hd + 1) + Hd * (P + Hd + 1) + P * (Hd + 1)
        gates = 3 if self.cell is Cell.GRU else 1
        return gates * Hd * (K + Hd + 1) + n * (Hd + 1)

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "output_dim": self.output_dim,
            "output_len": self.output_len,
            "cell": self.cell.value,
        }


@dataclass(frozen=True)
class ParamSet:
    """Named parameter arrays for one network; treated as an immutable value."""

    arch: Architecture
    values: Mapping[str, np.ndarray]

    def __post_init__(self):
        expected = self.arch.shapes()
        if set(expected) != set(self.values):
            raise ShapeError(f"parameter names {sorted(self.values)} do not match {sorted(expected)}")
        frozen = {}
        for name, shape in expected.items():
            value = np.array(self.values[name], dtype=np.float64, copy=True)
            if value.shape != shape:
                raise ShapeError(f"{name} has shape {value.shape}, expected {shape}")
            if not np.all(np.isfinite(value)):
                raise ShapeError(f"{name} holds non-finite entries")
            value.setflags(write=False)
            frozen[name] = value
        object.__setattr__(self, "values", frozen)

    @classmethod
    def initialize(cls, arch: Architecture, rng: np.random.Generator) -> "ParamSet":
        """Weights ~ U(−1/√fan_in, 1/√fan_in), biases zero; drawn in shapes() order."""
        values = {}
        for name, shape in arch.shapes().items():
            if len(shape) == 1:
                values[name] = np.zeros(shape)
            else:
                bound = 1.0 / np.sqrt(shape[0])
                values[name] = rng.uniform(-bound, bound, size=shape)
        return cls(arch, values)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    @property
    def count(self) -> int:
        return int(sum(v.size for v in self.values.values()))

    def track(self) -> Dict[str, Tensor]:
        """Fresh leaf tensors for one forward/backward pass."""
        return {name: Tensor.leaf(value, name) for name, value in self.values.items()}

    def replace(self, **arrays: np.ndarray) -> "ParamSet":
        values = dict(self.values)
        for key, value in arrays.items():
            name = key.replace("__", ".")
            if name not in values:
                raise ShapeError(f"unknown parameter {name}")
            values[name] = value
        return ParamSet(self.arch, values)

    def with_values(self, values: Mapping[str, np.ndarray]) -> "ParamSet":
        return ParamSet(self.arch, values)


@dataclass(frozen=True)
class Gradients:
    """Same names and shapes as the ParamSet they belong to."""

    values: Mapping[str, np.ndarray]

    @classmethod
    def collect(cls, leaves: Mapping[str, Tensor]) -> "Gradients":
        return cls({name: (np.zeros_like(t.value) if t.grad is None else t.grad.copy()) for name, t in leaves.items()})

    @classmethod
    def zeros_like(cls, params: ParamSet) -> "Gradients":
        return cls({name: np.zeros_like(v) for name, v in params.values.items()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(g * g)) for g in self.values.values())))

    def check_congruent(self, params: ParamSet) -> None:
        for name, value in params.values.items():
            if name not in self.values or self.values[name].shape != value.shape:
                raise ShapeError(f"gradient for {name} is missing or mis-shaped")
