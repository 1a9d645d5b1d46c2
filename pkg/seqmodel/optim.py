# seqmodel/optim.py
"""
First-order optimizers with global-norm gradient clipping.

One OptimState may drive several named parameter groups (the translation and
forecasting networks are optimized jointly); clipping uses the norm over all
groups together.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional

import numpy as np

from fps_lab.errors import DivergedError
from seqmodel.params import Gradients, ParamSet


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass
class OptimState:
    kind: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 5e-3
    clip: Optional[float] = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    last_norm: float = 0.0

    def __post_init__(self):
        self.kind = OptimizerKind(self.kind)


def clip_global_norm(grads: Mapping[str, Gradients], threshold: Optional[float]) -> Dict[str, Gradients]:
    norm = float(np.sqrt(sum(g.global_norm() ** 2 for g in grads.values())))
    if not threshold or norm <= threshold or norm == 0.0:
        return dict(grads)
    scale = threshold / norm
    return {key: Gradients({n: v * scale for n, v in g.values.items()}) for key, g in grads.items()}


def step_groups(
    groups: Mapping[str, ParamSet],
    grads: Mapping[str, Gradients],
    opt: OptimState,
) -> Dict[str, ParamSet]:
    """Apply one update to every group; opt's moments and counter advance in place."""
    for key, params in groups.items():
        grads[key].check_congruent(params)
    clipped = clip_global_norm({key: grads[key] for key in groups}, opt.clip)
    norm = float(np.sqrt(sum(g.global_norm() ** 2 for g in clipped.values())))
    if not np.isfinite(norm):
        raise DivergedError("diverged: non-finite gradient after clipping")
    opt.last_norm = norm
    opt.step_count += 1

    updated = {}
    for key, params in groups.items():
        values = {}
        for name, value in params.values.items():
            g = clipped[key][name]
            slot = f"{key}/{name}"
            if opt.kind is OptimizerKind.SGD:
                values[name] = value - opt.learning_rate * g
                continue
            m = opt.beta1 * opt.m.get(slot, np.zeros_like(value)) + (1.0 - opt.beta1) * g
            v = opt.beta2 * opt.v.get(slot, np.zeros_like(value)) + (1.0 - opt.beta2) * g * g
            opt.m[slot], opt.v[slot] = m, v
            m_hat = m / (1.0 - opt.beta1 ** opt.step_count)
            v_hat = v / (1.0 - opt.beta2 ** opt.step_count)
            values[name] = value - opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.eps)
        if not all(np.all(np.isfinite(v)) for v in values.values()):
            raise DivergedError(f"diverged: non-finite {key} parameters after step {opt.step_count}")
        updated[key] = params.with_values(values)
    return updated


def step(params: ParamSet, grads: Gradients, opt: OptimState) -> ParamSet:
    return step_groups({"params": params}, {"params": grads}, opt)["params"]
