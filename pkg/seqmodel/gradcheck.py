# seqmodel/gradcheck.py
"""
Reverse-mode gradients against central finite differences.

Relative error of one parameter array is ‖a − n‖ / max(‖a‖, ‖n‖, 1e-7); the
floor keeps vanishing gradients from amplifying round-off. A case's error is
the maximum over its arrays.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from seqmodel.params import Architecture, Cell, Gradients, Kind, ParamSet
from seqmodel.networks import forecast_graph, seq2seq_graph
from seqmodel.tensor import Tensor, backward, concat

logger = logging.getLogger(__name__)

CASE_KINDS = ("seq2seq", "rnn", "gru", "composed")
ABSOLUTE_FLOOR = 1e-7


@dataclass(frozen=True)
class GradCheckCase:
    kind: str
    steps: int
    channels: int
    hidden: int
    max_rel_error: float
    worst_param: str


@dataclass(frozen=True)
class GradCheckReport:
    cases: Tuple[GradCheckCase, ...]
    tolerance: float

    @property
    def max_rel_error(self) -> float:
        return max((c.max_rel_error for c in self.cases), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), ABSOLUTE_FLOOR)
    return float(np.linalg.norm(analytic - numeric) / scale)


def numeric_gradients(loss_of: Callable[[Dict[str, ParamSet]], float], groups: Dict[str, ParamSet], eps: float) -> Dict[str, Dict[str, np.ndarray]]:
    result = {}
    for key, params in groups.items():
        result[key] = {}
        for name, value in params.values.items():
            grad = np.zeros_like(value)
            flat = value.reshape(-1)
            for k in range(flat.size):
                bumped = []
                for delta in (eps, -eps):
                    trial = flat.copy()
                    trial[k] += delta
                    moved = dict(groups)
                    moved[key] = params.with_values({**params.values, name: trial.reshape(value.shape)})
                    bumped.append(loss_of(moved))
                grad.reshape(-1)[k] = (bumped[0] - bumped[1]) / (2.0 * eps)
            result[key][name] = grad
    return result


def _build_case(kind: str, rng: np.random.Generator):
    steps = int(rng.integers(1, 7))
    channels = int(rng.integers(1, 4))
    hidden = int(rng.integers(1, 5))
    horizon = int(rng.integers(1, 5))
    inputs = rng.normal(size=(int(rng.integers(1, 4)), steps, channels))
    lead = rng.integers(0, steps + 2, size=channels)

    groups: Dict[str, ParamSet] = {}
    if kind in ("seq2seq", "composed"):
        groups["f"] = ParamSet.initialize(Architecture(Kind.SEQ2SEQ, channels, hidden, channels, steps), rng)
    if kind != "seq2seq":
        cell = Cell.GRU if kind in ("gru", "composed") else Cell.RNN
        extra = 1 if kind == "composed" else 0
        groups["g"] = ParamSet.initialize(Architecture(Kind.FORECASTER, channels + extra, hidden, 1, horizon, cell), rng)
    # non-zero biases so every parameter path is exercised
    groups = {k: p.with_values({n: (v + rng.normal(scale=0.3, size=v.shape)) if v.ndim == 1 else v for n, v in p.values.items()}) for k, p in groups.items()}

    side = rng.normal(size=(inputs.shape[0], steps, 1))
    if kind == "seq2seq":
        target = rng.normal(size=(inputs.shape[0], steps, channels))
    else:
        target = rng.normal(size=(inputs.shape[0], horizon))

    def graph(leaves: Dict[str, Dict[str, Tensor]]) -> Tensor:
        if kind == "seq2seq":
            out = seq2seq_graph(groups["f"].arch, leaves["f"], inputs, lead)
        elif kind == "composed":
            translated = seq2seq_graph(groups["f"].arch, leaves["f"], inputs, lead)
            out = forecast_graph(groups["g"].arch, leaves["g"], concat([translated, Tensor(side)], axis=-1))
        else:
            out = forecast_graph(groups["g"].arch, leaves["g"], inputs)
        return (out - target).square().mean()

    return steps, channels, hidden, groups, graph


def check_case(kind: str, rng: np.random.Generator, eps: float = 1e-5) -> GradCheckCase:
    steps, channels, hidden, groups, graph = _build_case(kind, rng)
    leaves = {k: p.track() for k, p in groups.items()}
    loss = graph(leaves)
    backward(loss, [t for group in leaves.values() for t in group.values()])
    analytic = {k: Gradients.collect(v) for k, v in leaves.items()}

    def loss_of(moved: Dict[str, ParamSet]) -> float:
        return float(graph({k: {n: Tensor(v) for n, v in p.values.items()} for k, p in moved.items()}).value)

    numeric = numeric_gradients(loss_of, groups, eps)
    worst, worst_name = 0.0, ""
    for key in groups:
        for name in groups[key]:
            err = relative_error(analytic[key][name], numeric[key][name])
            if err >= worst:
                worst, worst_name = err, f"{key}/{name}"
    return GradCheckCase(kind, steps, channels, hidden, worst, worst_name)


def gradient_check(n_configs: int = 50, seed: int = 0, tolerance: float = 1e-4, eps: float = 1e-5) -> GradCheckReport:
    rng = np.random.default_rng(seed)
    cases: List[GradCheckCase] = []
    for k in range(n_configs):
        case = check_case(CASE_KINDS[k % len(CASE_KINDS)], rng, eps)
        logger.debug("gradcheck %s L=%d K=%d hidden=%d: %.3e (%s)", case.kind, case.steps, case.channels, case.hidden, case.max_rel_error, case.worst_param)
        cases.append(case)
    report = GradCheckReport(tuple(cases), tolerance)
    logger.info("gradient check over %d configurations: max relative error %.3e", n_configs, report.max_rel_error)
    return report
