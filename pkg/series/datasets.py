# series/datasets.py
"""
Aligned multivariate time series and the training/eval window type.

Indexing is 0-based and half-open throughout. A Dataset keeps its feature
columns ordered [performative..., non-performative...]; everything downstream
relies on the first P columns being the performative ones.
"""

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from fps_lab.errors import DataError

TimeLabel = Union[int, str]


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.float64, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Dataset:
    """
    Target Y (length T), features X (T×D), column metadata and time labels.

    Immutable after construction: arrays are copied and marked read-only.
    """

    target: np.ndarray
    features: np.ndarray
    feature_names: Tuple[str, ...]
    performative_mask: Tuple[bool, ...]
    time_index: Tuple[TimeLabel, ...]
    target_name: str = "y"
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        target = _frozen(self.target).reshape(-1)
        features = _frozen(self.features)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
            features.setflags(write=False)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "performative_mask", tuple(bool(m) for m in self.performative_mask))
        object.__setattr__(self, "time_index", tuple(self.time_index))
        object.__setattr__(self, "metadata", dict(self.metadata))

        T = target.shape[0]
        if features.shape[0] != T:
            raise DataError(f"features have {features.shape[0]} rows but target has {T}")
        if len(self.time_index) != T:
            raise DataError(f"time index has {len(self.time_index)} labels but target has {T}")
        D = features.shape[1]
        if len(self.feature_names) != D or len(self.performative_mask) != D:
            raise DataError("feature_names and performative_mask must name every feature column")
        if list(self.performative_mask) != sorted(self.performative_mask, reverse=True):
            raise DataError("performative columns must precede non-performative ones")

        bad = np.argwhere(~np.isfinite(features))
        if bad.size:
            r, c = bad[0]
            raise DataError(f"missing value at row {r}, column {self.feature_names[c]}")
        bad = np.flatnonzero(~np.isfinite(target))
        if bad.size:
            raise DataError(f"missing value at row {bad[0]}, column {self.target_name}")

        for i in range(1, T):
            if not self.time_index[i - 1] < self.time_index[i]:
                raise DataError(f"time index not strictly increasing at row {i}")

    # ------------------------------------------------------------------
    @property
    def T(self) -> int:
        return int(self.target.shape[0])

    @property
    def D(self) -> int:
        return int(self.features.shape[1])

    @property
    def P(self) -> int:
        return int(sum(self.performative_mask))

    @property
    def performative_names(self) -> Tuple[str, ...]:
        return self.feature_names[: self.P]

    @property
    def nonperformative_names(self) -> Tuple[str, ...]:
        return self.feature_names[self.P:]

    def require_performative(self) -> None:
        if self.P == 0:
            raise DataError("FPS requires at least one performative feature; the dataset config marks none")

    def truncate(self, end: int) -> "Dataset":
        """Rows [0, end) as a new Dataset; the only view handed to a model in real-time mode."""
        if not 0 < end <= self.T:
            raise DataError(f"cannot truncate a length-{self.T} dataset to {end} rows")
        return self.replace(
            target=self.target[:end],
            features=self.features[:end],
            time_index=self.time_index[:end],
        )

    def horizon_truth(self, t: int, horizon: int) -> np.ndarray:
        """Target values y_{t+1..t+H} used to score a forecast made at anchor t."""
        if t + horizon >= self.T:
            raise DataError(f"horizon of anchor {t} runs past the end of the series")
        return self.target[t + 1: t + 1 + horizon].copy()

    def replace(self, **changes: Any) -> "Dataset":
        values = {
            "target": self.target,
            "features": self.features,
            "feature_names": self.feature_names,
            "performative_mask": self.performative_mask,
            "time_index": self.time_index,
            "target_name": self.target_name,
            "metadata": self.metadata,
        }
        values.update(changes)
        return Dataset(**values)

    def columns(self) -> Tuple[str, ...]:
        return (self.target_name,) + self.feature_names


@dataclass(frozen=True)
class WindowSample:
    """
    One training/eval instance anchored at time step t.

    x_look: rows x_{t-L+1..t} (L×D); y_look: y_{t-L+1..t}; y_hor: y_{t+1..t+H}
    (absent for edge forecasts); x_dr: for performative feature d, column d
    holds x_{t+τ_d-L+1..t+τ_d} (L×P), absent when t+max(τ) is out of range.
    """

    t: int
    x_look: np.ndarray
    y_look: np.ndarray
    y_hor: Optional[np.ndarray] = None
    x_dr: Optional[np.ndarray] = None

    @property
    def has_horizon(self) -> bool:
        return self.y_hor is not None

    @property
    def has_delayed(self) -> bool:
        return self.x_dr is not None


def check_taus(tau: Sequence[int], horizon: int, n_performative: int) -> Tuple[int, ...]:
    tau = tuple(int(v) for v in tau)
    if len(tau) != n_performative:
        raise DataError(f"expected {n_performative} delays, got {len(tau)}")
    for v in tau:
        if not 0 <= v <= horizon:
            raise DataError(f"delay {v} outside [0, {horizon}]")
    return tau
