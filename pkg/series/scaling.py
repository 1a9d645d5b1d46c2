# series/scaling.py
"""
Per-column z-scoring fitted on the training range only.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from fps_lab.errors import DataError
from series.datasets import Dataset, WindowSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scaler:
    """
    Column statistics in Dataset.columns() order: index 0 is the target,
    1..D the features. Flagged (constant) columns pass through unscaled.
    """

    columns: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    flagged: Tuple[bool, ...]
    fit_end: int

    @classmethod
    def fit(cls, ds: Dataset, train_end: int) -> "Scaler":
        if not 0 < train_end <= ds.T:
            raise DataError(f"train_end must lie in (0, {ds.T}], got {train_end}")
        block = np.column_stack([ds.target[:train_end], ds.features[:train_end]])
        mean = block.mean(axis=0)
        if train_end > 1:
            std = block.std(axis=0, ddof=1)
        else:
            std = np.zeros(block.shape[1])
        flagged = tuple(bool(s <= 0.0 or not np.isfinite(s)) for s in std)
        mean = np.where(flagged, 0.0, mean)
        std = np.where(flagged, 1.0, std)
        for name, flag in zip(ds.columns(), flagged):
            if flag:
                logger.warning("column %s is constant on [0, %d); passed through unscaled", name, train_end)
        mean.setflags(write=False)
        std.setflags(write=False)
        return cls(columns=ds.columns(), mean=mean, std=std, flagged=flagged, fit_end=train_end)

    # ------------------------------------------------------------------
    @property
    def target_mean(self) -> float:
        return float(self.mean[0])

    @property
    def target_std(self) -> float:
        return float(self.std[0])

    def apply(self, ds: Dataset) -> Dataset:
        if ds.columns() != self.columns:
            raise DataError("scaler was fitted on a dataset with different columns")
        return ds.replace(
            target=(ds.target - self.mean[0]) / self.std[0],
            features=(ds.features - self.mean[1:]) / self.std[1:],
            metadata={**ds.metadata, "scaled": True},
        )

    def scale_target(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean[0]) / self.std[0]

    def invert_target(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.std[0] + self.mean[0]

    def scale_features(self, values: np.ndarray, columns: slice = slice(None)) -> np.ndarray:
        mean = self.mean[1:][columns]
        std = self.std[1:][columns]
        return (np.asarray(values, dtype=np.float64) - mean) / std

    def invert_features(self, values: np.ndarray, columns: slice = slice(None)) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.std[1:][columns] + self.mean[1:][columns]

    def scale_sample(self, sample: WindowSample, n_performative: int) -> WindowSample:
        """Scale a raw-unit window; x_dr columns are the first n_performative features."""
        return WindowSample(
            t=sample.t,
            x_look=self.scale_features(sample.x_look),
            y_look=self.scale_target(sample.y_look),
            y_hor=None if sample.y_hor is None else self.scale_target(sample.y_hor),
            x_dr=None if sample.x_dr is None else self.scale_features(sample.x_dr, slice(0, n_performative)),
        )

    def stats(self) -> dict:
        return {
            "columns": list(self.columns),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "flagged": list(self.flagged),
            "fit_end": self.fit_end,
        }

    @classmethod
    def from_stats(cls, stats: dict) -> "Scaler":
        return cls(
            columns=tuple(stats["columns"]),
            mean=np.asarray(stats["mean"], dtype=np.float64),
            std=np.asarray(stats["std"], dtype=np.float64),
            flagged=tuple(stats["flagged"]),
            fit_end=int(stats["fit_end"]),
        )


def fit_apply_scaler(ds: Dataset, train_end: int) -> Tuple[Dataset, Scaler]:
    scaler = Scaler.fit(ds, train_end)
    return scaler.apply(ds), scaler
