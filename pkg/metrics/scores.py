# metrics/scores.py
"""
NMAE, NRMSE and per-sequence Pearson correlation, computed in original units.

  NMAE  = Σ|y − ŷ| / Σ|y|
  NRMSE = sqrt(mean((y − ŷ)²)) / mean(|y|)
  PC    = Pearson correlation over the horizon of one sequence
"""

import logging
from typing import NamedTuple, Optional

import numpy as np

from fps_lab.errors import ConstantSequenceError, EvaluationError, UndefinedMetricError

logger = logging.getLogger(__name__)


def _pair(y, yhat):
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    yhat = np.atleast_2d(np.asarray(yhat, dtype=np.float64))
    if y.shape != yhat.shape:
        raise EvaluationError(f"shape mismatch: y {y.shape} vs yhat {yhat.shape}")
    if y.size == 0:
        raise EvaluationError("no forecasts to score")
    return y, yhat


def nmae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    scale = np.sum(np.abs(y))
    if scale == 0.0:
        raise UndefinedMetricError("undefined normalization: every target value is zero")
    return float(np.sum(np.abs(y - yhat)) / scale)


def nrmse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    scale = np.mean(np.abs(y))
    if scale == 0.0:
        raise UndefinedMetricError("undefined normalization: every target value is zero")
    return float(np.sqrt(np.mean((y - yhat) ** 2)) / scale)


def pc(y_seq, yhat_seq) -> float:
    y = np.asarray(y_seq, dtype=np.float64).ravel()
    yhat = np.asarray(yhat_seq, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise EvaluationError(f"length mismatch: {y.size} vs {yhat.size}")
    if y.size < 2:
        raise EvaluationError("PC needs a horizon of at least 2")
    dy = y - y.mean()
    dp = yhat - yhat.mean()
    denom = np.sqrt(np.dot(dy, dy) * np.dot(dp, dp))
    if denom == 0.0:
        raise ConstantSequenceError("constant sequence")
    return float(np.dot(dy, dp) / denom)


class PcSummary(NamedTuple):
    mean: Optional[float]
    included: int
    excluded: int


def mean_pc(y, yhat) -> PcSummary:
    """Mean per-sequence PC; constant sequences are skipped and counted."""
    y, yhat = _pair(y, yhat)
    if y.shape[1] < 2:
        return PcSummary(None, 0, y.shape[0])
    values = []
    excluded = 0
    for row_y, row_p in zip(y, yhat):
        try:
            values.append(pc(row_y, row_p))
        except ConstantSequenceError:
            excluded += 1
    if excluded:
        logger.warning("excluded %d constant sequence(s) from mean PC", excluded)
    if not values:
        return PcSummary(None, 0, excluded)
    return PcSummary(float(np.mean(values)), len(values), excluded)
