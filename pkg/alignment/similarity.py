# alignment/similarity.py
"""
Window similarity measures.

All measures work on mean-centered windows, so cosine similarity and the
Pearson correlation coincide.
"""

from enum import Enum
from typing import Tuple

import numpy as np

from fps_lab.errors import AlignmentError, DegenerateWindowError


class Metric(str, Enum):
    COSINE = "cosine"
    PEARSON = "pearson"
    NEG_EUCLIDEAN = "neg-euclidean"


def _pair(u, v) -> Tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if u.shape != v.shape:
        raise AlignmentError(f"windows differ in length: {u.size} vs {v.size}")
    if u.size < 2:
        raise AlignmentError("windows need at least 2 points")
    return u, v


def cosine_similarity(u, v) -> float:
    """⟨u,v⟩ / (‖u‖‖v‖) on the mean-centered vectors; lies in [-1, 1]."""
    u, v = _pair(u, v)
    u = u - u.mean()
    v = v - v.mean()
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateWindowError("degenerate window")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def pearson_correlation(u, v) -> float:
    """Sample Pearson correlation through covariance and standard deviations."""
    u, v = _pair(u, v)
    su = u.std(ddof=1)
    sv = v.std(ddof=1)
    if su == 0.0 or sv == 0.0:
        raise DegenerateWindowError("degenerate window")
    cov = np.sum((u - u.mean()) * (v - v.mean())) / (u.size - 1)
    return float(np.clip(cov / (su * sv), -1.0, 1.0))


def _zscore_pair(u, v) -> Tuple[np.ndarray, np.ndarray]:
    u, v = _pair(u, v)
    su = u.std()
    sv = v.std()
    if su == 0.0 or sv == 0.0:
        raise DegenerateWindowError("degenerate window")
    return (u - u.mean()) / su, (v - v.mean()) / sv


def neg_euclidean(u, v) -> float:
    """
    −min(‖z(u)−z(v)‖, ‖z(u)+z(v)‖) on z-scored windows, so an anticorrelated
    pair aligns as well as a correlated one. Always ≤ 0.
    """
    zu, zv = _zscore_pair(u, v)
    return float(-min(np.linalg.norm(zu - zv), np.linalg.norm(zu + zv)))


def _euclidean_sign(u, v) -> int:
    zu, zv = _zscore_pair(u, v)
    return 1 if np.linalg.norm(zu - zv) <= np.linalg.norm(zu + zv) else -1


def score_shift(metric: Metric, u, v) -> Tuple[float, float, int]:
    """
    (strength, score, sign) of one candidate shift. The delay search maximizes
    strength: |similarity| for the correlation metrics, the negative distance
    for neg-euclidean.
    """
    metric = Metric(metric)
    if metric is Metric.COSINE:
        score = cosine_similarity(u, v)
    elif metric is Metric.PEARSON:
        score = pearson_correlation(u, v)
    else:
        score = neg_euclidean(u, v)
        return score, score, _euclidean_sign(u, v)
    return abs(score), score, 1 if score >= 0 else -1
