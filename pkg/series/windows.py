# series/windows.py
"""
Window extraction and chronological splits.

The lookback/horizon/delayed-window formulas are translated to 0-based
half-open indices here once; every other app consumes WindowSample.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fps_lab.errors import DataError
from series.datasets import Dataset, WindowSample, check_taus

Range = Tuple[int, int]


def make_windows(
    ds: Dataset,
    lookback: int,
    horizon: int,
    tau: Optional[Sequence[int]] = None,
    window_range: Optional[Range] = None,
) -> List[WindowSample]:
    """
    One sample per anchor t with t-L+1 >= lo and t+H <= hi-1.

    x_dr is attached iff tau is given and t+max(tau) <= hi-1. An empty list is
    returned when the range is too short for a single sample.
    """
    if lookback < 1 or horizon < 1:
        raise DataError("lookback and horizon must be at least 1")
    lo, hi = window_range if window_range is not None else (0, ds.T)
    lo, hi = max(0, lo), min(ds.T, hi)
    if tau is not None:
        tau = check_taus(tau, horizon, ds.P)

    samples = []
    for t in range(lo + lookback - 1, hi - horizon):
        samples.append(_sample_at(ds, t, lookback, horizon, tau, hi))
    return samples


def forecast_sample(
    ds: Dataset,
    t: int,
    lookback: int,
    tau: Optional[Sequence[int]] = None,
    horizon: Optional[int] = None,
) -> WindowSample:
    """
    Sample anchored at t without requiring a horizon; y_hor is attached only
    when horizon is given and y_{t+1..t+H} exists.
    """
    if t - lookback + 1 < 0 or t >= ds.T:
        raise DataError(f"anchor {t} has no full lookback window in a length-{ds.T} series")
    has_horizon = horizon is not None and t + horizon <= ds.T - 1
    if tau is not None:
        tau = check_taus(tau, horizon if horizon is not None else max(tau, default=0), ds.P)
    return _sample_at(ds, t, lookback, horizon if has_horizon else None, tau, ds.T)


def _sample_at(ds: Dataset, t: int, lookback: int, horizon: Optional[int], tau, hi: int) -> WindowSample:
    start = t - lookback + 1
    x_look = ds.features[start: t + 1]
    y_look = ds.target[start: t + 1]
    y_hor = ds.target[t + 1: t + 1 + horizon] if horizon is not None else None

    x_dr = None
    if tau is not None and len(tau) and t + max(tau) <= hi - 1:
        x_dr = np.empty((lookback, len(tau)))
        for d, shift in enumerate(tau):
            x_dr[:, d] = ds.features[start + shift: t + shift + 1, d]
    return WindowSample(t=t, x_look=x_look, y_look=y_look, y_hor=y_hor, x_dr=x_dr)


def split_standard(ds: Dataset, ratios: Tuple[float, float, float] = (0.6, 0.2, 0.2)) -> Tuple[Range, Range, Range]:
    """Contiguous chronological train/validation/test ranges; boundaries are floored."""
    first = math.floor(ratios[0] * ds.T + 1e-9)
    second = math.floor((ratios[0] + ratios[1]) * ds.T + 1e-9)
    if not 0 < first < second < ds.T:
        raise DataError(f"series of length {ds.T} is too short to split")
    return (0, first), (first, second), (second, ds.T)


def eval_range(split: Range, lookback: int) -> Range:
    """Window range whose anchors forecast targets inside split; lookbacks may reach earlier data."""
    lo, hi = split
    return max(0, lo - lookback), hi
