# series/loaders.py
"""
CSV ingestion.

Missing or non-numeric cells are hard errors; nothing is imputed.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from fps_lab.errors import DataError, MissingFileError
from series.config import DatasetConfig
from series.datasets import Dataset

logger = logging.getLogger(__name__)


def _time_labels(column: pd.Series) -> tuple:
    if pd.api.types.is_integer_dtype(column):
        return tuple(int(v) for v in column)
    try:
        parsed = pd.to_datetime(column, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise DataError(f"time column {column.name!r} is neither integer steps nor ISO dates") from exc
    return tuple(ts.isoformat() for ts in parsed)


def load_csv(path: Path, config: DatasetConfig) -> Dataset:
    """
    Parse a headed UTF-8 CSV into a Dataset ordered [performative..., non-performative...].
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"dataset not found: {path}")

    frame = pd.read_csv(path, encoding="utf-8", dtype=str, keep_default_na=False)
    header = list(frame.columns)

    missing = [c for c in config.classified() if c not in header]
    if missing:
        raise DataError(f"column {missing[0]!r} named in config is missing from {path.name}")
    unclassified = [c for c in header if c not in config.classified()]
    if unclassified:
        raise DataError(f"column {unclassified[0]!r} is not classified by the dataset config")

    data_columns = [config.target, *config.performative, *config.non_performative]
    values = np.empty((len(frame), len(data_columns)), dtype=np.float64)
    for j, name in enumerate(data_columns):
        raw = frame[name].str.strip()
        for r, cell in enumerate(raw):
            if cell == "" or cell.lower() in ("nan", "na", "null", "none"):
                raise DataError(f"missing value at row {r}, column {name}")
        numeric = pd.to_numeric(raw, errors="coerce")
        bad = np.flatnonzero(numeric.isna().to_numpy())
        if bad.size:
            r = int(bad[0])
            raise DataError(f"non-numeric value {raw.iloc[r]!r} at row {r}, column {name}")
        values[:, j] = numeric.to_numpy(dtype=np.float64)

    time_raw = frame[config.time_column].str.strip()
    numeric_time = pd.to_numeric(time_raw, errors="coerce")
    if numeric_time.isna().any():
        time_column = time_raw
    else:
        fractional = np.flatnonzero(numeric_time.to_numpy() % 1 != 0)
        if fractional.size:
            r = int(fractional[0])
            raise DataError(f"time column {config.time_column!r} has non-integer step {time_raw.iloc[r]!r} at row {r}")
        time_column = numeric_time.astype("int64")
    time_index = _time_labels(time_column.rename(config.time_column))

    T = len(frame)
    minimum = config.lookback + 2 * config.horizon
    if T < minimum:
        raise DataError(f"series has {T} rows; at least L+2H = {minimum} are needed to form an aligned sample")

    n_perf = len(config.performative)
    ds = Dataset(
        target=values[:, 0],
        features=values[:, 1:],
        feature_names=tuple(config.performative + config.non_performative),
        performative_mask=tuple([True] * n_perf + [False] * len(config.non_performative)),
        time_index=time_index,
        target_name=config.target,
        metadata={"source": str(path), "ignored": list(config.ignored)},
    )
    logger.info("loaded %s: T=%d D=%d P=%d", path.name, ds.T, ds.D, ds.P)
    return ds
