# metrics/reports.py
"""
EvalReport: forecast records plus the aggregates recomputed from them.

records.csv, one row per (sequence, horizon step):

  method    fps | erm | oracle
  model     member label ("seed-3") or "ensemble"
  seed      member seed; first seed of the ensemble for "ensemble" rows
  phase     test | validation
  sequence  0-based index of the forecast within (method, model, phase)
  t         anchor index (last observed step)
  h         1..H
  y_true    observed target, original units
  y_pred    forecast, original units

Floats are written with %.17g so a re-read reproduces them bit-for-bit.

summary.json holds protocol, provenance, notes, warnings, parameter counts and
one aggregate per (method, model, phase): nmae, nrmse, pc (mean over
non-constant sequences, null when none), pc_included, pc_excluded,
n_sequences, horizon.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fps_lab.errors import EvaluationError, InvariantError, MissingFileError
from fps_lab.serialization import read_json, write_json
from metrics.scores import PcSummary, mean_pc, nmae, nrmse

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["method", "model", "seed", "phase", "sequence", "t", "h", "y_true", "y_pred"]
RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.json"

NOTES = {
    "normalization": "inputs z-scored with statistics of the training range; metrics in original units",
    "alignment_convention": "s_i = Sim(x[i:T-H+i], y[H:T]), half-open, 0-based, centered windows",
    "pc_aggregate": "mean of per-sequence PC; constant sequences excluded and counted",
}


@dataclass(frozen=True)
class Aggregate:
    method: str
    model: str
    phase: str
    nmae: float
    nrmse: float
    pc: Optional[float]
    pc_included: int
    pc_excluded: int
    n_sequences: int
    horizon: int


def _matrices(frame: pd.DataFrame) -> Tuple[np.ndarray, np.ndarray]:
    """(N, H) target and forecast matrices, rows in sequence order."""
    frame = frame.sort_values(["sequence", "h"], kind="mergesort")
    y = frame.pivot(index="sequence", columns="h", values="y_true").to_numpy(dtype=np.float64)
    p = frame.pivot(index="sequence", columns="h", values="y_pred").to_numpy(dtype=np.float64)
    return y, p


def _aggregate(method: str, model: str, phase: str, frame: pd.DataFrame) -> Aggregate:
    y, p = _matrices(frame)
    summary = mean_pc(y, p)
    return Aggregate(
        method=method,
        model=model,
        phase=phase,
        nmae=nmae(y, p),
        nrmse=nrmse(y, p),
        pc=summary.mean,
        pc_included=summary.included,
        pc_excluded=summary.excluded,
        n_sequences=int(y.shape[0]),
        horizon=int(y.shape[1]),
    )


def aggregate_records(frame: pd.DataFrame) -> List[Aggregate]:
    """One Aggregate per (method, model, phase), in sorted key order."""
    if frame.empty:
        raise EvaluationError("no forecast records")
    out = []
    for (method, model, phase), group in frame.groupby(["method", "model", "phase"], sort=True):
        out.append(_aggregate(str(method), str(model), str(phase), group))
    return out


@dataclass
class EvalReport:
    protocol: str
    provenance: Dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    parameters: Dict[str, int] = field(default_factory=dict)
    _rows: List[dict] = field(default_factory=list, repr=False)
    _aggregates: Optional[List[Aggregate]] = field(default=None, repr=False)
    _counts: Dict[Tuple[str, str, str], int] = field(default_factory=dict, repr=False)

    def add_forecasts(
        self,
        method: str,
        model: str,
        seed: int,
        anchors: Sequence[int],
        y_true: np.ndarray,
        y_pred: np.ndarray,
        phase: str = "test",
    ) -> None:
        y_true = np.atleast_2d(np.asarray(y_true, dtype=np.float64))
        y_pred = np.atleast_2d(np.asarray(y_pred, dtype=np.float64))
        if y_true.shape != y_pred.shape or y_true.shape[0] != len(anchors):
            raise EvaluationError(f"{method}/{model}: {len(anchors)} anchors, y {y_true.shape}, yhat {y_pred.shape}")
        start = self._counts.get((method, model, phase), 0)
        self._counts[(method, model, phase)] = start + len(anchors)
        for k, t in enumerate(anchors):
            for h in range(y_true.shape[1]):
                self._rows.append({
                    "method": method,
                    "model": model,
                    "seed": int(seed),
                    "phase": phase,
                    "sequence": start + k,
                    "t": int(t),
                    "h": h + 1,
                    "y_true": float(y_true[k, h]),
                    "y_pred": float(y_pred[k, h]),
                })
        self._aggregates = None

    def records(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows, columns=RECORD_COLUMNS)

    @property
    def aggregates(self) -> List[Aggregate]:
        if self._aggregates is None:
            self._aggregates = aggregate_records(self.records())
        return self._aggregates

    def aggregate_for(self, method: str, model: str = "ensemble", phase: str = "test") -> Aggregate:
        for agg in self.aggregates:
            if (agg.method, agg.model, agg.phase) == (method, model, phase):
                return agg
        raise EvaluationError(f"no aggregate for {method}/{model}/{phase}")

    def anchors(self, method: str, model: str = "ensemble", phase: str = "test") -> Tuple[int, ...]:
        frame = self.records()
        rows = frame[(frame.method == method) & (frame.model == model) & (frame.phase == phase) & (frame.h == 1)]
        return tuple(int(t) for t in rows.sort_values("sequence").t)

    def mean_pc(self, method: str, model: str = "ensemble", phase: str = "test", since: Optional[int] = None) -> PcSummary:
        """Mean per-sequence PC restricted to anchors t >= since."""
        frame = self.records()
        frame = frame[(frame.method == method) & (frame.model == model) & (frame.phase == phase)]
        if since is not None:
            frame = frame[frame.t >= since]
        if frame.empty:
            raise EvaluationError(f"no {method}/{model}/{phase} records from anchor {since}")
        return mean_pc(*_matrices(frame))

    def summary(self) -> dict:
        return {
            "protocol": self.protocol,
            "provenance": self.provenance,
            "notes": NOTES,
            "warnings": list(self.warnings),
            "parameters": self.parameters,
            "aggregates": [asdict(a) for a in self.aggregates],
        }

    def save(self, out_dir: Path) -> Tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        records_path = out_dir / RECORDS_FILE
        self.records().to_csv(records_path, index=False, float_format="%.17g")
        summary_path = write_json(out_dir / SUMMARY_FILE, self.summary())
        logger.info("wrote %d records and %d aggregates to %s", len(self._rows), len(self.aggregates), out_dir)
        return records_path, summary_path


def read_records(path: Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"records file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip", dtype={"method": str, "model": str, "phase": str})
    missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
    if missing:
        raise EvaluationError(f"records file {path} lacks columns {missing}")
    return frame[RECORD_COLUMNS]


def verify_summary(records_path: Path, summary_path: Path) -> List[Aggregate]:
    """Recompute every aggregate from the records and compare with the stored summary exactly."""
    summary_path = Path(summary_path)
    if not summary_path.exists():
        raise MissingFileError(f"summary file not found: {summary_path}")
    recomputed = aggregate_records(read_records(records_path))
    stored = read_json(summary_path).get("aggregates", [])
    fresh = [asdict(a) for a in recomputed]
    if len(stored) != len(fresh):
        raise InvariantError(f"aggregate mismatch: summary lists {len(stored)} aggregates, records give {len(fresh)}")
    for old, new in zip(stored, fresh):
        if old != new:
            differing = sorted(k for k in new if old.get(k) != new[k])
            raise InvariantError(f"aggregate mismatch for {new['method']}/{new['model']}/{new['phase']}: {', '.join(differing)}")
    return recomputed
