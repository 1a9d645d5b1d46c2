# alignment/search.py
"""
Delay search between each performative feature and the target.

For shifts i = 0..H the search compares x[i : T−H+i] with y[H : T] and keeps
the shift of largest strength (|similarity|). τ = i means x leads y by H−τ
steps: the delayed window X^L_{t+τ} ends at the feature value co-occurring
causally with the end of the target horizon. τ = H means no lead. Ties go to
the smallest i.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from fps_lab.errors import AlignmentError, DataError, DegenerateWindowError, MissingFileError
from fps_lab.serialization import read_json, write_json
from alignment.similarity import Metric, score_shift
from series.datasets import Dataset

logger = logging.getLogger(__name__)

WEAK_SIGNAL = 0.05
WINDOW_CONVENTION = "0-based half-open: x[i:T-H+i] vs y[H:T], i in 0..H"


class FeatureAlignment(NamedTuple):
    tau: int
    score: float
    sign: int
    profile: Tuple[float, ...]
    warnings: Tuple[str, ...]


def align_feature(x, y, horizon: int, metric: Metric = Metric.COSINE) -> FeatureAlignment:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    T = y.size
    if x.size != T:
        raise AlignmentError(f"feature has {x.size} points, target {T}")
    if T <= horizon + 2:
        raise AlignmentError(f"need T > H+2 to align (T={T}, H={horizon})")
    metric = Metric(metric)

    target_window = y[horizon:T]
    best = (-np.inf, 0.0, 1, 0)
    profile = []
    try:
        for i in range(horizon + 1):
            strength, score, sign = score_shift(metric, x[i: T - horizon + i], target_window)
            profile.append(score)
            if strength > best[0]:
                best = (strength, score, sign, i)
    except DegenerateWindowError:
        logger.warning("degenerate window while aligning; falling back to tau=0")
        return FeatureAlignment(0, 0.0, 1, tuple(profile), ("degenerate window: fell back to tau=0",))

    warnings = []
    if metric is not Metric.NEG_EUCLIDEAN and all(abs(s) < WEAK_SIGNAL for s in profile):
        logger.warning("weak performativity signal: every |similarity| < %.2f", WEAK_SIGNAL)
        warnings.append("weak performativity signal")
    _, score, sign, tau = best
    return FeatureAlignment(tau, score, sign, tuple(profile), tuple(warnings))


@dataclass(frozen=True)
class AlignmentResult:
    feature_names: Tuple[str, ...]
    taus: Tuple[int, ...]
    scores: Tuple[float, ...]
    signs: Tuple[int, ...]
    metric: Metric
    search_range: Tuple[int, int]
    horizon: int
    profiles: Tuple[Tuple[float, ...], ...] = ()
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict:
        return {
            "features": [
                {"name": n, "tau": t, "score": s, "sign": g, "profile": list(p)}
                for n, t, s, g, p in zip(self.feature_names, self.taus, self.scores, self.signs, self.profiles)
            ],
            "metric": Metric(self.metric).value,
            "search_range": list(self.search_range),
            "horizon": self.horizon,
            "convention": WINDOW_CONVENTION,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentResult":
        feats = data["features"]
        return cls(
            feature_names=tuple(f["name"] for f in feats),
            taus=tuple(int(f["tau"]) for f in feats),
            scores=tuple(float(f["score"]) for f in feats),
            signs=tuple(int(f["sign"]) for f in feats),
            metric=Metric(data["metric"]),
            search_range=tuple(data["search_range"]),
            horizon=int(data["horizon"]),
            profiles=tuple(tuple(f.get("profile", ())) for f in feats),
            warnings=tuple(data.get("warnings", ())),
        )

    def save(self, path: Path) -> Path:
        return write_json(path, self.as_dict())

    @classmethod
    def load(cls, path: Path) -> "AlignmentResult":
        """Read alignment.json; a run directory stands for the file inside it."""
        path = Path(path)
        if path.is_dir():
            path = path / "alignment.json"
        if not path.is_file():
            raise MissingFileError(f"alignment file not found: {path}")
        try:
            return cls.from_dict(read_json(path))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"{path} is not an alignment file: {exc}") from exc


def align_all(
    ds: Dataset,
    train_range: Optional[Tuple[int, int]],
    horizon: int,
    metric: Metric = Metric.COSINE,
) -> AlignmentResult:
    """Align every performative column independently on train_range; other columns get no τ."""
    if ds.P == 0:
        raise AlignmentError("alignment needs at least one performative feature")
    lo, hi = train_range if train_range is not None else (0, ds.T)
    y = ds.target[lo:hi]

    found: List[FeatureAlignment] = []
    warnings: List[str] = []
    for d, name in enumerate(ds.performative_names):
        try:
            result = align_feature(ds.features[lo:hi, d], y, horizon, metric)
        except AlignmentError as exc:
            raise type(exc)(f"feature {name}: {exc}") from exc
        found.append(result)
        warnings.extend(f"{name}: {w}" for w in result.warnings)
        logger.info("aligned %s: tau=%d score=%+.4f (%s)", name, result.tau, result.score, Metric(metric).value)

    return AlignmentResult(
        feature_names=ds.performative_names,
        taus=tuple(r.tau for r in found),
        scores=tuple(r.score for r in found),
        signs=tuple(r.sign for r in found),
        metric=Metric(metric),
        search_range=(lo, hi),
        horizon=horizon,
        profiles=tuple(r.profile for r in found),
        warnings=tuple(warnings),
    )
