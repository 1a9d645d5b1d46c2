# harness/access.py
"""
Read auditing for real-time runs.

Every view a step hands to alignment, scaling, training or forecasting goes
through AccessTrackedDataset and is logged as an AccessRecord, as is every
read of future targets for scoring. A run is leak-free when no non-scoring
read reaches past the step's anchor.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from series.datasets import Dataset

logger = logging.getLogger(__name__)

EVALUATE = "evaluate"


@dataclass(frozen=True)
class AccessRecord:
    step: int
    purpose: str
    lo: int
    hi: int

    @property
    def leaks(self) -> bool:
        return self.purpose != EVALUATE and self.hi > self.step + 1


class AccessTrackedDataset:
    def __init__(self, ds: Dataset):
        self._ds = ds
        self.records: List[AccessRecord] = []

    @property
    def T(self) -> int:
        return self._ds.T

    @property
    def dataset(self) -> Dataset:
        return self._ds

    def observed(self, step: int, purpose: str) -> Dataset:
        """Rows [0, step] only."""
        self.records.append(AccessRecord(step, purpose, 0, step + 1))
        return self._ds.truncate(step + 1)

    def truth(self, step: int, horizon: int) -> np.ndarray:
        self.records.append(AccessRecord(step, EVALUATE, step + 1, step + 1 + horizon))
        return self._ds.horizon_truth(step, horizon)

    def violations(self) -> List[AccessRecord]:
        return [r for r in self.records if r.leaks]

    def audit(self) -> dict:
        bad = self.violations()
        if bad:
            logger.error("%d read(s) past the anchor, first: %s", len(bad), bad[0])
        return {"reads": len(self.records), "violations": len(bad)}
