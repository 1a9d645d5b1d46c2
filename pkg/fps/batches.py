# fps/batches.py
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from fps_lab.errors import ShapeError
from series.datasets import WindowSample


@dataclass(frozen=True)
class WindowBatch:
    """Stacked WindowSamples; x_dr rows of samples without ground truth are zero and masked out."""

    t: np.ndarray
    x_look: np.ndarray
    y_look: np.ndarray
    y_hor: np.ndarray
    x_dr: np.ndarray
    has_dr: np.ndarray
    n_performative: int

    @classmethod
    def from_samples(cls, samples: Sequence[WindowSample], n_performative: int, need_horizon: bool = True) -> "WindowBatch":
        if not samples:
            raise ShapeError("cannot batch an empty list of samples")
        lookback = samples[0].x_look.shape[0]
        if need_horizon and any(s.y_hor is None for s in samples):
            raise ShapeError("every sample needs a horizon window")
        horizon = samples[0].y_hor.shape[0] if samples[0].y_hor is not None else 0
        x_dr = np.zeros((len(samples), lookback, n_performative))
        has_dr = np.zeros(len(samples), dtype=bool)
        for k, s in enumerate(samples):
            if s.x_dr is not None:
                if s.x_dr.shape != (lookback, n_performative):
                    raise ShapeError(f"x_dr of anchor {s.t} has shape {s.x_dr.shape}")
                x_dr[k] = s.x_dr
                has_dr[k] = True
        return cls(
            t=np.array([s.t for s in samples]),
            x_look=np.stack([s.x_look for s in samples]),
            y_look=np.stack([s.y_look for s in samples]),
            y_hor=np.stack([s.y_hor for s in samples]) if horizon else np.zeros((len(samples), 0)),
            x_dr=x_dr,
            has_dr=has_dr,
            n_performative=n_performative,
        )

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def x_perf(self) -> np.ndarray:
        return self.x_look[:, :, : self.n_performative]

    @property
    def x_nonperf(self) -> np.ndarray:
        return self.x_look[:, :, self.n_performative:]

    @property
    def y_channel(self) -> np.ndarray:
        return self.y_look[:, :, None]

    def subset(self, index: np.ndarray) -> "WindowBatch":
        return WindowBatch(
            t=self.t[index],
            x_look=self.x_look[index],
            y_look=self.y_look[index],
            y_hor=self.y_hor[index],
            x_dr=self.x_dr[index],
            has_dr=self.has_dr[index],
            n_performative=self.n_performative,
        )

    def minibatches(self, batch_size: int, rng: np.random.Generator) -> Iterator["WindowBatch"]:
        order = rng.permutation(len(self))
        for lo in range(0, len(order), batch_size):
            yield self.subset(order[lo: lo + batch_size])
