# harness/grid.py
"""Grid-from-config hyperparameter candidates."""

import itertools
from typing import Any, Dict, List, Mapping, NamedTuple, Sequence

from pydantic import ValidationError

from fps.config import ModelConfig, TrainConfig
from fps_lab.errors import ConfigError


class Candidate(NamedTuple):
    label: str
    train: TrainConfig
    model: ModelConfig
    overrides: Dict[str, Any]


def expand_grid(train: TrainConfig, model: ModelConfig, grid: Mapping[str, Sequence[Any]]) -> List[Candidate]:
    """Cartesian product over sorted keys; an empty grid yields the base configuration."""
    keys = sorted(grid)
    for key in keys:
        if key == "seed":
            raise ConfigError("seed cannot be a grid axis; use ensemble_size or protocol seeds")
        if key not in TrainConfig.model_fields and key not in ModelConfig.model_fields:
            raise ConfigError(f"unknown grid key {key!r}")
        if not grid[key]:
            raise ConfigError(f"grid key {key!r} has no candidate values")

    candidates = []
    for values in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        train_updates = {k: v for k, v in overrides.items() if k in TrainConfig.model_fields}
        model_updates = {k: v for k, v in overrides.items() if k in ModelConfig.model_fields}
        try:
            cand_train = TrainConfig(**{**train.model_dump(), **train_updates})
            cand_model = ModelConfig(**{**model.model_dump(), **model_updates})
        except ValidationError as exc:
            raise ConfigError(f"invalid grid candidate {overrides}: {exc.errors()[0]['msg']}") from exc
        label = ",".join(f"{k}={v}" for k, v in overrides.items()) or "base"
        candidates.append(Candidate(label, cand_train, cand_model, overrides))
    return candidates
