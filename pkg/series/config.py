# series/config.py
"""
Dataset configuration: which CSV column is the target, how every other
column is classified, the window lengths and the split ratios.
"""

from pathlib import Path
from typing import List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fps_lab.errors import ConfigError, MissingFileError


class DatasetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    target: str
    time_column: str = "date"
    performative: List[str] = Field(default_factory=list)
    non_performative: List[str] = Field(default_factory=list)
    ignored: List[str] = Field(default_factory=list)
    lookback: int = Field(default=16, ge=1)
    horizon: int = Field(default=8, ge=1)
    split_ratios: Tuple[float, float, float] = (0.6, 0.2, 0.2)

    @model_validator(mode="after")
    def _check(self):
        named = [self.target, *self.performative, *self.non_performative, *self.ignored]
        dupes = {n for n in named if named.count(n) > 1}
        if dupes:
            raise ValueError(f"columns classified more than once: {sorted(dupes)}")
        if self.time_column in named:
            raise ValueError(f"time column {self.time_column!r} cannot also be a data column")
        if any(r <= 0 for r in self.split_ratios) or abs(sum(self.split_ratios) - 1.0) > 1e-9:
            raise ValueError("split_ratios must be three positive numbers summing to 1")
        return self

    def classified(self) -> List[str]:
        return [self.time_column, self.target, *self.performative, *self.non_performative, *self.ignored]


def load_yaml(path: Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"config file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping at the top level")
    return data


def load_dataset_config(path: Path, overrides: Optional[dict] = None) -> DatasetConfig:
    data = load_yaml(path)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return DatasetConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"invalid dataset config {path}: {exc.errors()[0]['msg']}") from exc


def write_dataset_config(path: Path, cfg: DatasetConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.model_dump(mode="json"), fh, sort_keys=False)
    return path
