# cli/config.py
"""
RunConfig: the experiment configuration plus where the data comes from and
where the run is written.

Precedence: defaults < YAML file (--config) < command-line flags. Flag
overrides are dotted paths ("train.epochs") so they can reach nested models.
"""

import copy
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from django.conf import settings
from pydantic import ValidationError, model_validator

from alignment.search import AlignmentResult
from fps.predictors import Model
from fps_lab.errors import ConfigError
from harness.config import ExperimentConfig
from harness.rundir import RunDirectory
from series.config import DatasetConfig, load_dataset_config, load_yaml
from series.datasets import Dataset
from series.loaders import load_csv
from series.synthetic import SyntheticSpec, generate_synthetic

logger = logging.getLogger(__name__)


class RunConfig(ExperimentConfig):
    data: Optional[str] = None
    dataset_config: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    output_dir: Optional[str] = None
    alignment: Optional[str] = None
    init_checkpoint: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if self.data is not None and self.synthetic is not None:
            raise ValueError("give either data or synthetic, not both")
        return self

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(**self.model_dump(include=set(ExperimentConfig.model_fields)))

    def run_dir(self, command: str) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(settings.FPS_RUNS_DIR) / f"{command}-{self.config_hash()}-seed{self.seed}"


def apply_overrides(data: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Set dotted keys on a copy of data; None values are skipped."""
    merged = copy.deepcopy(data)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        *parents, leaf = dotted.split(".")
        for key in parents:
            child = node.get(key)
            if child is None:
                child = node[key] = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"cannot set {dotted}: {key} is not a mapping")
            node = child
        node[leaf] = value
    return merged


def load_run_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    data = load_yaml(path) if path else {}
    data.setdefault("seed", settings.FPS_DEFAULT_SEED)
    data = apply_overrides(data, overrides or {})
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"invalid run config: {where}: {first['msg']}") from exc


def sidecar_config(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix(".yaml")


def load_run_alignment(cfg: RunConfig) -> Optional[AlignmentResult]:
    """The stored alignment named by the config (a file or a run directory), if any."""
    if cfg.alignment is None:
        return None
    alignment = AlignmentResult.load(Path(cfg.alignment))
    logger.info("using stored alignment %s: tau=%s", cfg.alignment, list(alignment.taus))
    return alignment


def load_initial_models(cfg: RunConfig) -> Optional[Dict[str, List[Model]]]:
    """Models rebuilt from the run directory named by init_checkpoint, if any."""
    if cfg.init_checkpoint is None:
        return None
    return RunDirectory(Path(cfg.init_checkpoint)).load_models()


def load_run_dataset(cfg: RunConfig) -> Dataset:
    """Generate the synthetic series or load the CSV the config names."""
    if cfg.synthetic is not None:
        return generate_synthetic(cfg.synthetic)
    if cfg.data is None:
        raise ConfigError("no data source: pass --data or put data/synthetic in the config")
    config_path = Path(cfg.dataset_config) if cfg.dataset_config else sidecar_config(Path(cfg.data))
    ds_config: DatasetConfig = load_dataset_config(config_path, {"lookback": cfg.lookback, "horizon": cfg.horizon})
    return load_csv(Path(cfg.data), ds_config)
