# harness/rundir.py
"""
Run directory layout:

  config.yaml        the run configuration as given (after flag overrides)
  manifest.json      config, config hash, seeds, dataset summary, alignment,
                     chosen hyperparameters, per-model manifests, loss curves
  alignment.json     AlignmentResult used by the final models (FPS runs)
  checkpoints/       one seqmodel checkpoint per method and seed
                     (realtime: checkpoints/step-<t0>/...)
  records.csv        per (sequence, h) forecast records
  summary.json       aggregates, provenance, notes, warnings
  plot.csv           phase, t, h, target_t, y_true and one ŷ column per method
                     (ensemble forecasts)
"""

import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import pandas as pd
import yaml

from alignment.search import AlignmentResult
from fps.predictors import ErmModel, FpsModel, Model
from fps_lab.errors import DataError, MissingFileError
from fps_lab.serialization import read_json, to_jsonable, write_json
from harness.protocols import RunResult
from metrics.reports import EvalReport
from seqmodel.checkpoint import load_checkpoint, save_checkpoint
from seqmodel.params import ParamSet
from series.scaling import Scaler

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.yaml"
MANIFEST_FILE = "manifest.json"
ALIGNMENT_FILE = "alignment.json"
PLOT_FILE = "plot.csv"


def plot_frame(report: EvalReport) -> pd.DataFrame:
    frame = report.records()
    frame = frame[frame.model == "ensemble"]
    wide = frame.pivot_table(index=["phase", "t", "h", "y_true"], columns="method", values="y_pred", aggfunc="first")
    wide = wide.reset_index()
    wide.columns.name = None
    wide.insert(3, "target_t", wide["t"] + wide["h"])
    return wide.sort_values(["t", "h"], kind="mergesort").reset_index(drop=True)


class RunDirectory:
    def __init__(self, root: Path):
        self.root = Path(root)

    def path(self, name: str) -> Path:
        return self.root / name

    def write_config(self, config: dict) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        with self.path(CONFIG_FILE).open("w", encoding="utf-8") as fh:
            yaml.safe_dump(to_jsonable(config), fh, sort_keys=True)
        return self.path(CONFIG_FILE)

    def write_checkpoints(self, checkpoints: Mapping[str, Mapping[str, ParamSet]]) -> Path:
        for rel, groups in sorted(checkpoints.items()):
            save_checkpoint(self.path("checkpoints") / rel, groups)
        return self.path("checkpoints")

    def write_artifacts(self, manifest: dict, config: dict, alignment=None, checkpoints=None) -> Dict[str, Path]:
        """Everything but the evaluation outputs; used on its own by training-only runs."""
        written = {
            "config": self.write_config(config),
            "manifest": write_json(self.path(MANIFEST_FILE), {**manifest, "run_config": config}),
        }
        if alignment is not None:
            written["alignment"] = alignment.save(self.path(ALIGNMENT_FILE))
        if checkpoints:
            written["checkpoints"] = self.write_checkpoints(checkpoints)
        return written

    def write(self, result: RunResult, config: Optional[dict] = None) -> Dict[str, Path]:
        config = config if config is not None else result.manifest.get("config", {})
        written = self.write_artifacts(result.manifest, config, result.alignment, result.checkpoints)
        written["records"], written["summary"] = result.report.save(self.root)
        plot_frame(result.report).to_csv(self.path(PLOT_FILE), index=False, float_format="%.17g")
        written["plot"] = self.path(PLOT_FILE)
        logger.info("run written to %s (%d checkpoints)", self.root, len(result.checkpoints))
        return written

    # ------------------------------------------------------------------
    # reading back
    # ------------------------------------------------------------------
    def manifest(self) -> dict:
        path = self.path(MANIFEST_FILE)
        if not path.is_file():
            raise MissingFileError(f"no {MANIFEST_FILE} in {self.root}")
        return read_json(path)

    def alignment(self) -> AlignmentResult:
        return AlignmentResult.load(self.path(ALIGNMENT_FILE))

    def load_models(self) -> Dict[str, List[Model]]:
        """
        Rebuild the final members of every method from manifest.json and the
        checkpoints it indexes. Scalers, τ and window lengths come from the
        per-model manifests; architectures must agree with the checkpoints.
        """
        manifest = self.manifest()
        n_performative = manifest["dataset"]["P"]
        index = manifest.get("checkpoints", {})
        models: Dict[str, List[Model]] = {}
        for method, entries in manifest.get("models", {}).items():
            paths = index.get(method) or [f"{method}-seed{e['seed']}.ckpt" for e in entries]
            if len(paths) != len(entries):
                raise DataError(f"{MANIFEST_FILE}: {len(entries)} {method} models but {len(paths)} checkpoints")
            models[method] = [self._rebuild(entry, self.path("checkpoints") / rel, n_performative)
                              for entry, rel in zip(entries, paths)]
        logger.info("loaded %s from %s", {m: len(ms) for m, ms in models.items()}, self.root)
        return models

    @staticmethod
    def _rebuild(entry: dict, path: Path, n_performative: int) -> Model:
        groups = load_checkpoint(path)
        described = {name: params.arch.describe() for name, params in groups.items()}
        expected = entry["architectures"]
        stored = {"translator": described.get("f"), "forecaster": described.get("g")}
        if any(stored[k] != v for k, v in expected.items()):
            raise DataError(f"checkpoint {path.name} does not match the architectures in {MANIFEST_FILE}")
        common = dict(
            g_params=groups["g"],
            scaler=Scaler.from_stats(entry["scaler"]),
            lookback=int(entry["lookback"]),
            horizon=int(entry["horizon"]),
            n_performative=n_performative,
            config_hash=entry.get("config_hash", ""),
            seed=int(entry["seed"]),
            method=entry["method"],
            chosen_epoch=int(entry.get("chosen_epoch", 0)),
        )
        if "tau" in entry:
            return FpsModel(tau=tuple(int(t) for t in entry["tau"]), f_params=groups["f"],
                            reads_lookback=bool(entry.get("reads_lookback", False)), **common)
        return ErmModel(**common)
