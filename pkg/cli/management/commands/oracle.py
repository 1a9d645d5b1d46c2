"""
Oracle comparison: ERM, FPS on estimated delayed windows and a forecaster fed
the true delayed windows, on identical test anchors.
"""

from cli.base import FpsCommand
from cli.config import load_run_alignment, load_run_config, load_run_dataset
from fps_lab.errors import ConfigError
from harness.protocols import run_oracle
from harness.rundir import RunDirectory


class Command(FpsCommand):
    help = "Compare erm, fps and the true-X^DR oracle on the same anchors."

    def add_arguments(self, parser):
        self.add_experiment_arguments(parser, methods=False)

    def run(self, **options):
        cfg = load_run_config(options["config"], {**self.overrides(options), "protocol.kind": "oracle"})
        if cfg.init_checkpoint is not None:
            raise ConfigError("init_checkpoint applies to train and realtime runs only")
        ds = load_run_dataset(cfg)
        result = run_oracle(ds, cfg.experiment(), load_run_alignment(cfg))
        run_dir = RunDirectory(cfg.run_dir("oracle"))
        run_dir.write(result, cfg.model_dump(mode="json"))
        self.write_aggregates([a for a in result.report.aggregates if a.model == "ensemble"])
        self.stdout.write(self.style.SUCCESS(f"run written to {run_dir.root}"))
