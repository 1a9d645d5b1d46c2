"""
Standard protocol: tune on train -> validation, retrain on train+validation,
score the test range.
"""

from cli.base import FpsCommand
from cli.config import load_run_alignment, load_run_config, load_run_dataset
from fps_lab.errors import ConfigError
from harness.protocols import run_standard
from harness.rundir import RunDirectory


class Command(FpsCommand):
    help = "Run the standard 60/20/20 evaluation and write the run directory."

    def add_arguments(self, parser):
        self.add_experiment_arguments(parser)

    def run(self, **options):
        cfg = load_run_config(options["config"], self.overrides(options))
        if cfg.init_checkpoint is not None:
            raise ConfigError("init_checkpoint applies to train and realtime runs only")
        ds = load_run_dataset(cfg)
        result = run_standard(ds, cfg.experiment(), load_run_alignment(cfg))
        run_dir = RunDirectory(cfg.run_dir("eval"))
        run_dir.write(result, cfg.model_dump(mode="json"))
        self.write_aggregates([a for a in result.report.aggregates if a.model == "ensemble"])
        for warning in result.report.warnings:
            self.stdout.write(self.style.WARNING(f"warning: {warning}"))
        self.stdout.write(self.style.SUCCESS(f"run written to {run_dir.root}"))
