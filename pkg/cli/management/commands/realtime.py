"""
Real-time protocol: retrain at every scheduled anchor on the data observed so
far and forecast the next H steps.
"""

from cli.base import FpsCommand
from cli.config import load_initial_models, load_run_alignment, load_run_config, load_run_dataset
from harness.protocols import run_realtime
from harness.rundir import RunDirectory

PROTOCOL_FLAGS = {
    "start": "protocol.start",
    "stride": "protocol.stride",
    "retrain_epochs": "protocol.retrain_epochs",
    "validation_fraction": "protocol.validation_fraction",
}


class Command(FpsCommand):
    help = "Run the rolling real-time retraining protocol."

    def add_arguments(self, parser):
        self.add_experiment_arguments(parser)
        self.add_init_argument(parser)
        parser.add_argument("--start", type=int, help="first anchor t0 (default 60%% of T)")
        parser.add_argument("--stride", type=int, help="steps between retrains (default 1)")
        parser.add_argument("--retrain-epochs", type=int, help="epochs per warm retrain; 0 reuses the previous model (default 5)")
        parser.add_argument("--validation-fraction", type=float, help="leading share of steps held for validation (default 0.2)")
        parser.add_argument("--cold-start", action="store_true", help="retrain from a fresh initialization at every step")
        parser.add_argument("--frozen-tau", action="store_true", help="keep the tau estimated at the first step")

    def run(self, **options):
        overrides = {**self.overrides(options), **self.overrides(options, PROTOCOL_FLAGS), "protocol.kind": "realtime"}
        if options["cold_start"]:
            overrides["protocol.warm_start"] = False
        if options["frozen_tau"]:
            overrides["protocol.reestimate_tau"] = False
        cfg = load_run_config(options["config"], overrides)
        ds = load_run_dataset(cfg)
        result = run_realtime(ds, cfg.experiment(), load_run_alignment(cfg), load_initial_models(cfg))
        run_dir = RunDirectory(cfg.run_dir("realtime"))
        run_dir.write(result, cfg.model_dump(mode="json"))
        self.write_aggregates([a for a in result.report.aggregates if a.model == "ensemble"])
        audit = result.report.provenance["access_audit"]
        self.stdout.write(f"access audit: {audit['reads']} reads, {audit['violations']} past the anchor")
        self.stdout.write(self.style.SUCCESS(f"run written to {run_dir.root}"))
