"""
Train FPS and/or ERM on the training split (epochs selected on validation) and
write checkpoints, alignment and manifest to the run directory.
"""

from cli.base import FpsCommand
from cli.config import load_initial_models, load_run_alignment, load_run_config, load_run_dataset
from harness.protocols import run_training
from harness.rundir import RunDirectory


class Command(FpsCommand):
    help = "Train fps and/or erm models and write their checkpoints."

    def add_arguments(self, parser):
        self.add_experiment_arguments(parser)
        self.add_init_argument(parser)

    def run(self, **options):
        cfg = load_run_config(options["config"], self.overrides(options))
        ds = load_run_dataset(cfg)
        result = run_training(ds, cfg.experiment(), load_run_alignment(cfg), load_initial_models(cfg))

        run_dir = RunDirectory(cfg.run_dir("train"))
        run_dir.write_artifacts(result.manifest, cfg.model_dump(mode="json"), result.alignment, result.checkpoints)
        rows = []
        for method, members in result.models.items():
            for model, loss in zip(members, result.losses[method]):
                last = loss.epochs[loss.chosen_epoch - 1] if loss.chosen_epoch else loss.epochs[-1]
                rows.append([method, model.seed, loss.chosen_epoch, len(loss.epochs), last.train_dt, last.train_ts,
                             last.val_ts, model.parameter_count])
        self.write_table(["method", "seed", "chosen_epoch", "epochs", "train_dt", "train_ts", "val_ts", "parameters"], rows)
        if result.alignment is not None:
            self.stdout.write(f"tau: {list(result.alignment.taus)}")
        self.stdout.write(self.style.SUCCESS(f"run written to {run_dir.root}"))
