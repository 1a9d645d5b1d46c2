"""
Align every performative feature with the target and write alignment.json.
"""

from pathlib import Path

from cli.base import FpsCommand
from cli.config import load_run_config, load_run_dataset
from alignment.search import WINDOW_CONVENTION, align_all
from series.windows import split_standard


class Command(FpsCommand):
    help = "Estimate the delay tau of each performative feature on the training range."

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        parser.add_argument("--data", help="input CSV (config key: data)")
        parser.add_argument("--dataset-config", help="dataset YAML; defaults to the CSV path with a .yaml suffix")
        parser.add_argument("--horizon", type=int, help="horizon H bounding the search 0..H (default 8)")
        parser.add_argument("--lookback", type=int, help="lookback L used for the length check (default 16)")
        parser.add_argument("--metric", choices=["cosine", "pearson", "neg-euclidean"], help="similarity (default cosine)")
        parser.add_argument("--full-range", action="store_true", help="align on the whole series instead of the training split")
        parser.add_argument("--out", help="alignment file (default <run dir>/alignment.json)")
        parser.add_argument("-o", "--output-dir", help="run directory (default FPS_RUNS_DIR/align-<hash>-seed<seed>)")

    def run(self, **options):
        cfg = load_run_config(options["config"], self.overrides(options, {
            "data": "data",
            "dataset_config": "dataset_config",
            "horizon": "horizon",
            "lookback": "lookback",
            "metric": "metric",
            "output_dir": "output_dir",
        }))
        ds = load_run_dataset(cfg)
        train_range = (0, ds.T) if options["full_range"] else split_standard(ds, cfg.split_ratios)[0]
        result = align_all(ds, train_range, cfg.horizon, cfg.metric)

        self.write_table(
            ["feature", "tau", "score", "metric"],
            [[name, tau, score, result.metric.value] for name, tau, score in zip(result.feature_names, result.taus, result.scores)],
        )
        for warning in result.warnings:
            self.stdout.write(self.style.WARNING(f"warning: {warning}"))
        out = Path(options["out"]) if options["out"] else cfg.run_dir("align") / "alignment.json"
        result.save(out)
        self.stdout.write(f"range [{train_range[0]}, {train_range[1]}), {WINDOW_CONVENTION}")
        self.stdout.write(self.style.SUCCESS(f"alignment written to {out}"))
