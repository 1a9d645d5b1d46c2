# cli/base.py
"""
Shared machinery for the fps-lab management commands: exit-code help,
FpsError -> CommandError conversion, and the experiment flags that map onto
RunConfig keys.
"""

import argparse
import logging
from typing import Any, Dict, List, Sequence

from django.core.management.base import BaseCommand, CommandError, DjangoHelpFormatter
from pydantic import ValidationError

from fps_lab.errors import EXIT_CODES, ConfigError, FpsError
from metrics.reports import Aggregate

logger = logging.getLogger(__name__)

EXIT_CODE_HELP = "exit codes:\n" + "\n".join(f"  {code}  {slug}" for slug, code in EXIT_CODES.items())


class _HelpFormatter(DjangoHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


# flag dest -> RunConfig dotted key
EXPERIMENT_FLAGS = {
    "data": "data",
    "dataset_config": "dataset_config",
    "methods": "methods",
    "lookback": "lookback",
    "horizon": "horizon",
    "metric": "metric",
    "seed": "seed",
    "ensemble_size": "ensemble_size",
    "output_dir": "output_dir",
    "alignment": "alignment",
    "init_checkpoint": "init_checkpoint",
    "epochs": "train.epochs",
    "learning_rate": "train.learning_rate",
    "batch_size": "train.batch_size",
    "optimizer": "train.optimizer",
    "clip": "train.clip",
    "lambda1": "train.lambda1",
    "lambda2": "train.lambda2",
    "patience": "train.patience",
    "schedule": "train.schedule",
    "pretrain_epochs": "train.pretrain_epochs",
    "translator_hidden": "model.translator_hidden",
    "forecaster_hidden": "model.forecaster_hidden",
    "cell": "model.forecaster_cell",
}


class FpsCommand(BaseCommand):
    """Base for every command; subclasses implement run(**options)."""

    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.formatter_class = _HelpFormatter
        parser.epilog = EXIT_CODE_HELP
        return parser

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except ValidationError as exc:
            err = ConfigError(f"invalid configuration: {exc.errors()[0]['msg']}")
            raise CommandError(err.one_line(), returncode=err.exit_code) from exc
        except FpsError as err:
            logger.debug("command failed", exc_info=True)
            raise CommandError(err.one_line(), returncode=err.exit_code) from err

    def run(self, **options):
        raise NotImplementedError

    # ------------------------------------------------------------------
    # shared flags
    # ------------------------------------------------------------------
    def add_config_argument(self, parser):
        parser.add_argument("--config", help="YAML run configuration; flags override its keys")

    def add_experiment_arguments(self, parser, methods: bool = True):
        self.add_config_argument(parser)
        parser.add_argument("--data", help="input CSV (config key: data)")
        parser.add_argument("--dataset-config", help="dataset YAML; defaults to the CSV path with a .yaml suffix")
        if methods:
            parser.add_argument("--methods", nargs="+", choices=["fps", "erm"], help="methods to run (default: fps erm)")
        parser.add_argument("--lookback", type=int, help="lookback length L (default 16)")
        parser.add_argument("--horizon", type=int, help="horizon length H (default 8)")
        parser.add_argument("--metric", choices=["cosine", "pearson", "neg-euclidean"], help="alignment similarity (default cosine)")
        parser.add_argument("--seed", type=int, help="base seed; ensembles use seed, seed+1, ...")
        parser.add_argument("--ensemble-size", type=int, help="number of seed members (default 1)")
        parser.add_argument("-o", "--output-dir", help="run directory (default FPS_RUNS_DIR/<command>-<hash>-seed<seed>)")
        parser.add_argument("--alignment", help="alignment.json (or a run directory holding one) whose tau is reused instead of estimated")
        parser.add_argument("--epochs", type=int, help="training epochs E (default 60)")
        parser.add_argument("--learning-rate", "--lr", dest="learning_rate", type=float, help="learning rate (default 5e-3)")
        parser.add_argument("--batch-size", type=int, help="minibatch size (default 32)")
        parser.add_argument("--optimizer", choices=["adam", "sgd"], help="optimizer (default adam)")
        parser.add_argument("--clip", type=float, help="global-norm gradient clip, 0 disables (default 5.0)")
        parser.add_argument("--lambda1", type=float, help="weight of the delay-translation loss (default 1.0)")
        parser.add_argument("--lambda2", type=float, help="weight of the forecasting loss (default 1.0)")
        parser.add_argument("--patience", type=int, help="early-stop patience in epochs (default 10)")
        parser.add_argument("--schedule", choices=["joint", "two_phase"], help="FPS training schedule (default joint)")
        parser.add_argument("--pretrain-epochs", type=int, help="translation-only epochs of two_phase (default 20)")
        parser.add_argument("--translator-hidden", type=int, help="hidden size of the translation network (default 16)")
        parser.add_argument("--forecaster-hidden", type=int, help="hidden size of the forecaster (default 16)")
        parser.add_argument("--cell", choices=["gru", "rnn"], help="forecaster cell (default gru)")

    def add_init_argument(self, parser):
        parser.add_argument("--init-checkpoint", help="run directory whose checkpoints initialize training (matched by method and seed)")

    @staticmethod
    def overrides(options: Dict[str, Any], flags: Dict[str, str] = EXPERIMENT_FLAGS) -> Dict[str, Any]:
        return {key: options.get(dest) for dest, key in flags.items() if options.get(dest) is not None}

    # ------------------------------------------------------------------
    # output
    # ------------------------------------------------------------------
    def write_table(self, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
        cells = [[str(h) for h in header]] + [[_cell(v) for v in row] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for row in cells:
            self.stdout.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())

    def write_aggregates(self, aggregates: Sequence[Aggregate]) -> None:
        self.write_table(
            ["method", "model", "phase", "nmae", "nrmse", "pc", "pc_excluded", "sequences"],
            [[a.method, a.model, a.phase, a.nmae, a.nrmse, a.pc, a.pc_excluded, a.n_sequences] for a in aggregates],
        )


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)
