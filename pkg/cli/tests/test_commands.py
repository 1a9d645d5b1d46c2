import io
import tempfile
from pathlib import Path
from unittest import mock

import yaml
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from alignment.search import AlignmentResult, align_all
from alignment.similarity import Metric
from cli.config import RunConfig, apply_overrides, load_run_config, load_run_dataset
from cli.dispatch import dispatch
from fps_lab.errors import ConfigError, MissingFileError
from fps_lab.serialization import read_json, write_json
from series.config import load_dataset_config
from series.loaders import load_csv
from series.windows import split_standard

SMALL_RUN = {
    "synthetic": {"T": 200, "seed": 3},
    "methods": ["fps", "erm"],
    "lookback": 8,
    "horizon": 8,
    "model": {"translator_hidden": 4, "forecaster_hidden": 4, "forecaster_cell": "rnn"},
    "train": {"epochs": 2, "batch_size": 16, "patience": 5},
}


def run(*args, **options):
    out = io.StringIO()
    call_command(*args, stdout=out, stderr=io.StringIO(), **options)
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def write_config(self, name="run.yaml", **updates):
        path = self.root / name
        path.write_text(yaml.safe_dump({**SMALL_RUN, **updates}), encoding="utf-8")
        return path


class RunConfigTests(CommandTestCase):
    def test_apply_overrides_reaches_nested_keys(self):
        merged = apply_overrides({"train": {"epochs": 5}}, {"train.lr": 0.1, "model.cell": "gru", "seed": None})
        self.assertEqual(merged, {"train": {"epochs": 5, "lr": 0.1}, "model": {"cell": "gru"}})

    def test_apply_overrides_refuses_scalar_parent(self):
        with self.assertRaises(ConfigError):
            apply_overrides({"train": 3}, {"train.epochs": 1})

    def test_flags_override_file(self):
        cfg = load_run_config(self.write_config(), {"train.epochs": 7, "seed": 4})
        self.assertEqual(cfg.train.epochs, 7)
        self.assertEqual(cfg.train.batch_size, 16)
        self.assertEqual(cfg.seed, 4)

    def test_invalid_key_is_a_config_error(self):
        with self.assertRaisesMessage(ConfigError, "invalid run config"):
            load_run_config(self.write_config(lookback=0))

    def test_missing_config_file(self):
        with self.assertRaises(MissingFileError):
            load_run_config(self.root / "absent.yaml")

    def test_one_data_source(self):
        with self.assertRaises(ConfigError):
            load_run_config(overrides={"data": "x.csv", "synthetic": {"T": 100}})
        with self.assertRaisesMessage(ConfigError, "no data source"):
            load_run_dataset(RunConfig())

    def test_run_dir_naming(self):
        cfg = load_run_config(self.write_config())
        self.assertEqual(cfg.run_dir("eval").name, f"eval-{cfg.config_hash()}-seed{cfg.seed}")
        explicit = load_run_config(self.write_config(), {"output_dir": str(self.root / "here")})
        self.assertEqual(explicit.run_dir("eval"), self.root / "here")


class SynthAlignTests(CommandTestCase):
    def test_synth_then_align(self):
        out = run("synth", "--T", "600", "--seed", "5", "-o", str(self.root), "--name", "demo")
        self.assertIn("planted_lead=3 expected_tau=5", out)
        csv_path = self.root / "demo.csv"
        for name in ("demo.csv", "demo.meta.json", "demo.yaml"):
            self.assertTrue((self.root / name).is_file(), name)

        target = self.root / "align.json"
        out = run("align", "--data", str(csv_path), "--out", str(target))
        self.assertIn("alignment written to", out)
        written = AlignmentResult.load(target)

        ds = load_csv(csv_path, load_dataset_config(self.root / "demo.yaml"))
        expected = align_all(ds, split_standard(ds)[0], 8)
        self.assertEqual(written.taus, expected.taus)
        self.assertEqual(written.search_range, (0, 360))

    def test_synth_sigma_sets_both_noises(self):
        run("synth", "--T", "300", "--sigma", "0.25", "-o", str(self.root))
        spec = read_json(self.root / "synthetic.meta.json")["spec"]
        self.assertEqual((spec["sigma_x"], spec["sigma_y"]), (0.25, 0.25))

    def test_synth_snr_sets_calibrated_noise(self):
        run("synth", "--T", "300", "--snr", "10", "--linear-response", "-o", str(self.root))
        meta = read_json(self.root / "synthetic.meta.json")
        self.assertEqual(meta["spec"]["snr"], 10.0)
        self.assertIsNone(meta["spec"]["response_scale"])
        self.assertGreater(meta["noise"]["sigma_x"], 0.0)
        self.assertGreater(meta["noise"]["sigma_y"], 0.0)

    def test_synth_rejects_loop_longer_than_horizon(self):
        with self.assertRaises(CommandError) as ctx:
            run("synth", "--d1", "5", "--d2", "5", "-o", str(self.root))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_align_missing_csv(self):
        with self.assertRaises(CommandError) as ctx:
            run("align", "--data", str(self.root / "absent.csv"), "--dataset-config", str(self.root / "absent.yaml"))
        self.assertEqual(ctx.exception.returncode, 3)


class GradcheckCommandTests(SimpleTestCase):
    def test_reports_max_error(self):
        out = run("gradcheck", "--configs", "8", "--seed", "1")
        self.assertIn("max relative error", out)
        self.assertIn("gradient check passed", out)

    def test_impossible_tolerance_fails(self):
        with self.assertRaises(CommandError) as ctx:
            run("gradcheck", "--configs", "2", "--tolerance", "0")
        self.assertEqual(ctx.exception.returncode, 8)


class EvalReportCommandTests(CommandTestCase):
    def test_eval_writes_run_and_replays(self):
        config = self.write_config()
        first, second = self.root / "a", self.root / "b"
        out = run("eval", "--config", str(config), "-o", str(first))
        self.assertIn("run written to", out)
        run("eval", "--config", str(config), "-o", str(second))
        for name in ("config.yaml", "manifest.json", "alignment.json", "records.csv", "summary.json", "plot.csv"):
            self.assertTrue((first / name).is_file(), name)
        self.assertEqual((first / "records.csv").read_bytes(), (second / "records.csv").read_bytes())

        out = run("report", str(first))
        self.assertIn("aggregates match", out)

        summary = read_json(first / "summary.json")
        summary["aggregates"][0]["nmae"] += 1e-12
        write_json(first / "summary.json", summary)
        with self.assertRaises(CommandError) as ctx:
            run("report", str(first))
        self.assertEqual(ctx.exception.returncode, 8)
        self.assertIn("aggregate mismatch", str(ctx.exception))

    def test_report_needs_a_source(self):
        with self.assertRaises(CommandError) as ctx:
            run("report")
        self.assertEqual(ctx.exception.returncode, 2)


class StoredArtifactTests(CommandTestCase):
    def test_train_reuses_alignment_and_realtime_starts_from_checkpoints(self):
        config = self.write_config()
        stored = AlignmentResult(("x",), (3,), (0.9,), (1,), Metric.COSINE, (0, 120), 8)
        stored.save(self.root / "stored" / "alignment.json")
        trained = self.root / "trained"
        run("train", "--config", str(config), "--alignment", str(self.root / "stored"), "-o", str(trained))
        manifest = read_json(trained / "manifest.json")
        self.assertEqual(manifest["tau_source"], "given")
        self.assertEqual(manifest["models"]["fps"][0]["tau"], [3])
        self.assertEqual(AlignmentResult.load(trained).taus, (3,))

        replayed = self.root / "replayed"
        out = run("realtime", "--config", str(config), "--init-checkpoint", str(trained), "--retrain-epochs", "0",
                  "--start", "180", "--stride", "5", "-o", str(replayed))
        self.assertIn("run written to", out)
        realtime = read_json(replayed / "manifest.json")
        self.assertEqual(realtime["models"], manifest["models"])

    def test_missing_init_checkpoint(self):
        with self.assertRaises(CommandError) as ctx:
            run("train", "--config", str(self.write_config()), "--init-checkpoint", str(self.root / "absent"),
                "-o", str(self.root / "out"))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_alignment_for_another_horizon(self):
        stored = AlignmentResult(("x",), (3,), (0.9,), (1,), Metric.COSINE, (0, 120), 4)
        path = stored.save(self.root / "h4.json")
        with self.assertRaises(CommandError) as ctx:
            run("eval", "--config", str(self.write_config()), "--alignment", str(path), "-o", str(self.root / "out"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_init_checkpoint_is_refused_by_eval(self):
        with self.assertRaises(CommandError) as ctx:
            run("eval", "--config", str(self.write_config(init_checkpoint=str(self.root))), "-o", str(self.root / "out"))
        self.assertEqual(ctx.exception.returncode, 2)


class DispatchTests(CommandTestCase):
    def dispatch(self, *argv):
        with mock.patch("sys.stderr", new_callable=io.StringIO) as err, \
                mock.patch("sys.stdout", new_callable=io.StringIO):
            code = dispatch(["fps-lab", *argv])
        return code, err.getvalue()

    def test_unknown_command(self):
        code, err = self.dispatch("forecast-everything")
        self.assertEqual(code, 2)
        self.assertIn("unknown command", err)

    def test_fps_error_exit_code(self):
        code, err = self.dispatch("report", "--records", str(self.root / "r.csv"), "--summary", str(self.root / "s.json"))
        self.assertEqual(code, 3)
        self.assertIn("missing-file", err)

    def test_success(self):
        code, _ = self.dispatch("gradcheck", "--configs", "8", "--seed", "1")
        self.assertEqual(code, 0)
