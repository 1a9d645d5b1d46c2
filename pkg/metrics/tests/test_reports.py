import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from fps_lab.errors import EvaluationError, InvariantError, MissingFileError
from fps_lab.serialization import read_json, write_json
from metrics.reports import EvalReport, read_records, verify_summary
from metrics.scores import nmae


def filled_report():
    rng = np.random.default_rng(0)
    report = EvalReport("standard", provenance={"seed": 0})
    anchors = list(range(10, 30))
    y = rng.normal(3.0, 1.0, (20, 4)) * np.pi
    for method in ("fps", "erm"):
        for seed in (0, 1):
            report.add_forecasts(method, f"seed-{seed}", seed, anchors, y, y + rng.normal(size=y.shape) / 7.0)
        report.add_forecasts(method, "ensemble", 0, anchors, y, y + rng.normal(size=y.shape) / 11.0)
    report.add_forecasts("fps", "ensemble", 0, [5, 6], y[:2], y[:2], phase="validation")
    return report, y


class EvalReportTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def test_records_layout(self):
        report, _ = filled_report()
        frame = report.records()
        self.assertEqual(len(frame), 6 * 20 * 4 + 2 * 4)
        first = frame.iloc[0]
        self.assertEqual((first.method, first.model, first.sequence, first.t, first.h), ("fps", "seed-0", 0, 10, 1))

    def test_aggregates_per_method_model_phase(self):
        report, y = filled_report()
        keys = [(a.method, a.model, a.phase) for a in report.aggregates]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(keys), 7)
        validation = report.aggregate_for("fps", "ensemble", "validation")
        self.assertEqual(validation.nmae, 0.0)
        self.assertEqual(validation.n_sequences, 2)
        test = report.aggregate_for("fps")
        self.assertEqual(test.horizon, 4)
        with self.assertRaises(EvaluationError):
            report.aggregate_for("oracle")

    def test_sequences_continue_across_calls(self):
        report = EvalReport("realtime")
        report.add_forecasts("fps", "ensemble", 0, [7], [[1.0, 2.0]], [[1.0, 2.5]])
        report.add_forecasts("fps", "ensemble", 0, [9], [[2.0, 1.0]], [[2.0, 1.5]])
        self.assertEqual(report.anchors("fps"), (7, 9))
        self.assertEqual(report.aggregate_for("fps").n_sequences, 2)
        self.assertAlmostEqual(report.aggregate_for("fps").nmae, nmae([[1, 2], [2, 1]], [[1, 2.5], [2, 1.5]]))

    def test_mean_pc_since(self):
        report = EvalReport("realtime")
        report.add_forecasts("fps", "ensemble", 0, [1, 2], [[1, 2, 3, 4], [1, 2, 3, 4]], [[1, 3, 2, 4], [4, 3, 2, 1]])
        self.assertAlmostEqual(report.mean_pc("fps", since=2).mean, -1.0, places=12)
        self.assertAlmostEqual(report.mean_pc("fps").mean, -0.1, places=12)
        with self.assertRaises(EvaluationError):
            report.mean_pc("fps", since=3)

    def test_mismatched_shapes(self):
        with self.assertRaises(EvaluationError):
            EvalReport("standard").add_forecasts("fps", "ensemble", 0, [1, 2], np.ones((2, 3)), np.ones((2, 2)))

    def test_saved_aggregates_recompute_exactly(self):
        report, _ = filled_report()
        records, summary = report.save(self.root)
        recomputed = verify_summary(records, summary)
        self.assertEqual(recomputed, report.aggregates)
        frame = read_records(records)
        np.testing.assert_array_equal(frame.y_pred.to_numpy(), report.records().y_pred.to_numpy())
        stored = read_json(summary)
        self.assertEqual(stored["protocol"], "standard")
        self.assertIn("pc_aggregate", stored["notes"])

    def test_tampered_summary_is_caught(self):
        report, _ = filled_report()
        records, summary = report.save(self.root)
        data = read_json(summary)
        data["aggregates"][0]["nmae"] += 1e-12
        write_json(summary, data)
        with self.assertRaisesMessage(InvariantError, "aggregate mismatch"):
            verify_summary(records, summary)

    def test_tampered_records_are_caught(self):
        report, _ = filled_report()
        records, summary = report.save(self.root)
        lines = records.read_text(encoding="utf-8").splitlines()
        cells = lines[1].split(",")
        cells[-1] = "%.17g" % (float(cells[-1]) + 0.25)
        lines[1] = ",".join(cells)
        records.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with self.assertRaises(InvariantError):
            verify_summary(records, summary)

    def test_missing_files(self):
        with self.assertRaises(MissingFileError):
            read_records(self.root / "records.csv")
        report, _ = filled_report()
        records, _ = report.save(self.root)
        with self.assertRaises(MissingFileError):
            verify_summary(records, self.root / "nope.json")
