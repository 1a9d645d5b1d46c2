"""
End-to-end comparisons on the planted feedback loop, five seeds each.
Tagged slow: run with FPS_RUN_SLOW_TESTS=1.
"""

import numpy as np
from django.test import SimpleTestCase, tag

from harness.config import ExperimentConfig, Protocol
from harness.protocols import run_oracle, run_realtime, run_standard
from series.synthetic import SyntheticSpec, generate_synthetic

SEEDS = range(5)


def nmae_of(report, method):
    return report.aggregate_for(method).nmae


@tag("slow")
class StandardComparisonTests(SimpleTestCase):
    def test_fps_beats_erm_at_snr_10(self):
        reductions = []
        for seed in SEEDS:
            ds = generate_synthetic(SyntheticSpec(T=2000, snr=10.0, seed=seed))
            report = run_standard(ds, ExperimentConfig(seed=seed)).report
            fps, erm = nmae_of(report, "fps"), nmae_of(report, "erm")
            reductions.append((erm - fps) / erm)
        wins = sum(r > 0 for r in reductions)
        self.assertGreaterEqual(wins, 4, f"relative NMAE reductions {np.round(reductions, 3).tolist()}")
        self.assertGreaterEqual(float(np.median(reductions)), 0.10)


@tag("slow")
class OracleComparisonTests(SimpleTestCase):
    def test_noiseless_ordering(self):
        scores = {"oracle": [], "fps": [], "erm": []}
        for seed in SEEDS:
            ds = generate_synthetic(SyntheticSpec(T=2000, sigma_x=0.0, sigma_y=0.0, seed=seed))
            report = run_oracle(ds, ExperimentConfig(seed=seed)).report
            for method in scores:
                scores[method].append(nmae_of(report, method))
        mean = {method: float(np.mean(values)) for method, values in scores.items()}
        self.assertLess(mean["oracle"], mean["fps"], mean)
        self.assertLess(mean["fps"], mean["erm"], mean)
        self.assertLessEqual(mean["oracle"], 0.7 * mean["erm"], mean)


@tag("slow")
class TrendCaptureTests(SimpleTestCase):
    def test_fps_tracks_a_coupling_flip(self):
        flip = 700
        wins = 0
        for seed in SEEDS:
            ds = generate_synthetic(SyntheticSpec(T=1000, snr=10.0, flip_at=flip, seed=seed))
            cfg = ExperimentConfig(
                seed=seed,
                protocol=Protocol(kind="realtime", start=600, stride=8, retrain_epochs=5),
            )
            report = run_realtime(ds, cfg).report
            fps = report.mean_pc("fps", since=flip).mean
            erm = report.mean_pc("erm", since=flip).mean
            wins += fps > erm
        self.assertGreaterEqual(wins, 4)
