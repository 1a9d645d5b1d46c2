import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from alignment.search import AlignmentResult, align_all, align_feature
from alignment.similarity import Metric
from fps_lab.errors import AlignmentError
from series.datasets import Dataset


def lagged_pair(lead, T=400, sign=1.0, seed=0):
    """x white noise and y_t = sign·x_{t-lead}."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=T)
    y = np.empty(T)
    y[lead:] = sign * x[: T - lead]
    y[:lead] = rng.normal(size=lead)
    return x, y


def dataset(y, *columns):
    return Dataset(
        target=y,
        features=np.column_stack(columns),
        feature_names=tuple(f"x{i}" for i in range(len(columns))),
        performative_mask=(True,) * len(columns),
        time_index=tuple(range(len(y))),
    )


class AlignFeatureTests(SimpleTestCase):
    def test_shifted_copy(self):
        x, y = lagged_pair(3)
        found = align_feature(x, y, 8)
        self.assertEqual(found.tau, 5)
        self.assertAlmostEqual(found.score, 1.0, places=10)
        self.assertEqual(len(found.profile), 9)
        self.assertEqual(found.warnings, ())

    def test_negated_shifted_copy(self):
        x, y = lagged_pair(3, sign=-1.0)
        found = align_feature(x, y, 8)
        self.assertEqual(found.tau, 5)
        self.assertAlmostEqual(found.score, -1.0, places=10)
        self.assertEqual(found.sign, -1)

    def test_every_lead_maps_to_its_delay(self):
        for lead in range(9):
            x, y = lagged_pair(lead, seed=lead)
            self.assertEqual(align_feature(x, y, 8).tau, 8 - lead)

    def test_brute_force_scan_agrees(self):
        x, y = lagged_pair(2, T=300, seed=11)
        y = y + np.random.default_rng(12).normal(scale=0.5, size=y.size)
        H, T = 6, y.size
        scores = [np.corrcoef(x[i: T - H + i], y[H:])[0, 1] for i in range(H + 1)]
        found = align_feature(x, y, H)
        self.assertEqual(found.tau, int(np.argmax(np.abs(scores))))
        np.testing.assert_allclose(found.profile, scores, atol=1e-12)

    def test_scale_invariance(self):
        x, y = lagged_pair(4, seed=3)
        base = align_feature(x, y, 8)
        moved = align_feature(5.0 * x - 2.0, 0.1 * y + 9.0, 8)
        self.assertEqual(moved.tau, base.tau)
        self.assertAlmostEqual(moved.score, base.score, places=10)

    def test_independent_noise_is_weak(self):
        rng = np.random.default_rng(7)
        with self.assertLogs("alignment.search", "WARNING"):
            found = align_feature(rng.normal(size=10000), rng.normal(size=10000), 8)
        self.assertIn("weak performativity signal", found.warnings)

    def test_constant_feature_falls_back_to_zero(self):
        _, y = lagged_pair(3)
        with self.assertLogs("alignment.search", "WARNING"):
            found = align_feature(np.full(y.size, 2.0), y, 8)
        self.assertEqual(found.tau, 0)
        self.assertTrue(found.warnings[0].startswith("degenerate window"))

    def test_ties_go_to_the_smallest_shift(self):
        # period-2 feature: every even shift scores +1 and every odd shift -1
        x = np.tile([1.0, -1.0], 20)
        found = align_feature(x, x.copy(), 4)
        self.assertEqual(found.tau, 0)

    def test_series_too_short(self):
        with self.assertRaises(AlignmentError):
            align_feature(np.arange(10.0), np.arange(10.0), 8)

    def test_neg_euclidean_metric(self):
        x, y = lagged_pair(3, sign=-1.0)
        found = align_feature(x, y, 8, Metric.NEG_EUCLIDEAN)
        self.assertEqual(found.tau, 5)
        self.assertEqual(found.sign, -1)
        self.assertAlmostEqual(found.score, 0.0, places=10)


class AlignAllTests(SimpleTestCase):
    def test_features_are_aligned_independently(self):
        x, y = lagged_pair(3, seed=5)
        ds = dataset(y, x, -y)
        result = align_all(ds, None, 8)
        self.assertEqual(result.taus, (5, 8))
        self.assertEqual(result.signs, (1, -1))
        self.assertEqual(result.search_range, (0, ds.T))

    def test_pearson_and_cosine_pick_the_same_delay(self):
        rng = np.random.default_rng(8)
        for seed in range(20):
            x, y = lagged_pair(int(rng.integers(0, 9)), T=120, seed=seed)
            y = y + rng.normal(scale=1.0, size=y.size)
            ds = dataset(y, x)
            cos = align_all(ds, None, 8, Metric.COSINE)
            pearson = align_all(ds, None, 8, Metric.PEARSON)
            self.assertEqual(cos.taus, pearson.taus)

    def test_only_the_given_range_is_searched(self):
        x, y = lagged_pair(3, T=400, seed=6)
        x[200:] = np.random.default_rng(60).normal(size=200)
        result = align_all(dataset(y, x), (0, 200), 8)
        self.assertEqual(result.taus, (5,))
        self.assertEqual(result.search_range, (0, 200))

    def test_needs_a_performative_feature(self):
        ds = Dataset(np.arange(30.0), np.ones((30, 1)), ("k",), (False,), tuple(range(30)))
        with self.assertRaises(AlignmentError):
            align_all(ds, None, 8)

    def test_saved_result_reloads(self):
        x, y = lagged_pair(2, seed=9)
        result = align_all(dataset(y, x), None, 8)
        with tempfile.TemporaryDirectory() as tmp:
            again = AlignmentResult.load(result.save(Path(tmp) / "alignment.json"))
        self.assertEqual(again.taus, result.taus)
        self.assertEqual(again.scores, result.scores)
        self.assertEqual(again.metric, Metric.COSINE)
        self.assertEqual(again.as_dict()["convention"], result.as_dict()["convention"])


class RecoveryTests(SimpleTestCase):
    def test_noiseless_recovery_over_seeds(self):
        for seed in range(20):
            x, y = lagged_pair(3, seed=seed)
            self.assertEqual(align_feature(x, y, 8).tau, 5, f"seed {seed}")

    def test_recovery_at_snr_ten(self):
        hits = 0
        for seed in range(20):
            x, y = lagged_pair(3, seed=seed)
            noise = np.random.default_rng(100 + seed).normal(scale=np.sqrt(0.1), size=y.size)
            hits += align_feature(x, y + noise, 8).tau in (4, 5, 6)
        self.assertGreaterEqual(hits, 18)

    def test_delaying_the_feature_raises_tau(self):
        x, y = lagged_pair(3)
        for k in (1, 2):
            delayed = np.concatenate([np.full(k, x[0]), x[: x.size - k]])
            self.assertEqual(align_feature(delayed, y, 8).tau, 5 + k, f"k={k}")

    def test_advancing_the_feature_lowers_tau(self):
        x, y = lagged_pair(3)
        for k in range(1, 5):
            advanced = np.concatenate([x[k:], np.full(k, x[-1])])
            self.assertEqual(align_feature(advanced, y, 8).tau, 5 - k, f"k={k}")

    def test_weak_signal_warning_rate(self):
        warned = 0
        with self.assertLogs("alignment.search", "WARNING"):
            for seed in range(100):
                rng = np.random.default_rng(1000 + seed)
                warned += "weak performativity signal" in align_feature(rng.normal(size=10000), rng.normal(size=10000), 8).warnings
        self.assertEqual(warned, 100)

    def test_planted_lead_never_warns(self):
        for seed in range(100):
            x, y = lagged_pair(3, seed=seed)
            noise = np.random.default_rng(500 + seed).normal(scale=np.sqrt(0.1), size=y.size)
            self.assertEqual(align_feature(x, y + noise, 8).warnings, (), f"seed {seed}")
