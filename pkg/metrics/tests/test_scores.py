import numpy as np
from django.test import SimpleTestCase

from fps_lab.errors import ConstantSequenceError, EvaluationError, UndefinedMetricError
from metrics.scores import mean_pc, nmae, nrmse, pc


class ErrorMetricTests(SimpleTestCase):
    def test_perfect_forecast(self):
        y = np.array([[1.0, -2.0], [3.0, 4.0]])
        self.assertEqual(nmae(y, y), 0.0)
        self.assertEqual(nrmse(y, y), 0.0)

    def test_hand_computed(self):
        self.assertEqual(nmae([[2.0, 2.0]], [[1.0, 3.0]]), 0.5)
        self.assertEqual(nrmse([[2.0, 2.0]], [[1.0, 3.0]]), 0.5)

    def test_zero_predictor(self):
        y = np.array([[1.0, -3.0, 2.0]])
        self.assertEqual(nmae(y, np.zeros_like(y)), 1.0)

    def test_constant_offset(self):
        y = np.array([[1.0, -3.0], [2.0, 6.0]])
        self.assertAlmostEqual(nrmse(y, y + 0.5), 0.5 / 3.0, places=14)

    def test_linear_in_error_size(self):
        rng = np.random.default_rng(0)
        y = rng.normal(size=(5, 4)) + 3.0
        e = rng.normal(size=(5, 4))
        for metric in (nmae, nrmse):
            self.assertAlmostEqual(metric(y, y + 3.0 * e), 3.0 * metric(y, y + e), places=12)

    def test_all_zero_target(self):
        for metric in (nmae, nrmse):
            with self.assertRaisesMessage(UndefinedMetricError, "undefined normalization"):
                metric(np.zeros((2, 3)), np.ones((2, 3)))

    def test_shape_mismatch(self):
        with self.assertRaises(EvaluationError):
            nmae(np.ones((2, 3)), np.ones((3, 2)))


class PearsonTests(SimpleTestCase):
    def test_affine_forecast(self):
        y = np.array([1.0, 4.0, 2.0, 8.0])
        self.assertAlmostEqual(pc(y, 2.0 * y + 3.0), 1.0, places=12)
        self.assertAlmostEqual(pc(y, -y), -1.0, places=12)

    def test_hand_computed(self):
        self.assertAlmostEqual(pc([1, 2, 3, 4], [1, 3, 2, 4]), 0.8, places=12)

    def test_positive_affine_invariance(self):
        rng = np.random.default_rng(1)
        y, p = rng.normal(size=(2, 8))
        self.assertAlmostEqual(pc(y, 4.5 * p - 2.0), pc(y, p), delta=1e-12)

    def test_constant_sequence(self):
        with self.assertRaisesMessage(ConstantSequenceError, "constant sequence"):
            pc([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_needs_two_steps(self):
        with self.assertRaises(EvaluationError):
            pc([1.0], [2.0])


class MeanPcTests(SimpleTestCase):
    def test_constant_rows_are_counted_not_averaged(self):
        y = np.array([[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0], [2.0, 2.0, 2.0, 2.0]])
        p = np.array([[1.0, 3.0, 2.0, 4.0], [4.0, 3.0, 2.0, 1.0], [1.0, 2.0, 3.0, 4.0]])
        with self.assertLogs("metrics.scores", "WARNING"):
            summary = mean_pc(y, p)
        self.assertAlmostEqual(summary.mean, (0.8 - 1.0) / 2, places=12)
        self.assertEqual((summary.included, summary.excluded), (2, 1))

    def test_single_step_horizon_has_no_pc(self):
        summary = mean_pc(np.ones((3, 1)), np.ones((3, 1)))
        self.assertIsNone(summary.mean)
        self.assertEqual(summary.excluded, 3)
