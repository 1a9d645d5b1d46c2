import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from fps_lab.errors import DataError
from series.config import load_dataset_config
from series.loaders import load_csv
from series.synthetic import (
    SyntheticSpec,
    calibrate_noise,
    generate_synthetic,
    intervention_process,
    read_metadata,
    simulate,
    write_synthetic,
)


def reference_simulation(T, d1, d2, a, b, c, g, amplitude, period, kappa):
    """Noiseless recursion without the intervention cycle, written out directly, no burn-in."""
    x = [0.0] * T
    y = [0.0] * T
    for t in range(T - 1):
        x[t + 1] = c * x[t] - g * (y[t - d1] if t >= d1 else 0.0) + amplitude * np.sin(2 * np.pi * t / period)
        y[t + 1] = a * y[t] + b * kappa * np.tanh((x[t + 1 - d2] if t + 1 >= d2 else 0.0) / kappa)
    return np.array(x), np.array(y)


class SimulateTests(SimpleTestCase):
    def test_deterministic_per_seed(self):
        spec = SyntheticSpec(T=300, seed=4)
        x1, y1 = simulate(spec)
        x2, y2 = simulate(spec)
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_array_equal(y1, y2)
        x3, _ = simulate(spec.model_copy(update={"seed": 5}))
        self.assertFalse(np.array_equal(x1, x3))

    def test_matches_direct_recursion_without_noise(self):
        spec = SyntheticSpec(T=120, sigma_x=0.0, sigma_y=0.0, burn_in=0, lag_response=1, lag_effect=2, horizon=4,
                             intervention_amplitude=0.0, forcing_amplitude=1.5, response_scale=0.5)
        x, y = simulate(spec)
        rx, ry = reference_simulation(120, 1, 2, spec.a, spec.b, spec.c, spec.g, spec.forcing_amplitude, spec.forcing_period, 0.5)
        np.testing.assert_allclose(x, rx, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(y, ry, rtol=1e-12, atol=1e-12)

    def test_target_ignores_feature_noise_when_uncoupled(self):
        base = SyntheticSpec(T=200, g=0.0, b=0.0, sigma_x=0.1, seed=9)
        _, y1 = simulate(base)
        x2, y2 = simulate(base.model_copy(update={"sigma_x": 0.5}))
        np.testing.assert_array_equal(y1, y2)
        self.assertFalse(np.array_equal(simulate(base)[0], x2))

    def test_flip_changes_sign_of_effect(self):
        spec = SyntheticSpec(T=200, g=0.0, sigma_x=0.0, sigma_y=0.0, a=0.0, burn_in=0)
        _, y = simulate(spec)
        x, y_flip = simulate(spec.model_copy(update={"flip_at": 100}))
        np.testing.assert_allclose(y_flip[:100], y[:100])
        np.testing.assert_allclose(y_flip[100:], -y[100:])

    def test_planted_lag_is_the_strongest_correlation(self):
        x, y = simulate(SyntheticSpec(T=2000, sigma_x=0.0, sigma_y=0.0))
        scores = [np.corrcoef(y[16:], x[16 - k: len(x) - k])[0, 1] for k in range(9)]
        self.assertEqual(int(np.argmax(scores)), 3)

    def test_saturating_response_is_bounded(self):
        _, y = simulate(SyntheticSpec(T=500, a=0.0, g=0.0, sigma_y=0.0, response_scale=0.5, intervention_amplitude=3.0))
        self.assertLessEqual(np.abs(y).max(), 0.5)
        _, linear = simulate(SyntheticSpec(T=500, a=0.0, g=0.0, sigma_y=0.0, response_scale=None, intervention_amplitude=3.0))
        self.assertGreater(np.abs(linear).max(), 0.5)

    def test_unstable_parameters_are_rejected(self):
        with self.assertRaisesMessage(DataError, "unstable spec"):
            simulate(SyntheticSpec(T=2000, a=1.5, b=0.0, g=0.0))

    def test_loop_must_fit_the_horizon(self):
        with self.assertRaises(ValueError):
            SyntheticSpec(lag_response=4, lag_effect=5, horizon=8)


class GenerateTests(SimpleTestCase):
    def test_dataset_metadata(self):
        ds = generate_synthetic(SyntheticSpec(T=100))
        self.assertEqual((ds.T, ds.D, ds.P), (100, 1, 1))
        self.assertEqual(ds.metadata["planted_lead"], 3)
        self.assertEqual(ds.metadata["expected_tau"], 5)

    def test_written_files_reload(self):
        spec = SyntheticSpec(T=150, seed=2)
        ds = generate_synthetic(spec)
        with tempfile.TemporaryDirectory() as tmp:
            paths = write_synthetic(ds, spec, Path(tmp), name="loop", lookback=12)
            config = load_dataset_config(paths["config"])
            again = load_csv(paths["csv"], config)
            meta = read_metadata(paths["csv"])
        self.assertEqual(config.lookback, 12)
        np.testing.assert_allclose(again.target, ds.target, rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(again.features, ds.features, rtol=1e-14, atol=1e-14)
        self.assertEqual(meta["expected_tau"], 5)


class InterventionTests(SimpleTestCase):
    def test_noiseless_series_still_vary_by_seed(self):
        spec = SyntheticSpec(T=300, sigma_x=0.0, sigma_y=0.0)
        x1, _ = simulate(spec)
        x2, _ = simulate(spec.model_copy(update={"seed": 1}))
        self.assertGreater(np.std(x1), 0.5)
        self.assertFalse(np.allclose(x1, x2))

    def test_drawn_apart_from_the_noise(self):
        quiet = intervention_process(SyntheticSpec(seed=3, sigma_x=0.0, sigma_y=0.0), 400)
        noisy = intervention_process(SyntheticSpec(seed=3, sigma_x=0.5, sigma_y=0.5), 400)
        np.testing.assert_array_equal(quiet, noisy)

    def test_stationary_cycle(self):
        u = intervention_process(SyntheticSpec(seed=0, intervention_amplitude=2.0), 50000)[1000:]
        self.assertAlmostEqual(float(np.std(u)), 2.0, delta=0.15)
        centred = u - u.mean()

        def autocorrelation(k):
            return float(centred[k:] @ centred[:-k] / (centred @ centred))

        # period 8: half a cycle apart the cycle is anti-correlated, a full cycle apart correlated again
        self.assertLess(autocorrelation(4), -0.5)
        self.assertGreater(autocorrelation(8), 0.3)

    def test_switched_off(self):
        np.testing.assert_array_equal(intervention_process(SyntheticSpec(intervention_amplitude=0.0), 50), np.zeros(50))


class SignalToNoiseTests(SimpleTestCase):
    def test_noise_is_calibrated_from_the_noiseless_run(self):
        spec = SyntheticSpec(T=1000, seed=2, snr=10.0)
        clean_x, clean_y = simulate(spec.model_copy(update={"snr": None, "sigma_x": 0.0, "sigma_y": 0.0}))
        effective = calibrate_noise(spec)
        self.assertIsNone(effective.snr)
        self.assertAlmostEqual(effective.sigma_x, np.std(clean_x) / np.sqrt(10.0), places=12)
        self.assertAlmostEqual(effective.sigma_y, np.std(clean_y) / np.sqrt(10.0), places=12)

        x, y = simulate(spec)
        ex, ey = simulate(effective)
        np.testing.assert_array_equal(x, ex)
        np.testing.assert_array_equal(y, ey)

    def test_effective_noise_is_recorded(self):
        spec = SyntheticSpec(T=400, seed=1, snr=4.0)
        ds = generate_synthetic(spec)
        effective = calibrate_noise(spec)
        self.assertEqual(ds.metadata["noise"], {"sigma_x": effective.sigma_x, "sigma_y": effective.sigma_y})
        self.assertEqual(ds.metadata["synthetic"]["snr"], 4.0)

    def test_specs_without_snr_pass_through(self):
        spec = SyntheticSpec(T=100, sigma_x=0.3)
        self.assertIs(calibrate_noise(spec), spec)
