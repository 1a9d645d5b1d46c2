import numpy as np
from django.test import SimpleTestCase

from fps_lab.errors import DivergedError
from seqmodel.optim import OptimState, clip_global_norm, step, step_groups
from seqmodel.params import Architecture, Gradients, Kind, ParamSet

ARCH = Architecture(Kind.FORECASTER, 1, 1, 1, 1)


def filled(value):
    return {name: np.full(shape, value) for name, shape in ARCH.shapes().items()}


class StepTests(SimpleTestCase):
    def test_sgd_arithmetic(self):
        params = ParamSet(ARCH, filled(1.0))
        updated = step(params, Gradients(filled(0.5)), OptimState(kind="sgd", learning_rate=0.1, clip=None))
        for name in updated:
            np.testing.assert_allclose(updated[name], 0.95, rtol=1e-15)

    def test_clipping_scales_to_threshold(self):
        grads = {name: np.zeros(shape) for name, shape in ARCH.shapes().items()}
        grads["cell.W_x"] = np.array([[2.0]])
        clipped = clip_global_norm({"g": Gradients(grads)}, 1.0)
        self.assertAlmostEqual(clipped["g"].global_norm(), 1.0, places=15)
        opt = OptimState(kind="sgd", learning_rate=1.0, clip=1.0)
        updated = step(ParamSet(ARCH, filled(0.0)), Gradients(grads), opt)
        self.assertAlmostEqual(opt.last_norm, 1.0, places=15)
        self.assertAlmostEqual(float(updated["cell.W_x"][0, 0]), -1.0, places=15)

    def test_small_gradients_are_not_clipped(self):
        grads = Gradients(filled(0.1))
        self.assertIs(clip_global_norm({"g": grads}, 10.0)["g"], grads)

    def test_adam_first_step_moves_by_learning_rate(self):
        params = ParamSet(ARCH, filled(1.0))
        opt = OptimState(kind="adam", learning_rate=0.01, clip=None)
        updated = step(params, Gradients(filled(1.0)), opt)
        for name in updated:
            self.assertAlmostEqual(float(updated[name].reshape(-1)[0]), 0.99, places=9)
        self.assertEqual(opt.step_count, 1)

    def test_adam_moments_are_kept_per_group(self):
        groups = {"f": ParamSet(ARCH, filled(1.0)), "g": ParamSet(ARCH, filled(1.0))}
        grads = {"f": Gradients(filled(1.0)), "g": Gradients(filled(-1.0))}
        opt = OptimState(kind="adam", learning_rate=0.01, clip=None)
        updated = step_groups(groups, grads, opt)
        self.assertIn("f/out.W", opt.m)
        self.assertIn("g/out.W", opt.m)
        self.assertAlmostEqual(float(updated["g"]["out.b"][0]), 1.01, places=9)

    def test_non_finite_gradient_diverges(self):
        grads = filled(0.0)
        grads["out.b"] = np.array([np.nan])
        with self.assertRaisesMessage(DivergedError, "diverged"):
            step(ParamSet(ARCH, filled(1.0)), Gradients(grads), OptimState(clip=1.0))

    def test_input_params_are_untouched(self):
        params = ParamSet(ARCH, filled(1.0))
        step(params, Gradients(filled(0.5)), OptimState(kind="sgd", learning_rate=0.1))
        np.testing.assert_array_equal(params["out.W"], [[1.0]])
