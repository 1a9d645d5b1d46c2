import numpy as np
from django.test import SimpleTestCase

from fps_lab.errors import DataError
from series.datasets import Dataset, check_taus


def make_dataset(T=20, P=1, extra=1):
    rng = np.random.default_rng(0)
    D = P + extra
    return Dataset(
        target=rng.normal(size=T),
        features=rng.normal(size=(T, D)),
        feature_names=tuple(f"f{j}" for j in range(D)),
        performative_mask=tuple([True] * P + [False] * extra),
        time_index=tuple(range(T)),
    )


class DatasetTests(SimpleTestCase):
    def test_shape_properties(self):
        ds = make_dataset(T=20, P=2, extra=1)
        self.assertEqual((ds.T, ds.D, ds.P), (20, 3, 2))
        self.assertEqual(ds.performative_names, ("f0", "f1"))
        self.assertEqual(ds.nonperformative_names, ("f2",))
        self.assertEqual(ds.columns(), ("y", "f0", "f1", "f2"))

    def test_arrays_are_read_only(self):
        ds = make_dataset()
        with self.assertRaises(ValueError):
            ds.target[0] = 1.0

    def test_missing_value_names_row_and_column(self):
        features = np.ones((5, 1))
        features[3, 0] = np.nan
        with self.assertRaisesMessage(DataError, "missing value at row 3, column x"):
            Dataset(np.arange(5.0), features, ("x",), (True,), tuple(range(5)))

    def test_time_index_must_increase(self):
        with self.assertRaisesMessage(DataError, "not strictly increasing"):
            Dataset(np.arange(3.0), np.ones((3, 1)), ("x",), (True,), (0, 2, 2))

    def test_performative_columns_come_first(self):
        with self.assertRaises(DataError):
            Dataset(np.arange(3.0), np.ones((3, 2)), ("a", "b"), (False, True), (0, 1, 2))

    def test_require_performative_is_deferred(self):
        ds = make_dataset(P=0, extra=2)
        self.assertEqual(ds.P, 0)
        with self.assertRaisesMessage(DataError, "at least one performative feature"):
            ds.require_performative()

    def test_truncate_keeps_prefix(self):
        ds = make_dataset(T=20)
        head = ds.truncate(7)
        self.assertEqual(head.T, 7)
        np.testing.assert_array_equal(head.features, ds.features[:7])
        with self.assertRaises(DataError):
            ds.truncate(21)

    def test_horizon_truth(self):
        ds = make_dataset(T=20)
        np.testing.assert_array_equal(ds.horizon_truth(10, 4), ds.target[11:15])
        with self.assertRaises(DataError):
            ds.horizon_truth(16, 4)

    def test_check_taus(self):
        self.assertEqual(check_taus([0, 8], 8, 2), (0, 8))
        with self.assertRaises(DataError):
            check_taus([9], 8, 1)
        with self.assertRaises(DataError):
            check_taus([1, 2], 8, 1)
