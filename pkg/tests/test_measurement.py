import unittest
from fractions import Fraction

import numpy as np

from src.adaspot.core import DimensionError, SparseVector
from src.adaspot.measurement import (
    CostLedger, MeasurementOracle, Stage, cost_report, measure, query_entry,
)


class TestMeasure(unittest.TestCase):
    def test_zero_functional(self):
        oracle = MeasurementOracle(SparseVector(10, {1: 2.0}))
        self.assertEqual(measure(oracle, lambda idx: np.zeros(idx.size), Stage.SELECT), 0.0)
        self.assertEqual(cost_report(oracle), CostLedger(1, 0, 0))

    def test_sum_of_entries(self):
        oracle = MeasurementOracle(SparseVector(10, {1: 2.0, 3: -1.0}))
        self.assertEqual(oracle.measure(lambda idx: np.ones(idx.size), Stage.SELECT), 1.0)

    def test_signed_functional(self):
        oracle = MeasurementOracle(SparseVector(10, {1: 2.0}))
        value = oracle.measure(lambda idx: np.where(idx == 1, -1.0, 1.0), Stage.SPOT)
        self.assertEqual(value, -2.0)
        self.assertEqual(oracle.cost_report(), CostLedger(0, 1, 0))

    def test_matches_dense_sum(self):
        rng = np.random.default_rng(5)
        for m in (1, 17, 1000, 10 ** 4):
            s = min(m, 50)
            idx = rng.choice(m, s, replace=False)
            x = SparseVector.from_arrays(m, idx, rng.standard_normal(s))
            dense_x = np.zeros(m)
            dense_x[idx] = [x.get(i) for i in idx.tolist()]
            coeffs = rng.standard_normal(m)
            ints = rng.integers(-1000, 1000, m)
            oracle = MeasurementOracle(x)
            value = oracle.measure(lambda i: coeffs[i.astype(np.int64)], Stage.SELECT)
            self.assertAlmostEqual(value, float(np.dot(coeffs, dense_x)), places=9)
            exact = oracle.measure_exact(lambda i: ints[i.astype(np.int64)].tolist(), Stage.SPOT)
            expected = sum((int(c) * Fraction(v) for c, v in zip(ints.tolist(), dense_x.tolist())),
                           Fraction(0))
            self.assertEqual(exact, expected)

    def test_zero_vector_still_charged(self):
        oracle = MeasurementOracle(SparseVector(10))
        self.assertEqual(oracle.measure(lambda idx: np.ones(idx.size), Stage.SELECT), 0.0)
        self.assertEqual(oracle.measure_exact(lambda idx: [1] * idx.size, Stage.SPOT), 0)
        self.assertEqual(oracle.cost_report(), CostLedger(1, 1, 0))


class TestMeasureExact(unittest.TestCase):
    def test_exact_rational(self):
        oracle = MeasurementOracle(SparseVector(10, {1: 0.1, 2: 0.75}))
        value = oracle.measure_exact(lambda idx: [3, -1], Stage.SPOT, denominator=2)
        self.assertEqual(value, (3 * Fraction(0.1) - Fraction(0.75)) / 2)

    def test_large_coefficients(self):
        big = 2 ** 70 + 1
        oracle = MeasurementOracle(SparseVector(10, {4: 1.0, 5: 2.0 ** -60}))
        value = oracle.measure_exact(lambda idx: [big, big], Stage.SPOT)
        self.assertEqual(value, Fraction(big) * (1 + Fraction(1, 2 ** 60)))


class TestQueryEntry(unittest.TestCase):
    def test_queries(self):
        oracle = MeasurementOracle(SparseVector(10, {5: 0.25}))
        self.assertEqual(query_entry(oracle, 5), 0.25)
        self.assertEqual(oracle.cost_report().n3, 1)
        self.assertEqual(query_entry(oracle, 4), 0.0)
        self.assertEqual(oracle.cost_report().n3, 2)

    def test_out_of_range(self):
        oracle = MeasurementOracle(SparseVector(10, {5: 0.25}))
        with self.assertRaises(DimensionError):
            oracle.query_entry(10)


class TestCostLedger(unittest.TestCase):
    def test_fresh(self):
        self.assertEqual(MeasurementOracle(SparseVector(3)).cost_report(), CostLedger(0, 0, 0))

    def test_monotone(self):
        rng = np.random.default_rng(9)
        oracle = MeasurementOracle(SparseVector(50, {3: 0.5, 7: -0.25}))
        previous = oracle.cost_report()
        for step in rng.integers(0, 4, 300).tolist():
            if step == 0:
                oracle.measure(lambda idx: np.ones(idx.size), Stage.SELECT)
            elif step == 1:
                oracle.measure(lambda idx: np.ones(idx.size), Stage.SPOT)
            elif step == 2:
                oracle.measure_exact(lambda idx: [1] * idx.size, Stage.SPOT)
            else:
                oracle.query_entry(int(rng.integers(0, 50)))
            ledger = oracle.cost_report()
            self.assertGreaterEqual(ledger.n1, previous.n1)
            self.assertGreaterEqual(ledger.n2, previous.n2)
            self.assertGreaterEqual(ledger.n3, previous.n3)
            self.assertEqual(ledger.total, previous.total + 1)
            previous = ledger

    def test_totals(self):
        ledger = CostLedger(3, 4, 5) + CostLedger(1, 0, 0)
        self.assertEqual(ledger.total, 13)
        self.assertEqual(ledger.as_row(), {"n1": 4, "n2": 4, "n3": 5, "total": 13})
        self.assertEqual(str(ledger), "n1=4 n2=4 n3=5 total=13")


if __name__ == '__main__':
    unittest.main()
