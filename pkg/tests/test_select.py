import math
import unittest

import numpy as np

from src.adaspot.core import IndexSet, ParameterError, SparseVector
from src.adaspot.measurement import CostLedger, MeasurementOracle
from src.adaspot.randomness import (
    PairwiseHash, RademacherStream, SeedSpec, hash_eval, pairwise_hash_new, rademacher, trivial_hash,
)
from src.adaspot.select import (
    SELECT_GAMMA, BucketScores, SelectParams, SketchState, TopKSelector, bucket_norms,
    bucket_score, bucket_scores, build_sketch, compute_Q, count_sketch_estimate,
    count_sketch_estimates, select, select_top_k,
)
from src.adaspot.harness.generators import gen_random_unit


def sketch(x, bucket_hash, R, G, k, seed=0):
    oracle = MeasurementOracle(x)
    state = build_sketch(oracle, bucket_hash, SelectParams(R, G, k, bucket_hash.D), SeedSpec(seed))
    return state, oracle


class TestSelectParams(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ParameterError):
            SelectParams(2, 4, 1, 8)
        with self.assertRaises(ParameterError):
            SelectParams(3, 4, 9, 8)
        with self.assertRaises(ParameterError):
            SelectParams(3, 0, 1, 8)


class TestBuildSketch(unittest.TestCase):
    def test_zero_vector(self):
        state, oracle = sketch(SparseVector(100), trivial_hash(100), 5, 8, 2)
        self.assertFalse(np.any(state.Y))
        self.assertEqual(oracle.cost_report(), CostLedger(40, 0, 0))

    def test_single_functional(self):
        x = SparseVector(50, {3: 0.5, 7: -0.25, 40: 1.0})
        state, _ = sketch(x, trivial_hash(50), 1, 1, 1, seed=3)
        sigma = state.signs[0]
        expected = sum(rademacher(sigma, i) * v for i, v in x.items())
        self.assertEqual(state.Y[0, 0], expected)

    def test_single_spike(self):
        x = SparseVector(1000, {17: 0.75})
        h = pairwise_hash_new(SeedSpec(1).derive("bucket"), 64)
        state, _ = sketch(x, h, 5, 8, 2, seed=4)
        d = hash_eval(h, 17)
        for r in range(5):
            g = hash_eval(state.group_hashes[r], d - 1)
            for col in range(8):
                expected = rademacher(state.signs[r], 17) * 0.75 if col == g - 1 else 0.0
                self.assertEqual(state.Y[r, col], expected)


class TestBucketScores(unittest.TestCase):
    def _state(self, Y, group_hashes):
        params = SelectParams(len(group_hashes), Y.shape[1], 1, 4)
        signs = tuple(RademacherStream(r) for r in range(len(group_hashes)))
        return SketchState(params, trivial_hash(4), tuple(group_hashes), signs, Y)

    def test_median_of_absolute_values(self):
        # constant group hashes: every bucket lands in group 1
        const = PairwiseHash(0, 0, 1)
        state = self._state(np.array([[-3.0], [1.0], [2.0]]), [const] * 3)
        self.assertEqual(bucket_score(state, 1), 2.0)
        self.assertEqual(bucket_scores(state, [1, 2, 3]).values.tolist(), [2.0, 2.0, 2.0])

    def test_single_repetition(self):
        const = PairwiseHash(0, 0, 1)
        state = self._state(np.array([[-0.5]]), [const])
        self.assertEqual(bucket_score(state, 3), 0.5)

    def test_zero_vector_scores(self):
        state, _ = sketch(SparseVector(100), trivial_hash(100), 3, 4, 2)
        self.assertEqual(bucket_scores(state, np.arange(1, 101)).values.max(), 0.0)

    def test_sign_flip_leaves_scores(self):
        x = SparseVector(500, {i: math.sin(i + 1) for i in range(0, 500, 11)})
        h = pairwise_hash_new(SeedSpec(12).derive("bucket"), 64)
        state, _ = sketch(x, h, 7, 16, 4, seed=13)
        flipped, _ = sketch(-x, h, 7, 16, 4, seed=13)
        self.assertTrue(np.array_equal(flipped.Y, -state.Y))
        ids = np.arange(1, 65)
        self.assertEqual(bucket_scores(flipped, ids).values.tolist(),
                         bucket_scores(state, ids).values.tolist())
        self.assertEqual(select(flipped), select(state))

    def test_vectorised_matches_scalar(self):
        x = SparseVector(200, {i: (-1) ** i / (i + 1) for i in range(0, 200, 7)})
        h = pairwise_hash_new(SeedSpec(5).derive("bucket"), 40)
        state, _ = sketch(x, h, 7, 6, 3, seed=6)
        scored = bucket_scores(state, np.arange(1, 41))
        for d in range(1, 41):
            self.assertEqual(scored[d], bucket_score(state, d))


class TestSelectTopK(unittest.TestCase):
    def test_largest(self):
        self.assertEqual(select_top_k(BucketScores({1: 5, 2: 3, 3: 9}), 2), IndexSet([1, 3]))

    def test_ties_by_id(self):
        self.assertEqual(select_top_k(BucketScores({4: 1, 3: 1, 2: 1, 1: 1}), 2), IndexSet([1, 2]))

    def test_all(self):
        self.assertEqual(select_top_k(BucketScores({1: 0, 2: 7, 3: 1}), 3), IndexSet([1, 2, 3]))

    def test_too_many(self):
        with self.assertRaises(ParameterError):
            select_top_k(BucketScores({1: 0}), 2)

    def test_streaming_matches_batch(self):
        rng = np.random.default_rng(8)
        ids = np.arange(1, 5001, dtype=np.uint64)
        scores = np.round(rng.random(5000), 2)
        selector = TopKSelector(25)
        for start in range(0, 5000, 333):
            selector.push(ids[start:start + 333], scores[start:start + 333])
        order = sorted(range(5000), key=lambda i: (-scores[i], i))[:25]
        self.assertEqual(selector.result(), IndexSet(ids[order]))
        self.assertEqual([s for s, _ in selector.topk()], sorted(scores[order], reverse=True))
        self.assertEqual(selector.seen, 5000)


class TestSelect(unittest.TestCase):
    def test_spike_bucket_selected(self):
        x = SparseVector(10 ** 6, {123456: 1.0})
        h = pairwise_hash_new(SeedSpec(2).derive("bucket"), 5000)
        state, _ = sketch(x, h, 5, 256, 4, seed=9)
        chosen = select(state, chunk=777)
        self.assertEqual(len(chosen), 4)
        self.assertIn(hash_eval(h, 123456), chosen)

    def test_zero_vector_pads_by_id(self):
        state, _ = sketch(SparseVector(100), trivial_hash(100), 3, 4, 5)
        self.assertEqual(select(state), IndexSet([1, 2, 3, 4, 5]))

    def test_k_equals_D(self):
        state, _ = sketch(SparseVector(8, {2: 1.0}), trivial_hash(8), 3, 2, 8)
        self.assertEqual(select(state), IndexSet(range(1, 9)))


class TestQualifyingBuckets(unittest.TestCase):
    def test_single_spike(self):
        h = pairwise_hash_new(SeedSpec(3).derive("bucket"), 128)
        self.assertEqual(compute_Q(SparseVector(1000, {9: 1.0}), h, 0.5), IndexSet([hash_eval(h, 9)]))

    def test_zero(self):
        self.assertEqual(len(compute_Q(SparseVector(1000), trivial_hash(1000), 0.5)), 0)

    def test_two_isolated_spikes(self):
        h = trivial_hash(1000)
        x = SparseVector(1000, {3: 0.6, 700: -0.7})
        self.assertEqual(compute_Q(x, h, 0.5), IndexSet([4, 701]))

    def test_noisy_bucket_excluded(self):
        h = PairwiseHash(0, 0, 1)
        x = SparseVector(10, {0: 1.0, 1: 1.0 / SELECT_GAMMA + 0.01})
        self.assertEqual(len(compute_Q(x, h, 0.5)), 0)

    def test_heavy_bucket_count(self):
        # buckets with ℓ2 mass eps/(8√2) number at most ⌊(8√2/eps)^p⌋ when ‖x‖_p <= 1
        checked = 0
        for t in range(60):
            p = (1, 1.5, 2)[t % 3]
            seed = SeedSpec(40).derive("instance", t)
            x = gen_random_unit(4096, 5 + 7 * (t % 10), p, seed)
            h = pairwise_hash_new(seed.derive("bucket"), 32 + t)
            for eps in (0.25, 0.5, 0.9):
                threshold = eps / SELECT_GAMMA
                heavy = [d for d, norm in bucket_norms(x, h).items() if norm >= threshold]
                self.assertLessEqual(len(heavy), math.floor((SELECT_GAMMA / eps) ** p))
                checked += len(heavy)
        self.assertGreater(checked, 0)

    def test_bucket_norms(self):
        h = trivial_hash(10)
        norms = bucket_norms(SparseVector(10, {1: 3.0, 2: 4.0}), h)
        self.assertEqual(norms, {2: 3.0, 3: 4.0})
        one = bucket_norms(SparseVector(10, {1: 3.0, 2: 4.0}), PairwiseHash(0, 0, 1))
        self.assertEqual(one, {1: 5.0})


class TestCountSketch(unittest.TestCase):
    def test_isolated_entry_exact(self):
        x = SparseVector(64, {10: -0.375})
        state, _ = sketch(x, trivial_hash(64), 5, 8, 1, seed=1)
        self.assertEqual(count_sketch_estimate(state, 10), -0.375)

    def test_zero(self):
        state, _ = sketch(SparseVector(64), trivial_hash(64), 3, 8, 1)
        self.assertEqual(count_sketch_estimate(state, 5), 0.0)

    def test_vectorised_matches_scalar(self):
        x = SparseVector(64, {i: 1.0 / (i + 1) for i in range(0, 64, 5)})
        state, _ = sketch(x, trivial_hash(64), 5, 8, 1, seed=2)
        est = count_sketch_estimates(state, np.arange(64, dtype=np.uint64))
        for i in range(64):
            self.assertEqual(est[i], count_sketch_estimate(state, i))

    def test_needs_trivial_hashing(self):
        h = pairwise_hash_new(SeedSpec(1), 8)
        state, _ = sketch(SparseVector(64, {1: 1.0}), h, 1, 2, 1)
        with self.assertRaises(ParameterError):
            count_sketch_estimate(state, 1)

    def test_unbiased(self):
        x = SparseVector(32, {0: 0.5, 1: 0.3, 2: -0.4, 3: 0.2})
        n = 4000
        samples = []
        for t in range(n):
            state, _ = sketch(x, trivial_hash(32), 1, 2, 1, seed=1000 + t)
            samples.append(count_sketch_estimate(state, 0))
        samples = np.array(samples)
        self.assertLess(abs(samples.mean() - 0.5), 4 * samples.std() / math.sqrt(n))


if __name__ == '__main__':
    unittest.main()
