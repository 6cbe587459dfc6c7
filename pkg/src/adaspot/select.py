#!/usr/bin/env python3
"""
Bucket selection for the adaspot library.

A partition count sketch: the D buckets of a hash [m] → [D] are sorted into
G groups, R times over, and one Rademacher functional is measured per group.
Every bucket then has R measurements touching it; the median of their
absolute values is the bucket's score and the k best scored buckets are
selected.  With the trivial hashing the same sketch doubles as the classic
non-adaptive count sketch estimator.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import IndexSet, ParameterError
from .measurement import Stage
from .randomness import (
    RademacherStream, hash_eval, hash_many, pairwise_hash_new, rademacher,
)

logger = logging.getLogger(__name__)

SELECT_GAMMA = 8 * math.sqrt(2)
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class SelectParams:
    """Repetitions R (odd), groups G, output size k and bucket count D."""

    R: int
    G: int
    k: int
    D: int

    def __post_init__(self):
        if self.R < 1 or self.R % 2 == 0:
            raise ParameterError(f"repetition count R must be odd and positive, got {self.R}")
        if self.G < 1:
            raise ParameterError(f"group count G must be >= 1, got {self.G}")
        if self.D < 1:
            raise ParameterError(f"bucket count D must be >= 1, got {self.D}")
        if not 1 <= self.k <= self.D:
            raise ParameterError(f"need 1 <= k <= D, got k={self.k}, D={self.D}")


class _SketchRow:
    """Group ids and signs of one repetition, evaluated lazily per index array."""

    def __init__(self, bucket_hash, group_hash, signs):
        self.bucket_hash = bucket_hash
        self.group_hash = group_hash
        self.signs = signs
        self._idx = None
        self._groups = None
        self._sigma = None

    def _evaluate(self, idx):
        if idx is not self._idx:
            buckets = hash_many(self.bucket_hash, idx)
            self._groups = hash_many(self.group_hash, buckets - np.uint64(1))
            self._sigma = self.signs.many(idx)
            self._idx = idx
        return self._groups, self._sigma

    def functional(self, g):
        g = np.uint64(g)

        def coeff(idx):
            groups, sigma = self._evaluate(idx)
            return np.where(groups == g, sigma, 0.0)

        return coeff


@dataclass(frozen=True, eq=False)
class SketchState:
    """The R×G measurement matrix together with the randomness that produced it."""

    params: SelectParams
    bucket_hash: object
    group_hashes: tuple
    signs: tuple
    Y: np.ndarray


def build_sketch(oracle, bucket_hash, params, seed):
    """Take the R·G stage-1 measurements Y[r][g]."""
    R, G = params.R, params.G
    group_hashes = tuple(pairwise_hash_new(seed.derive("group", r), G) for r in range(R))
    signs = tuple(RademacherStream.from_seed(seed.derive("sign", r)) for r in range(R))
    Y = np.zeros((R, G))
    for r in range(R):
        row = _SketchRow(bucket_hash, group_hashes[r], signs[r])
        for g in range(1, G + 1):
            Y[r, g - 1] = oracle.measure(row.functional(g), Stage.SELECT)
    logger.debug("sketch built: R=%d G=%d D=%d", R, G, params.D)
    return SketchState(params, bucket_hash, group_hashes, signs, Y)


class BucketScores:
    """Scores Z_d for a collection of bucket ids (1-based)."""

    def __init__(self, scores=None, ids=None, values=None):
        if scores is not None:
            items = sorted(scores.items())
            ids = [d for d, _ in items]
            values = [z for _, z in items]
        self.ids = np.asarray(ids if ids is not None else [], dtype=np.uint64)
        self.values = np.asarray(values if values is not None else [], dtype=np.float64)

    def __len__(self):
        return int(self.ids.size)

    def __getitem__(self, d):
        pos = np.flatnonzero(self.ids == np.uint64(d))
        if pos.size == 0:
            raise KeyError(d)
        return float(self.values[pos[0]])


def bucket_score(state, d):
    """Z_d = median over r of |Y[r][H^(r)(d)]|."""
    vals = [abs(state.Y[r, hash_eval(h, d - 1) - 1]) for r, h in enumerate(state.group_hashes)]
    return float(np.median(vals))


def bucket_scores(state, ids):
    """Vectorised ``bucket_score`` for an array of bucket ids."""
    ids = np.atleast_1d(np.asarray(ids, dtype=np.uint64))
    vals = np.empty((len(state.group_hashes), ids.size))
    zero_based = ids - np.uint64(1)
    for r, h in enumerate(state.group_hashes):
        groups = hash_many(h, zero_based).astype(np.int64) - 1
        vals[r] = np.abs(state.Y[r, groups])
    return BucketScores(ids=ids, values=np.median(vals, axis=0))


class TopKSelector:
    """Keeps the k best (score, id) pairs seen so far; ties go to the smaller id."""

    def __init__(self, k):
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        self.k = k
        self._ids = np.zeros(0, dtype=np.uint64)
        self._scores = np.zeros(0)
        self.seen = 0

    def push(self, ids, scores):
        ids = np.asarray(ids, dtype=np.uint64)
        scores = np.asarray(scores, dtype=np.float64)
        self.seen += ids.size
        if ids.size > self.k:
            kth = -np.partition(-scores, self.k - 1)[self.k - 1]
            keep = scores >= kth
            ids, scores = ids[keep], scores[keep]
        ids = np.concatenate([self._ids, ids])
        scores = np.concatenate([self._scores, scores])
        order = np.lexsort((ids, -scores))[: self.k]
        self._ids, self._scores = ids[order], scores[order]

    def topk(self):
        """Pairs (score, id) by decreasing score."""
        return list(zip(self._scores.tolist(), self._ids.tolist()))

    def result(self):
        return IndexSet(self._ids)


def select_top_k(scores, k):
    """The k bucket ids with the largest scores."""
    if k > len(scores):
        raise ParameterError(f"cannot select k={k} out of {len(scores)} buckets")
    selector = TopKSelector(k)
    selector.push(scores.ids, scores.values)
    return selector.result()


def select(state, k=None, chunk=DEFAULT_CHUNK):
    """Score every bucket in [D] in chunks and keep the k best."""
    k = state.params.k if k is None else k
    D = state.params.D
    if k > D:
        raise ParameterError(f"cannot select k={k} out of D={D} buckets")
    selector = TopKSelector(k)
    for start in range(1, D + 1, chunk):
        stop = min(D + 1, start + chunk)
        ids = np.arange(start, stop, dtype=np.uint64)
        scored = bucket_scores(state, ids)
        selector.push(scored.ids, scored.values)
    logger.debug("selected %d of %d scored buckets", k, selector.seen)
    return selector.result()


def bucket_norms(x, bucket_hash):
    """ℓ2 norm of x on each nonempty bucket, as a dict bucket id → norm."""
    if x.nnz() == 0:
        return {}
    buckets = hash_many(bucket_hash, x.indices)
    norms = {}
    for d in np.unique(buckets).tolist():
        norms[d] = float(np.linalg.norm(x.values[buckets == np.uint64(d)]))
    return norms


def compute_Q(x, bucket_hash, eps, gamma_sel=SELECT_GAMMA):
    """Buckets holding an eps-heavy j whose bucket noise is at most |x_j|/gamma_sel.

    Needs the full vector, so it is a test-side diagnostic only.
    """
    if x.nnz() == 0:
        return IndexSet()
    buckets = hash_many(bucket_hash, x.indices)
    found = []
    for d in np.unique(buckets).tolist():
        vals = np.abs(x.values[buckets == np.uint64(d)])
        top = int(np.argmax(vals))
        noise = float(np.linalg.norm(np.delete(vals, top)))
        if vals[top] >= eps and noise <= vals[top] / gamma_sel:
            found.append(d)
    return IndexSet(found)


def count_sketch_estimate(state, i):
    """Median over r of σ_{r,i}·Ŷ_{r,i}: the non-adaptive count sketch estimate of x_i."""
    if not state.bucket_hash.identity:
        raise ParameterError("count sketch estimates need the trivial hashing")
    d = hash_eval(state.bucket_hash, i)
    vals = [rademacher(sigma, i) * state.Y[r, hash_eval(h, d - 1) - 1]
            for r, (h, sigma) in enumerate(zip(state.group_hashes, state.signs))]
    return float(np.median(vals))


def count_sketch_estimates(state, indices):
    """Vectorised ``count_sketch_estimate``."""
    if not state.bucket_hash.identity:
        raise ParameterError("count sketch estimates need the trivial hashing")
    idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
    buckets = hash_many(state.bucket_hash, idx) - np.uint64(1)
    vals = np.empty((len(state.group_hashes), idx.size))
    for r, (h, sigma) in enumerate(zip(state.group_hashes, state.signs)):
        groups = hash_many(h, buckets).astype(np.int64) - 1
        vals[r] = sigma.many(idx) * state.Y[r, groups]
    return np.median(vals, axis=0)
