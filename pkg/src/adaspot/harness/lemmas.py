#!/usr/bin/env python3
"""
Monte Carlo checks of the building blocks: the hashing tail bound, bucket
selection, spot, pairwise collisions and heavy hitter isolation.

Each check returns a ``TrialReport`` whose ``failures`` count the event the
corresponding guarantee bounds.
"""

import logging
import math

import numpy as np

from ..core import ParameterError, SparseVector, heavy_set, lp_norm
from ..measurement import MeasurementOracle
from ..randomness import (
    MERSENNE_P, SeedSpec, hash_eval, hash_family_eval, hash_many, pairwise_hash_new,
)
from ..select import SelectParams, build_sketch, compute_Q, select
from ..spot import spot
from .trials import TrialReport, map_trials

logger = logging.getLogger(__name__)

_REL_TOL = 1e-12
_DRAW_CHUNK = 1 << 20


def _seed(seed):
    return seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))


def _bucket_mask(h, x, j):
    return hash_many(h, x.indices) == np.uint64(hash_eval(h, j))


def hash_lemma_trials(x, j, alpha, D, p, n, seed=0, strict=True):
    """Failure iff ‖x_{B_j∖{j}}‖_p > ‖x_{[m]∖{j}}‖_p / (alpha·D)^(1/p); bound alpha.

    With ``strict=False`` reaching the threshold already counts.  On
    ``gen_hash_adversary`` that is a single collision with j, which happens at
    rate ``adversary_collision_rate(alpha, D)``, close to alpha: the bound
    cannot be improved.
    """
    seed = _seed(seed)
    rest = x.indices != np.uint64(j)
    total = lp_norm(SparseVector.from_arrays(x.dim, x.indices[rest], x.values[rest]), p)
    threshold = total / (alpha * D) ** (1.0 / p)
    limit = threshold * (1 + _REL_TOL) if strict else threshold * (1 - _REL_TOL)
    flags = []
    for t in range(n):
        h = pairwise_hash_new(seed.derive("hash", t), D)
        keep = _bucket_mask(h, x, j) & rest
        values = np.abs(x.values[keep])
        norm = float(np.sum(values ** p) ** (1.0 / p)) if values.size else 0.0
        flags.append(norm > limit if strict else norm >= limit)
    report = TrialReport.from_flags(flags)
    logger.info("hash lemma (%s): %d/%d exceedances (bound %g)",
                "strict" if strict else "inclusive", report.failures, n, alpha)
    return report


def adversary_collision_rate(alpha, D):
    """1 − (1 − 1/D)^r with r = ⌊alpha·D⌋: some adversary entry shares j's bucket."""
    r = math.floor(alpha * D)
    return 1.0 - (1.0 - 1.0 / D) ** r


def select_params_for(D, eps, delta1, p):
    """Repetitions, groups and output size used by the bucket selection guarantee."""
    k = min(math.floor(2 ** (7 * p / 2) * eps ** -p), D)
    R = 2 * math.ceil(math.log2(D / (2 * delta1)) - 0.5) + 1
    return SelectParams(R, 4 * k, k, D)


def select_lemma_trials(x, bucket_hash, eps, delta1, p, n, seed=0, params=None):
    """Failure iff the qualifying buckets Q are not all selected; bound delta1."""
    seed = _seed(seed)
    params = select_params_for(bucket_hash.D, eps, delta1, p) if params is None else params
    Q = compute_Q(x, bucket_hash, eps)
    if len(Q) == 0:
        logger.warning("select lemma: no qualifying bucket, every trial succeeds trivially")

    def one(t):
        state = build_sketch(MeasurementOracle(x), bucket_hash, params, seed.derive("select", t))
        return not Q.issubset(select(state, params.k))

    report = TrialReport.from_flags(map_trials(one, n))
    logger.info("select lemma: |Q|=%d, %d/%d misses (bound %g)", len(Q), report.failures, n, delta1)
    return report


def spot_lemma_trials(x, J, j, alpha, m, mode, n, seed=0):
    """Failure iff spot does not return exactly {j}; bound alpha."""
    seed = _seed(seed)

    def one(t):
        found = spot(MeasurementOracle(x), J, alpha, m, mode, seed.derive("spot", t))
        return list(found) != [j]

    report = TrialReport.from_flags(map_trials(one, n))
    logger.info("spot lemma: %d/%d misses (bound %g)", report.failures, n, alpha)
    return report


def collision_rate(D, i, j, n, seed=0, chunk=_DRAW_CHUNK):
    """Empirical Pr(h(i) = h(j)) over n hash draws, with its ideal value 1/D.

    Coefficients are drawn as ``pairwise_hash_new`` draws them, a chunk at a time.
    """
    if i == j:
        raise ParameterError("collision rate needs distinct indices")
    rng = _seed(seed).derive("collision").generator()
    hits = 0
    for start in range(0, n, chunk):
        size = min(chunk, n - start)
        a = rng.integers(1, MERSENNE_P, size, dtype=np.uint64)
        b = rng.integers(0, MERSENNE_P, size, dtype=np.uint64)
        hits += int(np.count_nonzero(hash_family_eval(a, b, D, i) == hash_family_eval(a, b, D, j)))
    return hits / n, 1.0 / D


def hashing_isolation_trials(x, eps, gamma, D, p, n, seed=0):
    """Failure iff some eps-heavy j has bucket noise ‖x_{B_j∖{j}}‖₂ > |x_j|/gamma."""
    seed = _seed(seed)
    heavy = heavy_set(x, eps)
    positions = np.searchsorted(x.indices, heavy.array)
    flags = []
    for t in range(n):
        h = pairwise_hash_new(seed.derive("isolate", t), D)
        buckets = hash_many(h, x.indices)
        failed = False
        for pos in positions.tolist():
            same = buckets == buckets[pos]
            same[pos] = False
            noise = float(np.linalg.norm(x.values[same]))
            if noise > abs(x.values[pos]) / gamma:
                failed = True
                break
        flags.append(failed)
    report = TrialReport.from_flags(flags)
    logger.info("isolation: %d heavy coordinates (p=%g), %d/%d draws failed",
                len(heavy), p, report.failures, n)
    return report
