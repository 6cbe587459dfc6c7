#!/usr/bin/env python3
"""
Adaptive one-sparse recovery for the adaspot library.

``shrink`` takes two measurements on a candidate set S,

    Y1 = Σ_{i∈S} σ_i x_i,    Y2 = Σ_{i∈S} (h_i − (D0+1)/2) σ_i x_i,

and keeps the indices whose hash value equals ⌈Y2/Y1 + D0/2⌉.  ``spot``
iterates shrink with hash ranges D_0, D_1, ... that grow doubly
exponentially, then finishes with a hash that is injective on what is left.

Candidate sets come in two modes.  Explicit sets are enumerated index arrays.
Implicit sets are a chain of (hash, value) constraints and work for any m,
but can only answer membership queries.

Both measurements of a shrink step are exact rationals, so the ratio and the
ceiling stay exact even when D0 exceeds 2^53.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import IndexSet, ParameterError, lp_norm, project
from .measurement import Stage
from .randomness import RademacherStream, pairwise_hash_new, trivial_hash

logger = logging.getLogger(__name__)

EXPLICIT = "explicit"
IMPLICIT = "implicit"
MODES = (EXPLICIT, IMPLICIT)

PAIRWISE = "pairwise"
IID = "iid"
VARIANTS = (PAIRWISE, IID)

MAX_HASH_RANGE = 1 << 63


class RankHash:
    """Injective hash on a sorted member array: the 1-based rank of each member."""

    identity = False

    def __init__(self, members):
        self.members = members
        self.D = int(members.size)

    def many(self, indices):
        idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
        return np.searchsorted(self.members, idx).astype(np.uint64) + np.uint64(1)

    def __repr__(self):
        return f"RankHash(D={self.D})"


class CandidateSet:
    """A set S_k of candidate indices, explicit or implicit."""

    def __init__(self, mode, members=None, constraints=(), empty=False, failed=False):
        if mode not in MODES:
            raise ParameterError(f"unknown candidate mode '{mode}'")
        self.mode = mode
        self.members = members
        self.constraints = tuple(constraints)
        self._empty = empty
        self.failed = failed

    @classmethod
    def explicit(cls, members):
        if not isinstance(members, IndexSet):
            members = IndexSet(members)
        return cls(EXPLICIT, members=members)

    @classmethod
    def implicit(cls, bucket_hash, value):
        return cls(IMPLICIT, constraints=((bucket_hash, int(value)),))

    def emptied(self, failed=False):
        return CandidateSet(self.mode, members=IndexSet() if self.mode == EXPLICIT else None,
                            constraints=self.constraints, empty=True, failed=failed)

    def is_empty(self):
        if self.mode == EXPLICIT:
            return len(self.members) == 0
        return self._empty

    def size(self):
        """Number of members (explicit mode only)."""
        if self.mode != EXPLICIT:
            raise ParameterError("implicit candidate sets cannot be counted")
        return len(self.members)

    def contains_many(self, indices):
        """Boolean membership mask for a uint64 index array."""
        idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
        if self.is_empty():
            return np.zeros(idx.size, dtype=bool)
        if self.mode == EXPLICIT:
            return np.isin(idx, self.members.array)
        mask = np.ones(idx.size, dtype=bool)
        for h, value in self.constraints:
            mask &= h.many(idx) == np.uint64(value)
        return mask

    def __contains__(self, index):
        return bool(self.contains_many([index])[0])

    def refine(self, h, value):
        """S ∩ {i : h(i) = value}."""
        if self.mode == EXPLICIT:
            arr = self.members.array
            keep = h.many(arr) == np.uint64(value) if arr.size else np.zeros(0, dtype=bool)
            return CandidateSet(EXPLICIT, members=IndexSet._from_sorted(arr[keep]),
                                constraints=self.constraints + ((h, value),))
        return CandidateSet(IMPLICIT, constraints=self.constraints + ((h, int(value)),))

    def __repr__(self):
        if self.mode == EXPLICIT:
            return f"CandidateSet(explicit, {self.members})"
        state = ", empty" if self._empty else ""
        return f"CandidateSet(implicit, {len(self.constraints)} constraints{state})"


@dataclass(frozen=True)
class SpotSchedule:
    """Failure budget alpha, iteration cap k* and hash ranges D_0..D_{k*-1}."""

    alpha: float
    kstar: int
    D: tuple


def kstar(m):
    """max{0, ⌈log_{9/8}(log2(m)/8)⌉}."""
    m = int(m)
    if m < 2:
        raise ParameterError(f"k* needs m >= 2, got {m}")
    ratio = math.log2(m) / 8
    if ratio <= 1:
        return 0
    return max(0, math.ceil(math.log(ratio) / math.log(9 / 8)))


def dk_schedule(alpha, kstar):
    """D_k = ⌈2^(8·(9/8)^k + k + 2) / alpha⌉ for k < kstar."""
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    ranges = []
    for k in range(kstar):
        exponent = 8 * 1.125 ** k + k + 2
        value = math.ceil(2.0 ** exponent / alpha)
        if value > MAX_HASH_RANGE:
            raise ParameterError(
                f"D_{k} = ceil(2^(8*(9/8)^{k} + {k} + 2) / {alpha}) exceeds 2^63; instance too demanding")
        ranges.append(value)
    return SpotSchedule(alpha, kstar, tuple(ranges))


def iid_condition_threshold(alpha, variant=PAIRWISE):
    """Heavy hitter multiplier gamma required by spot with failure budget alpha."""
    if variant == PAIRWISE:
        return 2049 * math.sqrt(2 / alpha ** 3)
    if variant == IID:
        return 1025 * math.sqrt(2 * math.log(16 / alpha)) / alpha
    raise ParameterError(f"unknown variant '{variant}'")


def heavy_hitter_ok(x, J, j, alpha, variant=PAIRWISE):
    """Whether ‖x_{J∖{j}}‖₂ ≤ |x_j|/gamma holds (test-side check)."""
    members = J.members if isinstance(J, CandidateSet) else J
    rest = IndexSet([i for i in members if i != j])
    noise = lp_norm(project(x, rest), 2)
    return noise <= abs(x.get(j)) / iid_condition_threshold(alpha, variant)


def _hash_ints(h, idx):
    if h.identity:
        return [i + 1 for i in idx.tolist()]
    return h.many(idx).tolist()


def shrink(oracle, S, h, sign_stream):
    """One shrink step: two stage-2 measurements, then S ∩ {i : h(i) = ⌈Y2/Y1 + D0/2⌉}."""
    D0 = h.D

    def signs(idx):
        mask = S.contains_many(idx)
        return mask, np.where(mask, sign_stream.many(idx), 0.0).astype(np.int64)

    def first(idx):
        return signs(idx)[1]

    def second(idx):
        mask, sigma = signs(idx)
        coeff = [0] * idx.size
        pos = np.flatnonzero(mask)
        for p, hv in zip(pos.tolist(), _hash_ints(h, idx[pos])):
            coeff[p] = (2 * hv - D0 - 1) * int(sigma[p])
        return coeff

    y1 = oracle.measure_exact(first, Stage.SPOT)
    y2 = oracle.measure_exact(second, Stage.SPOT, denominator=2)
    if y1 == 0:
        logger.debug("shrink: Y1 = 0, candidate set treated as empty")
        return S.emptied(failed=True)
    value = math.ceil(y2 / y1 + Fraction(D0, 2))
    logger.debug("shrink: D0=%d value=%d", D0, value)
    if not 1 <= value <= D0:
        return S.emptied()
    return S.refine(h, value)


def spot(oracle, J, alpha, m, mode=None, seed=None, trace=None):
    """Spot the heavy hitter of candidate set J.

    Returns an IndexSet with at most one element.  At most 2·k*(m) + 2
    stage-2 measurements are charged.
    """
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    mode = J.mode if mode is None else mode
    if mode != J.mode:
        raise ParameterError(f"candidate set is {J.mode}, spot asked for {mode}")
    if seed is None:
        raise ParameterError("spot needs a seed")
    schedule = dk_schedule(alpha, kstar(m))
    S = J
    for k, D_k in enumerate(schedule.D):
        if S.is_empty():
            return IndexSet()
        if mode == EXPLICIT and S.size() <= 1:
            return S.members
        step = seed.derive("shrink", k)
        h = pairwise_hash_new(step.derive("hash"), D_k)
        sigma = RademacherStream.from_seed(step.derive("sign"))
        S = shrink(oracle, S, h, sigma)
        if trace is not None:
            trace.append(S)
    if S.is_empty():
        return IndexSet()
    sigma = RademacherStream.from_seed(seed.derive("shrink", schedule.kstar).derive("sign"))
    if mode == EXPLICIT:
        if S.size() <= 1:
            return S.members
        S = shrink(oracle, S, RankHash(S.members.array), sigma)
        if trace is not None:
            trace.append(S)
        return S.members
    S = shrink(oracle, S, trivial_hash(m), sigma)
    if trace is not None:
        trace.append(S)
    if S.is_empty():
        return IndexSet()
    candidate = S.constraints[-1][1] - 1
    if candidate in S:
        return IndexSet([candidate])
    logger.warning("spot: candidate %d failed chain verification", candidate)
    return IndexSet()
