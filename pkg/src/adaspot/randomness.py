#!/usr/bin/env python3
"""
Randomness module for the adaspot library.

Seedable sub-streams, the pairwise independent hash family
``h(i) = 1 + ((a·(i+1) + b) mod P) mod D`` with the Mersenne prime
P = 2^61 − 1, and counter-based Rademacher sign streams.

Every hash value and every sign is a pure function of its parameters and the
index, so nothing of length m or D is ever materialised.  For D ≤ 2^40 the
mod-D bias of a hash value is at most D/P ≤ 2^-21.  Uniformity needs D ≤ P:
above that, values only cover [1, P] and the buckets in (P, D] stay empty.
"""

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from .core import ParameterError

logger = logging.getLogger(__name__)

MERSENNE_P = (1 << 61) - 1

_U64 = (1 << 64) - 1
_P = np.uint64(MERSENNE_P)
_MASK32 = np.uint64((1 << 32) - 1)
_MASK29 = np.uint64((1 << 29) - 1)
_SHIFT61 = np.uint64(61)

# SplitMix64 constants
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _label_code(label):
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeedSpec:
    """A master seed plus the path of (label, counter) pairs leading to a sub-stream."""

    master_seed: int
    path: tuple = field(default=())

    def derive(self, label, counter=0):
        return SeedSpec(self.master_seed, self.path + ((str(label), int(counter)),))

    def seed_sequence(self):
        spawn_key = []
        for label, counter in self.path:
            spawn_key.extend((_label_code(label), counter))
        return np.random.SeedSequence(entropy=self.master_seed & _U64, spawn_key=tuple(spawn_key))

    def generator(self):
        """A numpy Generator over this stream (Philox, counter based)."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def key(self):
        """A 64-bit key for counter-based per-index generators."""
        return int(self.seed_sequence().generate_state(1, dtype=np.uint64)[0])

    def __str__(self):
        steps = "/".join(f"{label}:{counter}" for label, counter in self.path)
        return f"{self.master_seed}/{steps}" if steps else str(self.master_seed)


def derive_stream(seed, label, counter=0):
    """Deterministic sub-stream of ``seed`` identified by (label, counter)."""
    return seed.derive(label, counter)


def _reduce(s):
    """Fold a uint64 array below 2^64 into [0, P)."""
    s = (s & _P) + (s >> _SHIFT61)
    return np.where(s >= _P, s - _P, s)


def _mulmod(a, x):
    """(a·x) mod P for a scalar a < P and a uint64 array x < P, exact."""
    a0 = np.uint64(a & ((1 << 32) - 1))
    a1 = np.uint64(a >> 32)
    x0 = x & _MASK32
    x1 = x >> np.uint64(32)
    lo = a0 * x0
    mid = a1 * x0 + a0 * x1
    hi = a1 * x1
    s = ((hi << np.uint64(3))
         + (mid >> np.uint64(29))
         + ((mid & _MASK29) << np.uint64(32))
         + (lo & _P)
         + (lo >> _SHIFT61))
    return _reduce(s)


@dataclass(frozen=True)
class PairwiseHash:
    """A member of the pairwise independent family [m] → [D] (values 1-based).

    With ``identity`` set the map is i ↦ i + 1 (the trivial hashing).
    """

    a: int
    b: int
    D: int
    identity: bool = False

    def __post_init__(self):
        if self.D < 1:
            raise ParameterError(f"hash range D must be >= 1, got {self.D}")
        if not self.identity and not (0 <= self.a < MERSENNE_P and 0 <= self.b < MERSENNE_P):
            raise ParameterError("hash coefficients must lie in [0, 2^61 - 1)")

    def __call__(self, i):
        return hash_eval(self, i)

    def many(self, indices):
        return hash_many(self, indices)


def pairwise_hash_new(stream, D, degenerate=False):
    """Draw a fresh hash [m] → [D] from ``stream``."""
    D = int(D)
    if D < 1:
        raise ParameterError(f"hash range D must be >= 1, got {D}")
    rng = stream.generator()
    low = 0 if degenerate else 1
    a = int(rng.integers(low, MERSENNE_P, dtype=np.uint64))
    b = int(rng.integers(0, MERSENNE_P, dtype=np.uint64))
    return PairwiseHash(a, b, D)


def trivial_hash(m):
    """The identity hashing with D = m."""
    if m < 1:
        raise ParameterError(f"trivial hash needs m >= 1, got {m}")
    return PairwiseHash(1, 0, int(m), identity=True)


def hash_eval(h, i):
    """Hash value of index ``i`` (0-based) in [1, min(D, P)]."""
    i = int(i)
    if h.identity:
        return i + 1
    x = (i % MERSENNE_P + 1) % MERSENNE_P
    return 1 + ((h.a * x + h.b) % MERSENNE_P) % h.D


def hash_many(h, indices):
    """Vectorised ``hash_eval`` over a uint64 index array."""
    idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
    if h.identity:
        return idx + np.uint64(1)
    x = _reduce(_reduce(idx) + np.uint64(1))
    t = _reduce(_mulmod(h.a, x) + np.uint64(h.b))
    return t % np.uint64(h.D) + np.uint64(1)


def hash_family_eval(a, b, D, i):
    """Value of index ``i`` under many hashes at once, given coefficient arrays a and b."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    x = (int(i) % MERSENNE_P + 1) % MERSENNE_P
    t = _reduce(_mulmod(x, a) + b)
    return t % np.uint64(D) + np.uint64(1)


@dataclass(frozen=True)
class RademacherStream:
    """i.i.d. signs σ_i ∈ {−1, +1}, a pure function of (key, i) via SplitMix64."""

    key: int

    @classmethod
    def from_seed(cls, seed):
        return cls(seed.key())

    def __call__(self, i):
        return rademacher(self, i)

    def many(self, indices):
        return rademacher_many(self, indices)


def rademacher(stream, i):
    z = (stream.key + (int(i) + 1) * _GOLDEN) & _U64
    z = ((z ^ (z >> 30)) * _MIX1) & _U64
    z = ((z ^ (z >> 27)) * _MIX2) & _U64
    z ^= z >> 31
    return -1 if z >> 63 else 1


def rademacher_many(stream, indices):
    """Signs for a uint64 index array, as float64 ±1."""
    idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
    z = np.uint64(stream.key) + (idx + np.uint64(1)) * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return 1.0 - 2.0 * (z >> np.uint64(63)).astype(np.float64)


if __name__ == "__main__":
    seed = SeedSpec(2024)
    h = pairwise_hash_new(derive_stream(seed, "demo", 0), 16)
    print(f"h = {h}")
    print("h(0..9) =", [hash_eval(h, i) for i in range(10)])
    sigma = RademacherStream.from_seed(derive_stream(seed, "signs", 0))
    print("sigma(0..9) =", [rademacher(sigma, i) for i in range(10)])
