#!/usr/bin/env python3
"""
The three-stage approximation algorithm.

1. Finding important buckets: hash [m] → [D] and select k buckets with the
   partition count sketch (or, when D >= m, use the trivial hashing so that
   buckets are single coordinates).
2. Spotting heavy hitters: run spot on each selected bucket.
3. Output: query the entries of the spotted coordinates directly.

With ``derive_params`` the output z satisfies Pr(‖z − x‖_∞ > eps) <= delta
for every ‖x‖_p <= 1, 1 <= p <= 2.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import DimensionError, IndexSet, ParameterError, SparseVector
from .measurement import CostLedger
from .randomness import hash_many, pairwise_hash_new, trivial_hash
from .select import SelectParams, build_sketch, select
from .spot import (
    EXPLICIT, IMPLICIT, MAX_HASH_RANGE, MODES, PAIRWISE, VARIANTS,
    CandidateSet, kstar, spot,
)

logger = logging.getLogger(__name__)

EXPLICIT_MAX_DIM = 1 << 26
_ENUM_CHUNK = 1 << 20


@dataclass(frozen=True)
class AlgoParams:
    """Derived constants for one (p, eps, delta, m) instance."""

    p: float
    eps: float
    delta: float
    m: int
    variant: str
    k0: int
    alpha: float
    gamma: float
    D: int
    R: int
    G: int
    k: int
    delta0: float
    delta1: float

    def as_rows(self):
        return [
            ("p", self.p), ("eps", self.eps), ("delta", self.delta), ("m", self.m),
            ("variant", self.variant), ("k0", self.k0), ("alpha", self.alpha),
            ("gamma", self.gamma), ("D", self.D), ("R", self.R), ("G", self.G),
            ("k", self.k), ("delta0", self.delta0), ("delta1", self.delta1),
        ]


@dataclass
class ApproxOutput:
    """Approximation z, selected coordinates K, ledger and per-stage diagnostics."""

    z: SparseVector
    K: IndexSet
    ledger: CostLedger
    params: AlgoParams
    trivial_branch: bool = False
    buckets: IndexSet = field(default_factory=IndexSet)
    spot_outcomes: dict = field(default_factory=dict)


def _gamma_power(gamma_sq, p):
    # exact for p = 1 and p = 2 whenever gamma^2 is an exact float
    if p == 2:
        return gamma_sq
    if p == 1:
        return math.sqrt(gamma_sq)
    return gamma_sq ** (p / 2)


def derive_params(p, eps, delta, m, variant=PAIRWISE):
    """All algorithm constants for approximating ‖x‖_p <= 1 to eps with confidence 1 − delta."""
    if not 1 <= p <= 2:
        raise ParameterError(f"p must lie in [1, 2], got {p}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    if variant not in VARIANTS:
        raise ParameterError(f"unknown variant '{variant}'")
    k0 = math.floor(eps ** -p)
    alpha = delta / (2 * k0)
    delta0 = delta / 4
    delta1 = delta / 4
    if variant == PAIRWISE:
        gamma_sq = 2049 ** 2 * 2 / alpha ** 3
    else:
        gamma_sq = 1025 ** 2 * 2 * math.log(16 / alpha) / alpha ** 2
    raw_D = _gamma_power(gamma_sq, p) / eps ** p * k0 / delta0
    if not math.isfinite(raw_D) or raw_D > MAX_HASH_RANGE:
        raise ParameterError(f"D = ceil((gamma/eps)^p * k0 / delta0) = {raw_D:.3g} exceeds 2^63")
    D = math.ceil(raw_D)
    R = 2 * math.ceil(math.log2(D / (2 * delta1)) - 0.5) + 1
    k = math.floor(2 ** (7 * p / 2) * eps ** -p)
    if k > MAX_HASH_RANGE:
        raise ParameterError(f"k = floor(2^(7p/2) * eps^-p) = {k} exceeds 2^63")
    return AlgoParams(p=p, eps=eps, delta=delta, m=int(m), variant=variant, k0=k0,
                      alpha=alpha, gamma=math.sqrt(gamma_sq), D=D, R=R, G=4 * k, k=k,
                      delta0=delta0, delta1=delta1)


def trivial_branch(params, m=None):
    """Whether D >= m, i.e. buckets are single coordinates."""
    return params.D >= (params.m if m is None else m)


def predicted_cost(params, m=None):
    """(n1, n2_max, n3_max) for a run on dimension m.

    n2_max is the spot bound k·(2k*(m) + 2); a run in the trivial-hash branch
    charges no stage-2 functionals at all.
    """
    m = params.m if m is None else int(m)
    return params.R * params.G, params.k * (2 * kstar(m) + 2), params.k


def bucket_members(bucket_hash, ids, m, chunk=_ENUM_CHUNK):
    """Enumerate {i in [m] : bucket_hash(i) = d} for each d in ids."""
    if m > EXPLICIT_MAX_DIM:
        raise ParameterError(f"explicit mode enumerates [m]; m = {m} exceeds 2^26, use implicit mode")
    wanted = np.asarray(list(ids), dtype=np.uint64)
    found = {int(d): [] for d in wanted.tolist()}
    for start in range(0, m, chunk):
        idx = np.arange(start, min(m, start + chunk), dtype=np.uint64)
        values = hash_many(bucket_hash, idx)
        hit = np.isin(values, wanted)
        for i, d in zip(idx[hit].tolist(), values[hit].tolist()):
            found[d].append(i)
    return {d: IndexSet(members) for d, members in found.items()}


def approximate(oracle, params, seed, mode=IMPLICIT):
    """Run the three stages on the hidden vector behind ``oracle``."""
    m = oracle.dim
    if m != params.m:
        raise DimensionError(f"oracle dimension {m} differs from params.m = {params.m}")
    if mode not in MODES:
        raise ParameterError(f"unknown mode '{mode}'")

    is_trivial = trivial_branch(params, m)
    if is_trivial:
        bucket_hash = trivial_hash(m)
        D, k = m, min(params.k, m)
    else:
        bucket_hash = pairwise_hash_new(seed.derive("bucket-hash"), params.D)
        D, k = params.D, params.k
    sel = SelectParams(params.R, params.G, k, D)
    state = build_sketch(oracle, bucket_hash, sel, seed.derive("select"))
    buckets = select(state, k)
    logger.info("stage 1: %d buckets selected out of %d%s", len(buckets), D,
                " (trivial hashing)" if is_trivial else "")

    outcomes = {}
    if is_trivial:
        K = IndexSet([d - 1 for d in buckets])
    else:
        if mode == EXPLICIT:
            members = bucket_members(bucket_hash, buckets, m)
        K = IndexSet()
        for d in buckets:
            if mode == EXPLICIT:
                J = CandidateSet.explicit(members[d])
            else:
                J = CandidateSet.implicit(bucket_hash, d)
            found = spot(oracle, J, params.alpha, m, mode, seed.derive("spot", d))
            outcomes[d] = tuple(found)
            K = K.union(found)
        logger.info("stage 2: %d coordinates spotted", len(K))

    z = SparseVector(m, {i: oracle.query_entry(i) for i in K})
    ledger = oracle.cost_report()
    logger.info("stage 3: done, %s", ledger)
    return ApproxOutput(z=z, K=K, ledger=ledger, params=params, trivial_branch=is_trivial,
                        buckets=buckets, spot_outcomes=outcomes)


def approximate_expected(oracle, p, eps, seed, mode=IMPLICIT, variant=PAIRWISE):
    """Approximation with E‖z − x‖_∞ <= eps: the probabilistic method at (eps/2, eps/2)."""
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    params = derive_params(p, eps / 2, eps / 2, oracle.dim, variant)
    return approximate(oracle, params, seed, mode)


def reduced_eps(p, eps, m):
    """eps' = m^-(1/2 − 1/p)·eps, the ℓ2 accuracy that serves ℓ_p with p > 2."""
    if not (2 < p < math.inf):
        raise ParameterError(f"p must lie in (2, inf), got {p}")
    eps_prime = float(m) ** -(0.5 - 1 / p) * eps
    if not 0 < eps_prime < 1:
        raise ParameterError(f"eps' = m^-(1/2 - 1/p) * eps = {eps_prime} outside (0, 1)")
    return eps_prime


def approximate_p_gt2(oracle, p, eps, seed, mode=IMPLICIT, variant=PAIRWISE):
    """Approximation for p > 2 via the ℓ2 method at accuracy eps'."""
    return approximate_expected(oracle, 2, reduced_eps(p, eps, oracle.dim), seed, mode, variant)
