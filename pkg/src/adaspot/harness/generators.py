#!/usr/bin/env python3
"""
Instance generators for the adaspot harness.

Every generator returns a ``SparseVector`` with ‖x‖_p <= 1.  Generators that
place entries at random positions take a ``SeedSpec``; without one the
entries sit on the first indices of [m].

``make_generator`` turns a spec string such as ``two-level:k1=2,gamma=2``
into a callable ``gen(m, p, seed)`` used by the trial runner and the CLI.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import ParameterError, SparseVector, lp_norm

logger = logging.getLogger(__name__)

DENSE_MAX_DIM = 1 << 20
NORM_SLACK = 1e-12


def _distinct_indices(m, s, seed=None, exclude=()):
    """s distinct indices of [m] avoiding ``exclude``: random with a seed, else the first ones."""
    exclude = {int(i) for i in exclude}
    if s + len(exclude) > m:
        raise ParameterError(f"cannot place {s} entries in dimension {m}")
    if seed is None:
        out = []
        i = 0
        while len(out) < s:
            if i not in exclude:
                out.append(i)
            i += 1
        return out
    rng = seed.generator()
    chosen = set()
    out = []
    while len(out) < s:
        draw = rng.integers(0, m - 1, size=s - len(out), dtype=np.uint64, endpoint=True)
        for i in draw.tolist():
            if i not in chosen and i not in exclude:
                chosen.add(i)
                out.append(i)
    return out[:s]


def gen_zero(m):
    return SparseVector.zero(m)


def gen_spike(m, j, value=1.0):
    """value·e_j."""
    return SparseVector(m, {int(j): value})


def spot_instance(m, j, noise=0.0, width=4):
    """e_j plus ℓ2 noise ``noise`` spread evenly over the ``width`` indices after j."""
    if width >= m:
        raise ParameterError(f"noise width {width} needs m > {width}, got {m}")
    entries = {int(j): 1.0}
    if noise:
        for i in range(1, width + 1):
            entries[(j + i) % m] = noise / math.sqrt(width)
    return SparseVector(m, entries)


def gen_hash_adversary(m, alpha, D, p, j, xj=0.0, seed=None):
    """r = ⌊alpha·D⌋ entries of value r^(-1/p) away from j, plus x_j = xj.

    ‖x_{[m]∖{j}}‖_p = 1, and the bucket of j breaks the hashing tail bound as
    soon as two of the r entries collide with j.
    """
    r = math.floor(alpha * D)
    if r < 1:
        raise ParameterError(f"r = floor(alpha * D) = floor({alpha} * {D}) = 0")
    if j < 0 or j >= m:
        raise ParameterError(f"index j = {j} outside [0, {m})")
    value = r ** (-1.0 / p)
    entries = {i: value for i in _distinct_indices(m, r, seed, exclude=(j,))}
    if xj:
        entries[int(j)] = xj
    return SparseVector(m, entries)


def two_level_sizes(k1, gamma, p):
    """(heavy value, k2, light value) of the two-level instance."""
    heavy = (2 * k1) ** (-1.0 / p)
    k2 = math.floor(2 * k1 * (gamma / 2) ** p)
    return heavy, k2, heavy / gamma


def gen_two_level(m, k1, gamma, p, seed=None):
    """k1 entries at (2k1)^(-1/p) and k2 = ⌊2k1(gamma/2)^p⌋ entries gamma-fold smaller."""
    if k1 < 1:
        raise ParameterError(f"k1 must be >= 1, got {k1}")
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    heavy, k2, light = two_level_sizes(k1, gamma, p)
    if k1 + k2 > m:
        raise ParameterError(f"k1 + floor(2*k1*(gamma/2)^p) = {k1 + k2} exceeds m = {m}")
    idx = _distinct_indices(m, k1 + k2, seed)
    entries = {i: heavy for i in idx[:k1]}
    entries.update({i: light for i in idx[k1:]})
    return SparseVector(m, entries)


def gen_dense_tail(m, k1, p):
    """k1 spikes at (2k1)^(-1/p), every other entry at (2m)^(-1/p)."""
    if m > DENSE_MAX_DIM:
        raise ParameterError(f"dense tail instances need m <= 2^20, got {m}")
    if not 1 <= k1 < m:
        raise ParameterError(f"need 1 <= k1 < m, got k1={k1}, m={m}")
    values = np.full(m, (2 * m) ** (-1.0 / p))
    values[:k1] = (2 * k1) ** (-1.0 / p)
    return SparseVector.from_arrays(m, np.arange(m, dtype=np.uint64), values)


def gen_random_unit(m, s, p, seed):
    """s random indices with Gaussian signed magnitudes, rescaled to ‖x‖_p = 1."""
    if not 1 <= s <= m:
        raise ParameterError(f"need 1 <= s <= m, got s={s}, m={m}")
    idx = _distinct_indices(m, s, seed.derive("support"))
    values = seed.derive("values").generator().standard_normal(s)
    values[values == 0] = 1.0
    x = SparseVector.from_arrays(m, idx, values)
    return x.scale(1.0 / lp_norm(x, p))


def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


@dataclass(frozen=True)
class Generator:
    """A parsed generator spec; call it as ``gen(m, p, seed)``."""

    kind: str
    options: dict = field(default_factory=dict)

    def __call__(self, m, p, seed=None):
        opts = self.options
        if self.kind == "zero":
            return gen_zero(m)
        if self.kind == "spike":
            if "j" in opts:
                j = opts["j"]
            elif seed is None:
                j = 0
            else:
                j = _distinct_indices(m, 1, seed.derive("spike"))[0]
            return gen_spike(m, j, opts.get("value", 1.0))
        if self.kind == "two-level":
            return gen_two_level(m, opts.get("k1", 2), opts.get("gamma", 2.0), p, seed)
        if self.kind == "random":
            if seed is None:
                raise ParameterError("random instances need a seed")
            return gen_random_unit(m, opts.get("s", 50), p, seed)
        if self.kind == "adversary":
            return gen_hash_adversary(m, opts.get("alpha", 0.1), opts.get("D", 1000), p,
                                      opts.get("j", 0), opts.get("xj", 0.0), seed)
        if self.kind == "dense-tail":
            return gen_dense_tail(m, opts.get("k1", 1), p)
        raise ParameterError(f"unknown generator '{self.kind}'")

    def __str__(self):
        if not self.options:
            return self.kind
        return self.kind + ":" + ",".join(f"{k}={v}" for k, v in self.options.items())


GENERATOR_KINDS = ("zero", "spike", "two-level", "random", "adversary", "dense-tail")


def make_generator(spec):
    """Parse ``kind[:key=value,...]``."""
    kind, _, rest = spec.strip().partition(":")
    if kind not in GENERATOR_KINDS:
        raise ParameterError(f"unknown generator '{kind}', expected one of {', '.join(GENERATOR_KINDS)}")
    options = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ParameterError(f"generator option '{item}' is not key=value")
        try:
            options[key.strip()] = _parse_value(value.strip())
        except ValueError:
            raise ParameterError(f"generator option '{item}' has a non-numeric value")
    return Generator(kind, options)


def check_unit_ball(x, p):
    """Raise if ‖x‖_p exceeds 1 by more than rounding."""
    norm = lp_norm(x, p)
    if norm > 1 + NORM_SLACK:
        raise ParameterError(f"generated instance has norm {norm} > 1")
    return norm


if __name__ == "__main__":
    for spec in ("spike:j=3", "two-level:k1=2,gamma=2", "dense-tail:k1=1"):
        x = make_generator(spec)(16, 1.0)
        print(f"{spec}: {x}  norm={lp_norm(x, 1.0):.6f}")
