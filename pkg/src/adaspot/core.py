#!/usr/bin/env python3
"""
Core module for the adaspot library.

Holds the error hierarchy and the two value types every other module works
with: ``SparseVector`` (a vector over the index domain [m], stored by its
nonzero support) and ``IndexSet`` (a sorted set of indices).  Indices are
0-based in memory and 1-based in vector files.
"""

import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

MAX_DIM = 2 ** 64


class AdaSpotError(Exception):
    """Base class for all adaspot errors."""
    pass


class DimensionError(AdaSpotError):
    """Dimension mismatch or index out of range."""
    pass


class ParameterError(AdaSpotError):
    """Invalid or overflowing algorithm parameters."""
    pass


class VectorFormatError(AdaSpotError):
    """Malformed vector file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _as_index_array(indices):
    """Convert an iterable of non-negative integers to a uint64 array."""
    if isinstance(indices, np.ndarray):
        if indices.dtype == np.uint64:
            return indices
        if indices.size and indices.min() < 0:
            raise DimensionError("negative index")
        return indices.astype(np.uint64)
    values = [int(i) for i in indices]
    for i in values:
        if i < 0 or i >= MAX_DIM:
            raise DimensionError(f"index {i} outside [0, 2^64)")
    return np.array(values, dtype=np.uint64)


class IndexSet:
    """Sorted set of indices without duplicates."""

    __slots__ = ("_items",)

    def __init__(self, indices=()):
        arr = _as_index_array(indices)
        self._items = np.unique(arr)

    @classmethod
    def _from_sorted(cls, arr):
        obj = cls.__new__(cls)
        obj._items = arr
        return obj

    @property
    def array(self):
        """The members as a sorted uint64 array (do not mutate)."""
        return self._items

    def __len__(self):
        return int(self._items.size)

    def __iter__(self):
        return iter(self._items.tolist())

    def __contains__(self, index):
        if index < 0 or index >= MAX_DIM:
            return False
        pos = np.searchsorted(self._items, np.uint64(index))
        return bool(pos < self._items.size and self._items[pos] == np.uint64(index))

    def __eq__(self, other):
        if isinstance(other, IndexSet):
            return np.array_equal(self._items, other._items)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self))

    def union(self, other):
        return IndexSet._from_sorted(np.union1d(self._items, other.array))

    def issubset(self, other):
        return bool(np.isin(self._items, other.array).all())

    def max(self):
        return int(self._items[-1]) if self._items.size else None

    def __repr__(self):
        shown = self._items[:8].tolist()
        more = ", ..." if self._items.size > 8 else ""
        return f"IndexSet({shown}{more})"


class SparseVector:
    """A vector of dimension ``dim`` stored by its nonzero entries.

    Zero values are dropped at construction, every stored index is below
    ``dim`` and every value is finite.  Instances are immutable.
    """

    __slots__ = ("_dim", "_indices", "_values")

    def __init__(self, dim, entries=None):
        dim = int(dim)
        if dim < 1 or dim > MAX_DIM:
            raise DimensionError(f"dimension {dim} outside [1, 2^64]")
        if entries is None:
            pairs = []
        elif isinstance(entries, dict):
            pairs = list(entries.items())
        else:
            pairs = list(entries)
            seen = set()
            for i, _ in pairs:
                if i in seen:
                    raise DimensionError(f"duplicate index {i}")
                seen.add(i)
        for i, v in pairs:
            if i < 0 or i >= dim:
                raise DimensionError(f"index {i} out of range for dimension {dim}")
            if not math.isfinite(v):
                raise ParameterError(f"non-finite value {v} at index {i}")
        pairs = [(int(i), float(v)) for i, v in pairs if v != 0]
        pairs.sort()
        self._dim = dim
        self._indices = np.array([i for i, _ in pairs], dtype=np.uint64)
        self._values = np.array([v for _, v in pairs], dtype=np.float64)

    @classmethod
    def from_arrays(cls, dim, indices, values):
        """Build from parallel index/value arrays (indices must be distinct)."""
        indices = _as_index_array(indices)
        values = np.asarray(values, dtype=np.float64)
        if indices.shape != values.shape:
            raise DimensionError("index and value arrays differ in length")
        if np.unique(indices).size != indices.size:
            raise DimensionError("duplicate index")
        if indices.size and int(indices.max()) >= dim:
            raise DimensionError(f"index {int(indices.max())} out of range for dimension {dim}")
        if not np.isfinite(values).all():
            raise ParameterError("non-finite value")
        keep = values != 0
        order = np.argsort(indices[keep], kind="stable")
        obj = cls.__new__(cls)
        obj._dim = int(dim)
        obj._indices = indices[keep][order]
        obj._values = values[keep][order]
        return obj

    @classmethod
    def zero(cls, dim):
        return cls(dim)

    @property
    def dim(self):
        return self._dim

    @property
    def indices(self):
        """Support indices as a sorted uint64 array."""
        return self._indices

    @property
    def values(self):
        """Values aligned with ``indices``."""
        return self._values

    def nnz(self):
        return int(self._indices.size)

    def support(self):
        return IndexSet._from_sorted(self._indices)

    def get(self, i):
        """Return x_i (0.0 outside the support)."""
        if i < 0 or i >= self._dim:
            raise DimensionError(f"index {i} out of range for dimension {self._dim}")
        pos = np.searchsorted(self._indices, np.uint64(i))
        if pos < self._indices.size and self._indices[pos] == np.uint64(i):
            return float(self._values[pos])
        return 0.0

    def items(self):
        return zip(self._indices.tolist(), self._values.tolist())

    def to_dict(self):
        return dict(self.items())

    def scale(self, t):
        """Return t·x."""
        return SparseVector.from_arrays(self._dim, self._indices, self._values * float(t))

    def __neg__(self):
        return self.scale(-1.0)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self._dim == other._dim
                and np.array_equal(self._indices, other._indices)
                and np.array_equal(self._values, other._values))

    def __repr__(self):
        head = ", ".join(f"{i}: {v:g}" for i, v in list(self.items())[:6])
        more = ", ..." if self.nnz() > 6 else ""
        return f"SparseVector(dim={self._dim}, {{{head}{more}}})"


def _check_p(p):
    if not math.isfinite(p) or p < 1:
        raise ParameterError(f"norm exponent p must be finite and >= 1, got {p}")


def _check_same_dim(x, z):
    if x.dim != z.dim:
        raise DimensionError(f"dimension mismatch: {x.dim} != {z.dim}")


def lp_norm(x, p):
    """(Σ|x_i|^p)^{1/p} over the support."""
    _check_p(p)
    if x.nnz() == 0:
        return 0.0
    a = np.abs(x.values)
    if p == 1:
        return float(math.fsum(a))
    if p == 2:
        return float(np.linalg.norm(a))
    # Rescale by the maximum so that |x_i|^p neither underflows nor overflows.
    top = float(a.max())
    return top * float(np.sum((a / top) ** p)) ** (1.0 / p)


def linf_norm(x):
    return float(np.abs(x.values).max()) if x.nnz() else 0.0


def _difference(x, z):
    _check_same_dim(x, z)
    idx = np.union1d(x.indices, z.indices)
    xv = np.zeros(idx.size)
    zv = np.zeros(idx.size)
    xv[np.searchsorted(idx, x.indices)] = x.values
    zv[np.searchsorted(idx, z.indices)] = z.values
    return idx, xv - zv


def linf_dist(x, z):
    """max_i |x_i − z_i| over the union of supports."""
    _, diff = _difference(x, z)
    return float(np.abs(diff).max()) if diff.size else 0.0


def lq_error(x, z, q):
    """ℓ_q norm of x − z, q in [1, ∞]."""
    if q == math.inf:
        return linf_dist(x, z)
    _check_p(q)
    idx, diff = _difference(x, z)
    return lp_norm(SparseVector.from_arrays(x.dim, idx, diff), q)


def project(x, K):
    """x restricted to the index set K (zero elsewhere)."""
    if len(K) and K.max() >= x.dim:
        raise DimensionError(f"index {K.max()} out of range for dimension {x.dim}")
    keep = np.isin(x.indices, K.array)
    return SparseVector.from_arrays(x.dim, x.indices[keep], x.values[keep])


def heavy_set(x, eps):
    """Indices with |x_i| >= eps."""
    return IndexSet._from_sorted(x.indices[np.abs(x.values) >= eps])


def read_vector(path):
    """Read a vector file.

    Format: a header ``m <dim> p <p>`` followed by ``<index> <value>`` lines
    with 1-based indices.  Blank lines and ``#`` comments are ignored.
    Returns ``(x, p)``.
    """
    dim = None
    p = None
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if dim is None:
                if len(fields) != 4 or fields[0] != "m" or fields[2] != "p":
                    raise VectorFormatError(f"expected 'm <dim> p <p>', got '{line}'", lineno)
                try:
                    dim = int(fields[1])
                    p = float(fields[3])
                except ValueError:
                    raise VectorFormatError(f"bad header '{line}'", lineno)
                if dim < 1 or dim > MAX_DIM:
                    raise VectorFormatError(f"dimension {dim} outside [1, 2^64]", lineno)
                continue
            if len(fields) != 2:
                raise VectorFormatError(f"expected '<index> <value>', got '{line}'", lineno)
            try:
                index = int(fields[0])
                value = float(fields[1])
            except ValueError:
                raise VectorFormatError(f"cannot parse '{line}'", lineno)
            if index < 1 or index > dim:
                raise VectorFormatError(f"index {index} outside [1, {dim}]", lineno)
            if not math.isfinite(value):
                raise VectorFormatError(f"non-finite value '{fields[1]}'", lineno)
            if index - 1 in entries:
                raise VectorFormatError(f"duplicate index {index}", lineno)
            entries[index - 1] = value
    if dim is None:
        raise VectorFormatError("missing header")
    logger.debug("read %d entries of a vector of dimension %d from %s", len(entries), dim, path)
    return SparseVector(dim, entries), p


def write_vector(x, p, path):
    """Write ``x`` in the vector file format (1-based indices)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"m {x.dim} p {p!r}\n")
        for i, v in x.items():
            fh.write(f"{i + 1} {v!r}\n")


if __name__ == "__main__":
    # Main guard for testing core functionality.
    x = SparseVector(10, {1: 3.0, 2: 4.0})
    print(f"x = {x}")
    print(f"||x||_2 = {lp_norm(x, 2)}")
    print(f"heavy(0.5) = {heavy_set(x, 3.5)}")
