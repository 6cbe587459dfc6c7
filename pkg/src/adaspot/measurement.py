#!/usr/bin/env python3
"""
Measurement module for the adaspot library.

``MeasurementOracle`` is the only way an algorithm sees the hidden vector.
Every linear functional and every entry query is charged to a ``CostLedger``
under the pipeline stage that asked for it.

Coefficient functions are pure functions of the index.  The oracle evaluates
them on the support of the hidden vector only, which gives the same value as
the sum over the whole domain since all other entries are zero.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .core import DimensionError

logger = logging.getLogger(__name__)


class Stage(IntEnum):
    """Pipeline stages an access can be charged to."""
    SELECT = 1
    SPOT = 2
    QUERY = 3


@dataclass(frozen=True)
class CostLedger:
    """Counts of functionals per stage: select sketch, spotting, entry queries."""

    n1: int = 0
    n2: int = 0
    n3: int = 0

    @property
    def total(self):
        return self.n1 + self.n2 + self.n3

    def as_row(self):
        return {"n1": self.n1, "n2": self.n2, "n3": self.n3, "total": self.total}

    def __add__(self, other):
        return CostLedger(self.n1 + other.n1, self.n2 + other.n2, self.n3 + other.n3)

    def __str__(self):
        return f"n1={self.n1} n2={self.n2} n3={self.n3} total={self.total}"


class MeasurementOracle:
    """Access path to a hidden ``SparseVector``."""

    def __init__(self, hidden):
        self._hidden = hidden
        self._counts = [0, 0, 0]
        self._scaled = None

    @property
    def dim(self):
        return self._hidden.dim

    def _charge(self, stage):
        self._counts[Stage(stage) - 1] += 1

    def measure(self, coeff, stage):
        """Evaluate Σ coeff(i)·x_i in double precision.

        ``coeff`` maps a uint64 index array to a float array of coefficients.
        """
        self._charge(stage)
        idx = self._hidden.indices
        if idx.size == 0:
            return 0.0
        c = np.asarray(coeff(idx), dtype=np.float64)
        return float(np.dot(c, self._hidden.values))

    def _integer_values(self):
        # x_i = n_i / den with a common power-of-two denominator
        if self._scaled is None:
            ratios = [v.as_integer_ratio() for v in self._hidden.values.tolist()]
            den = max((d for _, d in ratios), default=1)
            self._scaled = ([n * (den // d) for n, d in ratios], den)
        return self._scaled

    def measure_exact(self, coeff, stage, denominator=1):
        """Evaluate Σ coeff(i)·x_i / denominator exactly.

        ``coeff`` maps a uint64 index array to integer coefficients (a list of
        Python ints or an integer array).  Returns a ``Fraction``.
        """
        self._charge(stage)
        idx = self._hidden.indices
        if idx.size == 0:
            return Fraction(0)
        c = coeff(idx)
        c = c.tolist() if isinstance(c, np.ndarray) else list(c)
        nums, den = self._integer_values()
        total = 0
        for ci, ni in zip(c, nums):
            if ci:
                total += int(ci) * ni
        return Fraction(total, den * denominator)

    def query_entry(self, i):
        """Return x_i exactly."""
        if i < 0 or i >= self._hidden.dim:
            raise DimensionError(f"entry query {i} out of range for dimension {self._hidden.dim}")
        self._charge(Stage.QUERY)
        return self._hidden.get(i)

    def cost_report(self):
        """Snapshot of the ledger."""
        return CostLedger(*self._counts)

    def __str__(self):
        return f"MeasurementOracle(dim={self.dim}, {self.cost_report()})"


def measure(oracle, coeff, stage):
    return oracle.measure(coeff, stage)


def query_entry(oracle, i):
    return oracle.query_entry(i)


def cost_report(oracle):
    return oracle.cost_report()
