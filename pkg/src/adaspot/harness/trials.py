#!/usr/bin/env python3
"""
Monte Carlo trial runner, cost sweeps and the non-adaptive baseline.

Each trial owns its oracle and derives its randomness from
``SeedSpec(seed).derive("trial", t)``, so reports reproduce exactly under a
fixed master seed whatever the number of workers.
"""

import csv
import logging
import math
import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from tqdm import tqdm

from ..core import ParameterError, linf_dist
from ..measurement import CostLedger, MeasurementOracle
from ..pipeline import (
    approximate, approximate_expected, approximate_p_gt2, derive_params, predicted_cost,
    trivial_branch,
)
from ..randomness import SeedSpec, trivial_hash
from ..select import SelectParams, build_sketch, count_sketch_estimates
from ..spot import IMPLICIT, MODES, PAIRWISE, VARIANTS, kstar
from .generators import make_generator

logger = logging.getLogger(__name__)

BASELINE_MAX_DIM = 1 << 22
_BASELINE_CHUNK = 1 << 16

TRIAL_FIELDS = ["trial", "error", "failed", "n1", "n2", "n3", "total"]
SWEEP_FIELDS = ["m", "kstar", "trivial", "n1", "n2_max", "n3_max",
                "mean_n1", "mean_n2", "mean_n3", "trials"]
BASELINE_FIELDS = ["trial", "adaptive_error", "adaptive_cost",
                   "baseline_error", "baseline_cost", "baseline_R", "baseline_G"]


@dataclass(frozen=True)
class TrialConfig:
    generator: str
    p: float
    eps: float
    delta: float
    m: int
    n_trials: int
    seed: int = 0
    mode: str = IMPLICIT
    variant: str = PAIRWISE
    expected: bool = False
    workers: int = 1
    processes: bool = False

    def __post_init__(self):
        if self.n_trials < 1:
            raise ParameterError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode '{self.mode}'")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant '{self.variant}'")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    error: float
    failed: bool
    ledger: CostLedger = field(default_factory=CostLedger)

    def as_row(self):
        return {"trial": self.trial, "error": repr(self.error), "failed": int(self.failed),
                **self.ledger.as_row()}


@dataclass(frozen=True)
class TrialReport:
    """Aggregate of a batch of trials.  ``failures`` counts the bad event."""

    successes: int
    failures: int
    errors: tuple = ()
    ledgers: tuple = ()

    @classmethod
    def from_outcomes(cls, outcomes):
        failures = sum(1 for o in outcomes if o.failed)
        return cls(successes=len(outcomes) - failures, failures=failures,
                   errors=tuple(o.error for o in outcomes),
                   ledgers=tuple(o.ledger for o in outcomes))

    @classmethod
    def from_flags(cls, failed_flags):
        failures = sum(1 for f in failed_flags if f)
        return cls(successes=len(failed_flags) - failures, failures=failures)

    @property
    def n(self):
        return self.successes + self.failures

    @property
    def rate(self):
        """Empirical failure rate."""
        return self.failures / self.n if self.n else 0.0

    @property
    def success_rate(self):
        return 1.0 - self.rate if self.n else 0.0

    def half_width(self, p0=None):
        """3σ binomial half-width at probability p0 (the observed rate by default)."""
        q = self.rate if p0 is None else p0
        return 3 * math.sqrt(q * (1 - q) / self.n) if self.n else 0.0

    def within_bound(self, bound):
        """Failure rate <= bound + 3σ, σ taken at the bound."""
        return self.rate <= bound + self.half_width(bound)

    def meets_success(self, bound):
        """Success rate >= bound − 3σ, σ taken at the bound."""
        return self.success_rate >= bound - self.half_width(bound)

    @property
    def mean_error(self):
        return float(np.mean(self.errors)) if self.errors else 0.0

    @property
    def max_error(self):
        return float(np.max(self.errors)) if self.errors else 0.0

    def ledger_stats(self):
        """{stage: (min, mean, max)} over the recorded ledgers."""
        stats = {}
        for key in ("n1", "n2", "n3", "total"):
            vals = [ledger.as_row()[key] for ledger in self.ledgers]
            if vals:
                stats[key] = (min(vals), float(np.mean(vals)), max(vals))
        return stats

    def summary(self):
        lines = [
            f"trials={self.n}",
            f"successes={self.successes}",
            f"failures={self.failures}",
            f"rate={self.rate:.6f}",
            f"half_width={self.half_width():.6f}",
        ]
        if self.errors:
            lines.append(f"mean_error={self.mean_error:.6g}")
            lines.append(f"max_error={self.max_error:.6g}")
        for key, (lo, mean, hi) in self.ledger_stats().items():
            lines.append(f"{key}=min:{lo} mean:{mean:.2f} max:{hi}")
        return lines


def _run_one(config, params, gen, master, t):
    trial_seed = master.derive("trial", t)
    x = gen(config.m, config.p, trial_seed.derive("instance"))
    oracle = MeasurementOracle(x)
    algo_seed = trial_seed.derive("algo")
    if config.p > 2:
        out = approximate_p_gt2(oracle, config.p, config.eps, algo_seed, config.mode, config.variant)
    elif config.expected:
        out = approximate_expected(oracle, config.p, config.eps, algo_seed, config.mode, config.variant)
    else:
        out = approximate(oracle, params, algo_seed, config.mode)
    error = linf_dist(x, out.z)
    failed = error > config.eps
    if failed:
        logger.info("trial %d failed: error %.6g > eps %g", t, error, config.eps)
    return TrialOutcome(t, error, failed, out.ledger)


def _make_executor(workers, processes):
    if processes:
        try:
            ctx = multiprocessing.get_context("fork")
            return ProcessPoolExecutor(max_workers=workers, mp_context=ctx)
        except ValueError as e:
            logger.warning("no fork start method (%s), falling back to threads", e)
    return ThreadPoolExecutor(max_workers=workers)


def map_trials(fn, n, workers=1, progress=False, desc="trials", processes=False):
    """[fn(0), ..., fn(n − 1)], in trial order.

    With ``workers > 1`` the calls run on a thread pool, or on a forked
    process pool when ``processes`` is set; ``fn`` must then be picklable.
    """
    results = [None] * n
    with tqdm(total=n, desc=desc, disable=not progress) as pbar:
        if workers == 1:
            for t in range(n):
                results[t] = fn(t)
                pbar.update(1)
        else:
            with _make_executor(workers, processes) as executor:
                futures = {executor.submit(fn, t): t for t in range(n)}
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    pbar.update(1)
    return results


def run_trial_outcomes(config, progress=False):
    """Per-trial outcomes of ``config``."""
    gen = make_generator(config.generator)
    params = None
    if config.p <= 2 and not config.expected:
        params = derive_params(config.p, config.eps, config.delta, config.m, config.variant)
    master = SeedSpec(config.seed)
    logger.info("running %d trials of %s (m=%d, p=%g, eps=%g, delta=%g, mode=%s, workers=%d%s)",
                config.n_trials, gen, config.m, config.p, config.eps, config.delta, config.mode,
                config.workers, " processes" if config.processes else "")
    return map_trials(partial(_run_one, config, params, gen, master), config.n_trials,
                      config.workers, progress, processes=config.processes)


def run_trials(config, progress=False):
    """Run the trials and aggregate them; a trial fails iff ‖z − x‖_∞ > eps."""
    return TrialReport.from_outcomes(run_trial_outcomes(config, progress))


def sweep_cost(p, eps, delta, ms, n_trials=0, seed=0, generator="spike",
               mode=IMPLICIT, variant=PAIRWISE, progress=False):
    """One row per m: k*, predicted costs and, with n_trials > 0, measured mean ledgers."""
    rows = []
    for m in ms:
        params = derive_params(p, eps, delta, m, variant)
        n1, n2_max, n3_max = predicted_cost(params, m)
        row = {"m": m, "kstar": kstar(m), "trivial": int(trivial_branch(params, m)),
               "n1": n1, "n2_max": n2_max, "n3_max": n3_max,
               "mean_n1": "", "mean_n2": "", "mean_n3": "", "trials": n_trials}
        if n_trials > 0:
            config = TrialConfig(generator, p, eps, delta, m, n_trials, seed, mode, variant)
            stats = run_trials(config, progress).ledger_stats()
            for key in ("n1", "n2", "n3"):
                row[f"mean_{key}"] = f"{stats[key][1]:.2f}"
        rows.append(row)
    return rows


def baseline_error(x, R, G, seed):
    """‖x − est‖_∞ of the non-adaptive count sketch estimate with trivial hashing."""
    m = x.dim
    if m > BASELINE_MAX_DIM:
        raise ParameterError(f"baseline estimates every coordinate; m = {m} exceeds 2^22")
    oracle = MeasurementOracle(x)
    state = build_sketch(oracle, trivial_hash(m), SelectParams(R, G, 1, m), seed)
    dense = np.zeros(m)
    dense[x.indices.astype(np.int64)] = x.values
    worst = 0.0
    for start in range(0, m, _BASELINE_CHUNK):
        idx = np.arange(start, min(m, start + _BASELINE_CHUNK), dtype=np.uint64)
        est = count_sketch_estimates(state, idx)
        worst = max(worst, float(np.max(np.abs(dense[start:start + idx.size] - est))))
    return worst, oracle.cost_report().total


def _matched_shape(budget, R):
    R = max(1, min(R, budget))
    if R % 2 == 0:
        R -= 1
    return R, max(1, budget // R)


def baseline_compare(p, eps, delta, m, n_trials, seed=0, generator="two-level:k1=2,gamma=2",
                     mode=IMPLICIT, variant=PAIRWISE, R=None, G=None, progress=False):
    """Adaptive pipeline vs count sketch estimates at a matched measurement budget.

    Without explicit R and G the baseline gets R from the pipeline and as many
    groups as the adaptive run's total cost allows.
    """
    params = derive_params(p, eps, delta, m, variant)
    gen = make_generator(generator)
    master = SeedSpec(seed)

    def one(t):
        trial_seed = master.derive("trial", t)
        x = gen(m, p, trial_seed.derive("instance"))
        out = approximate(MeasurementOracle(x), params, trial_seed.derive("algo"), mode)
        if R is not None and G is not None:
            R_b, G_b = R, G
        else:
            R_b, G_b = _matched_shape(out.ledger.total, params.R if R is None else R)
        b_err, b_cost = baseline_error(x, R_b, G_b, trial_seed.derive("baseline"))
        return {"trial": t, "adaptive_error": repr(linf_dist(x, out.z)),
                "adaptive_cost": out.ledger.total, "baseline_error": repr(b_err),
                "baseline_cost": b_cost, "baseline_R": R_b, "baseline_G": G_b}

    return map_trials(one, n_trials, 1, progress, desc="baseline")


def write_csv(rows, fieldnames, out=None):
    """Write rows with a single header line to a path, a file object or stdout."""
    if out is None or out == "-":
        _write_rows(sys.stdout, rows, fieldnames)
    elif hasattr(out, "write"):
        _write_rows(out, rows, fieldnames)
    else:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            _write_rows(fh, rows, fieldnames)


def _write_rows(fh, rows, fieldnames):
    writer = csv.DictWriter(fh, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
