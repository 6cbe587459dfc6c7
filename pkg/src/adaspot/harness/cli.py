#!/usr/bin/env python3
"""
Command line interface for adaspot.

Usage:
    adaspot params --p 1 --eps 0.25 --delta 0.25 --m 2^40
    adaspot run --vector x.txt --eps 0.25 --delta 0.25 --seed 7
    adaspot trials --generator spike --p 1 --eps 0.25 --delta 0.25 --m 2^20 --n-trials 500
    adaspot sweep --p 1 --eps 0.25 --delta 0.25 --m 2^16 2^32 2^48 2^64
    adaspot baseline --p 1 --eps 0.5 --delta 0.5 --m 4096 --n-trials 20
    adaspot gen --generator two-level:k1=2,gamma=2 --m 1024 --p 1 --out x.txt
    adaspot lemma hash --alpha 0.1 --D 1000 --p 1
    adaspot lemma hash --alpha 0.1 --D 1000 --p 1 --inclusive
"""

import argparse
import logging
import sys

from ..core import AdaSpotError, IndexSet, linf_dist, read_vector, write_vector
from ..measurement import MeasurementOracle
from ..pipeline import approximate, approximate_p_gt2, derive_params, predicted_cost
from ..randomness import SeedSpec, pairwise_hash_new
from ..spot import EXPLICIT, IMPLICIT, MODES, PAIRWISE, VARIANTS, CandidateSet, kstar
from .generators import gen_hash_adversary, make_generator, spot_instance
from .lemmas import (
    adversary_collision_rate, hash_lemma_trials, select_lemma_trials, spot_lemma_trials,
)
from .trials import (
    BASELINE_FIELDS, SWEEP_FIELDS, TRIAL_FIELDS, TrialConfig, TrialReport,
    baseline_compare, run_trial_outcomes, sweep_cost, write_csv,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


def parse_int(text):
    """Integers written plainly or as powers such as 2^40 or 2**40."""
    text = text.strip()
    for sep in ("^", "**"):
        if sep in text:
            base, _, exp = text.partition(sep)
            try:
                return int(base) ** int(exp)
            except ValueError:
                break
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: '{text}'")


def setup_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _add_problem_args(parser, need_m=True):
    parser.add_argument("--p", type=float, default=1.0, help="norm exponent of the unit ball")
    parser.add_argument("--eps", type=float, required=True, help="uniform accuracy")
    parser.add_argument("--delta", type=float, default=0.25, help="failure probability")
    if need_m:
        parser.add_argument("--m", type=parse_int, required=True, help="dimension, e.g. 2^40")
    parser.add_argument("--variant", choices=VARIANTS, default=PAIRWISE,
                        help="heavy hitter constant of the spot stage")


def _add_trial_args(parser):
    parser.add_argument("--n-trials", type=int, default=100, help="number of Monte Carlo trials")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--mode", choices=MODES, default=IMPLICIT, help="candidate set representation")
    parser.add_argument("--out", default=None, help="CSV output file (stdout if '-')")


def cmd_params(args):
    params = derive_params(args.p, args.eps, args.delta, args.m, args.variant)
    for key, value in params.as_rows():
        print(f"{key}={value}")
    n1, n2_max, n3_max = predicted_cost(params, args.m)
    print(f"kstar={kstar(args.m)}")
    print(f"n1={n1}")
    print(f"n2_max={n2_max}")
    print(f"n3_max={n3_max}")
    return 0


def cmd_run(args):
    x, file_p = read_vector(args.vector)
    p = file_p if args.p is None else args.p
    oracle = MeasurementOracle(x)
    seed = SeedSpec(args.seed)
    if p > 2:
        out = approximate_p_gt2(oracle, p, args.eps, seed, args.mode, args.variant)
    else:
        params = derive_params(p, args.eps, args.delta, x.dim, args.variant)
        out = approximate(oracle, params, seed, args.mode)
    print("K=" + " ".join(str(i + 1) for i in out.K))
    print(f"error={linf_dist(x, out.z)!r}")
    for key, value in out.ledger.as_row().items():
        print(f"{key}={value}")
    return 0


def cmd_trials(args):
    config = TrialConfig(args.generator, args.p, args.eps, args.delta, args.m, args.n_trials,
                         args.seed, args.mode, args.variant, args.expected, args.workers,
                         args.processes)
    outcomes = run_trial_outcomes(config, progress=args.progress)
    report = TrialReport.from_outcomes(outcomes)
    for line in report.summary():
        print(line)
    bound = args.eps if args.expected else args.delta
    if args.expected:
        print(f"within_bound={int(report.mean_error <= bound)}")
    else:
        print(f"within_bound={int(report.within_bound(bound))}")
    if args.out:
        write_csv([o.as_row() for o in outcomes], TRIAL_FIELDS, args.out)
    return 0


def cmd_sweep(args):
    rows = sweep_cost(args.p, args.eps, args.delta, args.m, args.n_trials, args.seed,
                      args.generator, args.mode, args.variant, args.progress)
    write_csv(rows, SWEEP_FIELDS, args.out)
    return 0


def cmd_baseline(args):
    rows = baseline_compare(args.p, args.eps, args.delta, args.m, args.n_trials, args.seed,
                            args.generator, args.mode, args.variant, args.R, args.G, args.progress)
    write_csv(rows, BASELINE_FIELDS, args.out)
    return 0


def cmd_gen(args):
    x = make_generator(args.generator)(args.m, args.p, SeedSpec(args.seed))
    write_vector(x, args.p, args.out)
    print(f"wrote {x.nnz()} entries of dimension {x.dim} to {args.out}")
    return 0


def cmd_lemma(args):
    if args.which == "hash":
        x = gen_hash_adversary(args.m, args.alpha, args.D, args.p, args.j)
        report = hash_lemma_trials(x, args.j, args.alpha, args.D, args.p, args.n, args.seed,
                                   strict=not args.inclusive)
        if args.inclusive:
            bound = adversary_collision_rate(args.alpha, args.D)
            ok = abs(report.rate - bound) <= report.half_width(bound)
        else:
            bound = args.alpha
            ok = report.within_bound(bound)
    elif args.which == "select":
        seed = SeedSpec(args.seed)
        x = make_generator(args.generator)(args.m, args.p, seed.derive("instance"))
        bucket_hash = pairwise_hash_new(seed.derive("bucket-hash"), args.D)
        report = select_lemma_trials(x, bucket_hash, args.eps, args.delta1, args.p, args.n, args.seed)
        bound = args.delta1
        ok = report.within_bound(bound)
    else:
        x = spot_instance(args.m, args.j, args.noise)
        if args.mode == EXPLICIT:
            J = CandidateSet.explicit(IndexSet(range(args.m)))
        else:
            # a one-bucket hash: the implicit set is all of [m]
            J = CandidateSet.implicit(pairwise_hash_new(SeedSpec(args.seed).derive("bucket-hash"), 1), 1)
        report = spot_lemma_trials(x, J, args.j, args.alpha, args.m, args.mode, args.n, args.seed)
        bound = args.alpha
        ok = report.within_bound(bound)
    for line in report.summary():
        print(line)
    print(f"bound={bound}")
    print(f"within_bound={int(ok)}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="adaspot",
                                     description="Adaptive randomized uniform approximation")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="more logging (-v info, -vv debug)")
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("params", help="print derived parameters and predicted cost")
    _add_problem_args(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("run", help="approximate the vector in a file")
    p.add_argument("--vector", required=True, help="vector file ('m <dim> p <p>' header)")
    p.add_argument("--p", type=float, default=None, help="override the file's norm exponent")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default=IMPLICIT)
    p.add_argument("--variant", choices=VARIANTS, default=PAIRWISE)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trials", help="Monte Carlo failure rate of the pipeline")
    _add_problem_args(p)
    _add_trial_args(p)
    p.add_argument("--generator", default="spike", help="instance generator spec")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--processes", action="store_true", help="run workers as forked processes")
    p.add_argument("--expected", action="store_true", help="run the expected-error variant")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_trials)

    p = sub.add_parser("sweep", help="predicted (and measured) cost over a list of dimensions")
    _add_problem_args(p, need_m=False)
    p.add_argument("--m", type=parse_int, nargs="+", required=True)
    _add_trial_args(p)
    p.set_defaults(n_trials=0)
    p.add_argument("--generator", default="spike")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="compare with non-adaptive count sketch estimates")
    _add_problem_args(p)
    _add_trial_args(p)
    p.set_defaults(n_trials=20)
    p.add_argument("--generator", default="two-level:k1=2,gamma=2")
    p.add_argument("--R", type=int, default=None, help="baseline repetitions")
    p.add_argument("--G", type=int, default=None, help="baseline groups")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("gen", help="write a generated instance to a vector file")
    p.add_argument("--generator", required=True)
    p.add_argument("--m", type=parse_int, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("lemma", help="Monte Carlo checks of the building blocks")
    p.add_argument("which", choices=["hash", "select", "spot"])
    p.add_argument("--m", type=parse_int, default=1 << 16)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--D", type=parse_int, default=1000)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--delta1", type=float, default=0.25)
    p.add_argument("--generator", default="spike", help="instance for the select check")
    p.add_argument("--noise", type=float, default=0.0, help="ℓ2 noise next to the spike (spot check)")
    p.add_argument("--inclusive", action="store_true",
                   help="hash check: count ties with the threshold as exceedances")
    p.add_argument("--mode", choices=MODES, default=IMPLICIT)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lemma)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except (AdaSpotError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
