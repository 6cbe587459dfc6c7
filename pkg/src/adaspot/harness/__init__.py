"""
Harness for adaspot: instance generators, Monte Carlo trials, cost sweeps,
baseline comparison and the ``adaspot`` command line tool.
"""

from .generators import (
    Generator, check_unit_ball, gen_dense_tail, gen_hash_adversary, gen_random_unit,
    gen_spike, gen_two_level, gen_zero, make_generator, spot_instance,
)
from .lemmas import (
    adversary_collision_rate, collision_rate, hash_lemma_trials, hashing_isolation_trials, select_lemma_trials,
    spot_lemma_trials,
)
from .trials import (
    TrialConfig, TrialOutcome, TrialReport, baseline_compare, run_trials, sweep_cost, write_csv,
)
