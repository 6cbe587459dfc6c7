# src/adaspot/__init__.py

# Export commonly used classes for easier imports
from .core import (
    AdaSpotError, DimensionError, ParameterError, VectorFormatError,
    IndexSet, SparseVector, lp_norm, linf_norm, linf_dist, lq_error, project, heavy_set,
    read_vector, write_vector,
)
from .randomness import (
    SeedSpec, PairwiseHash, RademacherStream, derive_stream, pairwise_hash_new, trivial_hash,
    hash_eval, hash_many, hash_family_eval, rademacher, rademacher_many,
)
from .measurement import Stage, CostLedger, MeasurementOracle, measure, query_entry, cost_report
from .select import (
    SelectParams, SketchState, BucketScores, TopKSelector,
    build_sketch, bucket_score, bucket_scores, select_top_k, select, compute_Q,
    count_sketch_estimate, count_sketch_estimates,
)
from .spot import (
    CandidateSet, kstar, dk_schedule, shrink, spot, heavy_hitter_ok, iid_condition_threshold,
)
from .pipeline import (
    AlgoParams, ApproxOutput, derive_params, approximate, approximate_expected,
    approximate_p_gt2, predicted_cost,
)
