"""Exact cross-match two-sample test for high-dimensional vectors."""

from .core import (
    DEFAULT_METRIC,
    DistanceMatrix,
    LabeledPoint,
    Metric,
    ParseError,
    PooledSample,
    build_distance_matrix,
    pooled_from_groups,
)
from .embedding_io import EmbeddingCollection, load_collection, load_points_file, load_vec_file, write_vec_file
from .inference import (
    NullDistribution,
    TestResult,
    cross_match_test,
    expected_cross_matches,
    log_null_pmf,
    log_p_value,
    null_distribution,
    null_pmf,
    p_value,
    support,
)
from .matching import (
    Matching,
    PairTypeCounts,
    brute_force_matching,
    count_pair_types,
    greedy_matching,
    min_weight_perfect_matching,
    pad_odd,
)
from .resampling import AggregateResult, ProtocolConfig, derive_rep_seed, run_protocol

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "DEFAULT_METRIC",
    "DistanceMatrix",
    "EmbeddingCollection",
    "LabeledPoint",
    "Matching",
    "Metric",
    "NullDistribution",
    "PairTypeCounts",
    "ParseError",
    "PooledSample",
    "ProtocolConfig",
    "TestResult",
    "brute_force_matching",
    "build_distance_matrix",
    "count_pair_types",
    "cross_match_test",
    "derive_rep_seed",
    "expected_cross_matches",
    "greedy_matching",
    "load_collection",
    "load_points_file",
    "load_vec_file",
    "log_null_pmf",
    "log_p_value",
    "min_weight_perfect_matching",
    "null_distribution",
    "null_pmf",
    "p_value",
    "pad_odd",
    "pooled_from_groups",
    "run_protocol",
    "support",
    "write_vec_file",
]
