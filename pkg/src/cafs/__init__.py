"""Adaptive hash-count sorting for low-cardinality integer arrays.

The core entry point is :func:`cafs_sort`, an in-place sort for 1-D numpy
arrays of 32/64-bit signed or unsigned integers that adapts to the
distinct-value count of the input: a sampled cardinality estimate routes
each array to a monotone bypass, a tiny-count path, a cache-sized
hash-count loop, or the host comparison sort.  The package also ships the
deterministic input generator, benchmark grid, and entropy-bin analysis
used to characterize where the hash-count approach wins.
"""

from .buckets import Bucket, BucketTable, bucket_update, fast_hash, table_size_for
from .cardinality import CardinalityEstimate, FreqSet, chao1, sample_and_estimate
from .datagen import GenSpec, gen_input, mix_next
from .sorter import (
    DispatchDecision,
    PairList,
    Route,
    SortTelemetry,
    cafs_sort,
    dispatch,
    fallback_sort,
    is_monotone,
    pair_sort,
    tiny_count_sort,
)

__version__ = "0.1.0"

__all__ = [
    "Bucket",
    "BucketTable",
    "CardinalityEstimate",
    "DispatchDecision",
    "FreqSet",
    "GenSpec",
    "PairList",
    "Route",
    "SortTelemetry",
    "bucket_update",
    "cafs_sort",
    "chao1",
    "dispatch",
    "fallback_sort",
    "fast_hash",
    "gen_input",
    "is_monotone",
    "mix_next",
    "pair_sort",
    "sample_and_estimate",
    "table_size_for",
    "tiny_count_sort",
    "__version__",
]
