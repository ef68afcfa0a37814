"""The adaptive hash-count sorting pipeline.

Stages: monotone bypass, strided sampling + cardinality estimate, a
dispatcher that picks one of five routes, the counting hot loop with
run-length folding, reconstruction (spill drain + pair merge + pair sort)
with a spill safety guard, and ordered emission.  The fallback engine for
small or high-entropy inputs is the host platform's unstable comparison
sort, kept behind the single seam ``fallback_sort`` so a different engine
can be swapped in.

Sorts are in place on 1-D numpy arrays of uint64/int64/uint32/int32.
Signed keys are order-mapped to unsigned by flipping the sign bit before
hashing and counting, and mapped back at emit.  Equal keys are
indistinguishable, so stability is not a concern.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .buckets import BucketTable, bucket_cap, table_size_for
from .cardinality import CardinalityEstimate, _sample

SMALL_N_CUTOFF = 2048         # below this, sampling does not amortize
TINY_MAX_KEYS = 8
PAIR_RADIX_MIN = 256          # pair count at which the radix tail kicks in
_MONO_CHUNK = 1 << 14

SUPPORTED_DTYPES = tuple(np.dtype(t) for t in (np.uint64, np.int64, np.uint32, np.int32))

_UNSIGNED_OF = {
    np.dtype(np.int64): np.dtype(np.uint64),
    np.dtype(np.int32): np.dtype(np.uint32),
    np.dtype(np.uint64): np.dtype(np.uint64),
    np.dtype(np.uint32): np.dtype(np.uint32),
}


class Route(Enum):
    ALREADY_SORTED = "already_sorted"
    FALLBACK_SMALL_N = "fallback_small_n"
    TINY_COUNT = "tiny_count"
    FALLBACK_HIGH_ENTROPY = "fallback_high_entropy"
    MAIN = "main"


@dataclass
class DispatchDecision:
    route: Route
    keys: np.ndarray | None = None              # TINY_COUNT: <= 8 keys, ascending
    k_hat: float | None = None                  # MAIN
    estimate: CardinalityEstimate | None = None


@dataclass
class SortTelemetry:
    """Read-only view of one cafs_sort invocation.

    stage_ms keys follow the cost decomposition count / sort_k / emit;
    table is retained only when the caller supplied the telemetry object
    and the main counting path ran.
    """

    n: int = 0
    decision: DispatchDecision | None = None
    spill_len: int = 0
    guard_fired: bool = False
    stage_ms: dict[str, float] = field(default_factory=dict)
    counted_total: int = 0
    updates: int = 0
    tiny_count_failed: bool = False
    table: BucketTable | None = None

    @property
    def route(self) -> Route | None:
        return self.decision.route if self.decision else None


def to_unsigned(x: np.ndarray) -> np.ndarray:
    """Order-preserving map to the unsigned domain (sign-bit flip).

    Unsigned inputs come back as-is (no copy); signed inputs produce a new
    array, leaving x untouched.
    """
    if x.dtype.kind == "u":
        return x
    udt = _UNSIGNED_OF[x.dtype]
    sign = udt.type(1) << udt.type(x.dtype.itemsize * 8 - 1)
    return x.view(udt) ^ sign


def from_unsigned_keys(keys: np.ndarray, dtype) -> np.ndarray:
    """Map uint64 pipeline keys back into the output dtype.

    Inverse of to_unsigned on the key values; monotone, so ascending
    unsigned keys stay ascending in the signed order.
    """
    dtype = np.dtype(dtype)
    if dtype == np.dtype(np.uint64):
        return keys
    if dtype == np.dtype(np.uint32):
        return keys.astype(np.uint32)
    if dtype == np.dtype(np.int64):
        return (keys ^ np.uint64(1 << 63)).view(np.int64)
    if dtype == np.dtype(np.int32):
        return (keys.astype(np.uint32) ^ np.uint32(1 << 31)).view(np.int32)
    raise ValueError(f"unsupported dtype: {dtype}")


def is_monotone(x: np.ndarray) -> bool:
    """True iff x is non-decreasing.

    Scans in chunks so a random input exits on the first chunk while a
    sorted input still runs at vector speed.
    """
    n = x.shape[0]
    s = 0
    while s + 1 < n:
        e = min(n, s + _MONO_CHUNK + 1)
        seg = x[s:e]
        if np.any(seg[1:] < seg[:-1]):
            return False
        s = e - 1
    return True


def fallback_sort(x: np.ndarray) -> None:
    """In-place host comparison sort (numpy's unstable introsort).

    This is the single seam for the fallback engine; rebind it to swap in
    another in-place sorter.
    """
    x.sort(kind="quicksort")


def dispatch(x: np.ndarray, n: int | None = None,
             hash_mult=None) -> DispatchDecision:
    """Pick the pipeline route for x (values in the unsigned domain).

    Order of tests: monotone bypass; small-n fallback; then on the sampled
    estimate, tiny-count (k_hat <= 8 and u <= 8), high-entropy fallback
    (2 * k_hat > n), otherwise the main counting path.
    """
    if n is None:
        n = x.shape[0]
    elif n != x.shape[0]:
        x = x[:n]
    if is_monotone(x):
        return DispatchDecision(Route.ALREADY_SORTED)
    if n < SMALL_N_CUTOFF:
        return DispatchDecision(Route.FALLBACK_SMALL_N)
    est, fs = _sample(x, n, hash_mult)
    if est.k_hat <= TINY_MAX_KEYS and est.u <= TINY_MAX_KEYS:
        return DispatchDecision(Route.TINY_COUNT, keys=fs.distinct_keys(), estimate=est)
    if est.k_hat * 2 > n:
        return DispatchDecision(Route.FALLBACK_HIGH_ENTROPY, estimate=est)
    return DispatchDecision(Route.MAIN, k_hat=est.k_hat, estimate=est)


def tiny_count_sort(x: np.ndarray, keys: np.ndarray, out: np.ndarray) -> bool:
    """Count x against <= 8 fixed keys and emit on success.

    One pass with one branch-free compare-accumulate per key.  If the
    counters do not sum to len(x) the sample missed a value and the caller
    must fall through to the main path; out is untouched in that case.
    out may alias x: counting completes before any write.
    """
    keys = np.sort(np.asarray(keys, dtype=x.dtype))
    if keys.shape[0] > TINY_MAX_KEYS:
        raise ValueError("tiny-count takes at most 8 keys")
    counts = _kernels.tiny_counts(x, keys)
    if int(counts.sum()) != x.shape[0]:
        return False
    emit(PairList(keys.astype(np.uint64, copy=False), counts), out)
    return True


def main_count_loop(x: np.ndarray, n: int | None = None,
                    k_hat: float = 1.0, hash_mult=None) -> BucketTable:
    """Size a bucket table from the estimate and run the counting pass.

    Runs of equal adjacent values are folded into single updates, so the
    update count collapses from n to the run count on grouped inputs.
    """
    if n is None:
        n = x.shape[0]
    cap = bucket_cap(x.dtype)
    m = table_size_for(max(1.0, k_hat), n, cap)
    table = BucketTable(m.bit_length() - 1, dtype=x.dtype, hash_mult=hash_mult)
    table.count_sequence(x[:n])
    return table


@dataclass
class PairList:
    """Dense (key, count) pairs; keys are distinct after fold/merge."""

    keys: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_pairs(cls, pairs) -> "PairList":
        keys = np.array([k for k, _ in pairs], dtype=np.uint64)
        counts = np.array([c for _, c in pairs], dtype=np.int64)
        return cls(keys, counts)

    def to_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.keys.tolist(), self.counts.tolist()))

    def __len__(self) -> int:
        return self.keys.shape[0]


def fold_sorted(vals: np.ndarray) -> PairList:
    """Fold equal neighbors of an ascending array into (key, count) pairs."""
    if vals.shape[0] == 0:
        return PairList(np.empty(0, np.uint64), np.empty(0, np.int64))
    starts = np.concatenate(([0], np.flatnonzero(vals[1:] != vals[:-1]) + 1))
    counts = np.diff(np.concatenate((starts, [vals.shape[0]])))
    return PairList(vals[starts].astype(np.uint64, copy=False), counts.astype(np.int64))


def pair_sort(pairs: PairList) -> PairList:
    """Sort pairs ascending by key.

    Below 256 pairs the host comparison sort wins; from 256 up, a stable
    LSD byte radix (8 passes over the 64-bit key) through one scratch
    buffer.  Keys must be uint64 and distinct.
    """
    if len(pairs) < PAIR_RADIX_MIN:
        order = np.argsort(pairs.keys, kind="quicksort")
        return PairList(pairs.keys[order], pairs.counts[order])
    keys = np.ascontiguousarray(pairs.keys, dtype=np.uint64)
    counts = np.ascontiguousarray(pairs.counts, dtype=np.int64)
    _kernels.radix_sort_pairs(keys, counts, np.empty_like(keys), np.empty_like(counts))
    return PairList(keys, counts)


def emit(pairs: PairList, out: np.ndarray) -> None:
    """Expand sorted pairs into out, one bulk fill per pair."""
    total = int(pairs.counts.sum()) if len(pairs) else 0
    if total != out.shape[0]:
        raise ValueError(f"pair counts sum to {total}, out has {out.shape[0]} slots")
    if total:
        keys = np.ascontiguousarray(pairs.keys, dtype=out.dtype)
        _kernels.emit_fill(out, keys, np.ascontiguousarray(pairs.counts, dtype=np.int64))


def reconstruct(table: BucketTable, x: np.ndarray, n: int, out: np.ndarray,
                telemetry: SortTelemetry | None = None, _unmap=None) -> None:
    """Turn the counted table into sorted output, guarding against spill.

    If more than half the input spilled, the count result is dropped and x
    is sorted with the fallback engine (capping the worst case at roughly
    one wasted counting pass).  Otherwise the spill is sorted and folded,
    merged with the dense bucket pairs (key-disjoint by construction),
    pair-sorted, and emitted.
    """
    if table.spill_len * 2 > n:
        if telemetry is not None:
            telemetry.guard_fired = True
            telemetry.spill_len = table.spill_len
        t0 = time.perf_counter()
        if out is not x:
            out[:] = x
        fallback_sort(out)
        _note_stage(telemetry, "sort_k", t0)
        return
    t0 = time.perf_counter()
    spill = table.spill
    if spill.shape[0]:
        spill = np.sort(spill)
        spill_pairs = fold_sorted(spill)
        dense_keys, dense_counts = table.occupied_pairs()
        merged = PairList(np.concatenate((dense_keys, spill_pairs.keys)),
                          np.concatenate((dense_counts, spill_pairs.counts)))
    else:
        dense_keys, dense_counts = table.occupied_pairs()
        merged = PairList(dense_keys, dense_counts)
    merged = pair_sort(merged)
    if _unmap is not None:
        merged = PairList(_unmap(merged.keys), merged.counts)
    _note_stage(telemetry, "sort_k", t0)
    if telemetry is not None:
        telemetry.spill_len = table.spill_len
    t0 = time.perf_counter()
    emit(merged, out)
    _note_stage(telemetry, "emit", t0)


def _note_stage(telemetry: SortTelemetry | None, label: str, t0: float) -> None:
    if telemetry is not None:
        dt = (time.perf_counter() - t0) * 1000.0
        telemetry.stage_ms[label] = telemetry.stage_ms.get(label, 0.0) + dt


def _validate(x: np.ndarray) -> None:
    if not isinstance(x, np.ndarray):
        raise TypeError("cafs_sort expects a numpy array")
    if x.ndim != 1:
        raise ValueError("cafs_sort expects a 1-D array")
    if x.dtype not in SUPPORTED_DTYPES:
        raise TypeError(f"unsupported dtype {x.dtype}; need one of "
                        f"{[str(d) for d in SUPPORTED_DTYPES]}")
    if not x.flags.writeable:
        raise ValueError("cafs_sort sorts in place; array is read-only")
    if x.shape[0] >= 1 << 32:
        raise ValueError("arrays of 2**32 or more elements exceed the "
                         "32-bit slot counters")


def _run_main(xu: np.ndarray, x: np.ndarray, n: int, k_hat: float,
              telemetry: SortTelemetry | None, keep_table: bool,
              hash_mult=None) -> None:
    t0 = time.perf_counter()
    table = main_count_loop(xu, n, k_hat, hash_mult)
    _note_stage(telemetry, "count", t0)
    unmap = None
    if x.dtype.kind == "i":
        unmap = lambda keys: from_unsigned_keys(keys, x.dtype)
    if telemetry is not None:
        telemetry.counted_total = table.counted_total()
        telemetry.updates = table.stats.updates
        telemetry.spill_len = table.spill_len
        if keep_table:
            telemetry.table = table
    reconstruct(table, x, n, x, telemetry, _unmap=unmap)


def cafs_sort(x: np.ndarray, telemetry: SortTelemetry | None = None,
              hash_mult=None) -> None:
    """Sort a 1-D integer array ascending, in place.

    Adaptive: already-sorted input returns after one scan; small or
    high-entropy input goes to the host comparison sort; inputs with at
    most 8 sampled distinct values take the tiny-count path; everything
    else runs the hash-count main path.  A failed tiny-count pass (the
    sample missed a value) transparently re-enters the main path.

    Pass a SortTelemetry to observe the route, spill, guard and per-stage
    timings of this invocation.
    """
    _validate(x)
    keep_table = telemetry is not None
    if telemetry is None:
        telemetry = SortTelemetry()
    telemetry.n = n = x.shape[0]
    if n <= 1:
        telemetry.decision = DispatchDecision(Route.ALREADY_SORTED)
        return
    xu = to_unsigned(x)
    decision = dispatch(xu, n, hash_mult)
    telemetry.decision = decision
    route = decision.route
    if route is Route.ALREADY_SORTED:
        return
    if route in (Route.FALLBACK_SMALL_N, Route.FALLBACK_HIGH_ENTROPY):
        t0 = time.perf_counter()
        fallback_sort(x)
        _note_stage(telemetry, "sort_k", t0)
        return
    if route is Route.TINY_COUNT:
        t0 = time.perf_counter()
        counts = _kernels.tiny_counts(xu, decision.keys.astype(xu.dtype, copy=False))
        _note_stage(telemetry, "count", t0)
        if int(counts.sum()) == n:
            telemetry.counted_total = n
            t0 = time.perf_counter()
            keys = from_unsigned_keys(decision.keys.astype(np.uint64, copy=False), x.dtype)
            emit(PairList(keys, counts), x)
            _note_stage(telemetry, "emit", t0)
            return
        # the estimator undercounted: fall into the main path with the
        # same k_hat, recomputing nothing else
        telemetry.tiny_count_failed = True
        k_hat = decision.estimate.k_hat
        telemetry.decision = DispatchDecision(Route.MAIN, k_hat=k_hat,
                                              estimate=decision.estimate)
        _run_main(xu, x, n, k_hat, telemetry, keep_table, hash_mult)
        return
    _run_main(xu, x, n, decision.k_hat, telemetry, keep_table, hash_mult)
