"""Benchmark grid: schedules, timed points, CSV export.

The grid walks array sizes over four piecewise-linear bands (58 values at
the full 3e7 scale) and, per size, a cardinality schedule that is dense at
small k and roughly geometric once k grows large.  Every algorithm sorts a
fresh copy of the same generated input, is timed twice (min of the two
replicates suppresses scheduler noise), and is checked element-wise
against a separately sorted oracle copy; incorrect rows are recorded as
such and excluded from aggregation downstream.

Measurement is strictly single-threaded and algorithm order within a
point is fixed as configured (not randomized; cold-cache bias is a known
methodological caveat, not corrected here).
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .datagen import DEFAULT_SEED_BASE, GenSpec, gen_input
from .sorter import cafs_sort, fallback_sort
from . import analysis

CSV_HEADER = "algo,n,k,hbin,time_ms,correct"

FULL_MAX_N = 30_000_000
DESK_MAX_N = 1_000_000

# (band start, band end inclusive, step)
_N_BANDS = (
    (1_000, 50_000, 2_000),
    (50_000, 1_000_000, 50_000),
    (1_000_000, 10_000_000, 1_000_000),
    (10_000_000, 30_000_000, 5_000_000),
)


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    n: int
    k: int
    time_ms: float
    correct: bool


def n_schedule(max_n: int) -> list[int]:
    """Array sizes up to max_n: the four bands, deduplicated, ascending."""
    if max_n < 1000:
        raise ValueError("max_n must be >= 1000")
    values: set[int] = set()
    for start, end, step in _N_BANDS:
        values.update(range(start, end + 1, step))
    return sorted(v for v in values if v <= max_n)


def k_schedule(n: int) -> list[int]:
    """Cardinalities for one n: dense then coarsening, ending at k = n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    ks = []
    k = 2
    while k <= n:
        ks.append(k)
        if k < 200:
            k += 1
        elif k < 15_000:
            k += 10
        elif k < 100_000:
            k += 500
        else:
            k += max(5_000, k // 10)
    if ks[-1] != n:
        ks.append(n)
    return ks


def _stdsort(x: np.ndarray) -> None:
    fallback_sort(x)


def _mapcount_sort(x: np.ndarray) -> None:
    # naive hash-count sort over the general-purpose map
    counts = Counter(x.tolist())
    keys = np.array(sorted(counts), dtype=x.dtype)
    reps = np.array([counts[int(k)] for k in keys.tolist()], dtype=np.int64)
    x[:] = np.repeat(keys, reps)


#: name -> in-place sorting callable
ALGORITHMS = {
    "cafs": cafs_sort,
    "stdsort": _stdsort,
    "mapcount": _mapcount_sort,
}


def run_point(n: int, k: int, algos, reps: int = 2,
              seed_base: int = DEFAULT_SEED_BASE,
              registry=None) -> list[BenchRecord]:
    """Time every algorithm on one (n, k) point.

    Generates the input once; each algorithm gets a fresh copy per
    replicate and the minimum wall-clock time enters the record.  An
    algorithm whose output differs from the oracle-sorted copy anywhere,
    in any replicate, is recorded with correct=False.
    """
    if not algos:
        raise ValueError("algos must be nonempty")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    registry = ALGORITHMS if registry is None else registry
    for name in algos:
        if name not in registry:
            raise KeyError(f"unknown algorithm: {name!r}")
    data = gen_input(GenSpec(n, k, seed_base))
    oracle = np.sort(data)
    records = []
    for name in algos:
        fn = registry[name]
        best = float("inf")
        correct = True
        for _ in range(reps):
            buf = data.copy()
            t0 = time.perf_counter()
            fn(buf)
            dt = (time.perf_counter() - t0) * 1000.0
            best = min(best, dt)
            if correct and not np.array_equal(buf, oracle):
                correct = False
        records.append(BenchRecord(name, n, k, best, correct))
    return records


def iter_grid(max_n: int, algos, reps: int = 2,
              seed_base: int = DEFAULT_SEED_BASE, registry=None):
    """Yield the records of every grid point, in (n, k) order."""
    for n in n_schedule(max_n):
        for k in k_schedule(n):
            yield run_point(n, k, algos, reps=reps, seed_base=seed_base,
                            registry=registry)


def _format_record(r: BenchRecord) -> str:
    return (f"{r.algo},{r.n},{r.k},{analysis.hbin(r.k)},{r.time_ms!r},"
            f"{'true' if r.correct else 'false'}")


def write_csv(records, path) -> None:
    """Write records as CSV, canonically ordered by (n, k, algo)."""
    rows = sorted(records, key=lambda r: (r.n, r.k, r.algo))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(CSV_HEADER + "\n")
            for r in rows:
                f.write(_format_record(r) + "\n")
    except OSError as e:
        raise OSError(f"cannot write bench CSV {path}: {e}") from e


def read_csv(path) -> list[BenchRecord]:
    """Parse a bench CSV back into records; names the line on bad input."""
    records = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise OSError(f"cannot read bench CSV {path}: {e}") from e
    if not lines:
        raise ValueError(f"{path}:1: empty file, expected header {CSV_HEADER!r}")
    if lines[0] != CSV_HEADER:
        raise ValueError(f"{path}:1: bad header {lines[0]!r}")
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}:{ln}: expected 6 fields, got {len(parts)}")
        algo, n_s, k_s, hbin_s, t_s, c_s = parts
        try:
            n, k, hb = int(n_s), int(k_s), int(hbin_s)
            t = float(t_s)
        except ValueError as e:
            raise ValueError(f"{path}:{ln}: {e}") from e
        if c_s not in ("true", "false"):
            raise ValueError(f"{path}:{ln}: bad correct flag {c_s!r}")
        if hb != analysis.hbin(k):
            raise ValueError(f"{path}:{ln}: hbin {hb} inconsistent with k={k}")
        records.append(BenchRecord(algo, n, k, t, c_s == "true"))
    return records
