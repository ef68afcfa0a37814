"""Built-in verification sweeps, runnable from the CLI.

Four suites: an oracle-equivalence sweep over pseudo-random (n, k) points
that also checks count conservation and bucket/spill key-disjointness, a
dispatcher routing check on constructed inputs, a Monte-Carlo accuracy
check of the cardinality estimator, and the bucket-overflow (spill rate)
bound at the design load factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .buckets import HASH_MULT, BucketTable, fast_hash
from .cardinality import sample_and_estimate
from .datagen import GenSpec, gen_input, mix_outputs
from .sorter import Route, SortTelemetry, cafs_sort

ORACLE_POINTS = 200


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _distinct_values(n: int, seed: int) -> np.ndarray:
    # mixer outputs of distinct states are distinct (the finalizer is a bijection)
    return mix_outputs(seed, n)


def _sweep_points(seed: int, count: int):
    """(n, k) points spanning every dispatcher route, deterministic in seed."""
    rng = np.random.default_rng(seed)
    pts = [
        ("sorted_ramp", 100_000, 64),
        ("small_n", 1_000, 50),
        ("tiny", 500_000, 4),
        ("distinct", 10_000, 10_000),
        ("main", 500_000, 1_000),
        ("tiny_edge", 4_096, 8),
        ("high_entropy", 100_000, 90_000),
    ]
    while len(pts) < count:
        n = int(10 ** rng.uniform(3.0, 6.0))
        k = max(2, min(n, int(10 ** rng.uniform(np.log10(2.0), np.log10(n)))))
        pts.append(("random", n, k))
    return pts[:count]


def _check_one(kind: str, n: int, k: int, seed: int,
               break_output: bool = False) -> tuple[bool, str, Route]:
    if kind == "sorted_ramp":
        x = np.sort(gen_input(GenSpec(n, k, seed)))
    elif kind == "distinct":
        x = _distinct_values(n, seed)
    else:
        x = gen_input(GenSpec(n, k, seed))
    oracle = np.sort(x)
    tel = SortTelemetry()
    cafs_sort(x, telemetry=tel)
    if break_output and n > 1:
        x[0], x[-1] = x[-1], x[0]
    if x.shape[0] != n:
        return False, f"({n},{k}): output length {x.shape[0]}", tel.route
    if not np.array_equal(x, oracle):
        return False, f"({n},{k}): output differs from oracle", tel.route
    if tel.table is not None:
        if tel.counted_total + tel.spill_len != n:
            return (False,
                    f"({n},{k}): counters {tel.counted_total} + spill "
                    f"{tel.spill_len} != {n}", tel.route)
        spill_keys = np.unique(tel.table.spill)
        occupied = tel.table.keys[tel.table.counts > 0]
        if spill_keys.size and np.any(np.isin(spill_keys, occupied)):
            return False, f"({n},{k}): spill key also occupies a slot", tel.route
    return True, "", tel.route


def suite_oracle_sweep(seed: int = 42, points: int = ORACLE_POINTS,
                       fault_point: int | None = None) -> SuiteResult:
    """Element-wise equality against the host sort on every sweep point.

    Also asserts conservation (sum of counters + spill == n) and
    bucket/spill key-disjointness wherever the main path ran, and that the
    sweep exercised all five dispatcher routes.  fault_point deliberately
    corrupts that point's output (negative-control hook).
    """
    routes = set()
    for i, (kind, n, k) in enumerate(_sweep_points(seed, points)):
        ok, msg, route = _check_one(kind, n, k, seed + i,
                                    break_output=(i == fault_point))
        routes.add(route)
        if not ok:
            return SuiteResult("oracle-sweep", False, msg)
    missing = set(Route) - routes
    if missing:
        return SuiteResult("oracle-sweep", False,
                           f"routes never taken: {sorted(r.value for r in missing)}")
    return SuiteResult("oracle-sweep", True,
                       f"{points} points, all routes covered")


def suite_dispatch_routes() -> SuiteResult:
    """Constructed inputs must land on their designed routes."""
    cases = []

    x = gen_input(GenSpec(1_000, 50))
    cases.append(("n=1000 random", x, Route.FALLBACK_SMALL_N))
    x = gen_input(GenSpec(1_000_000, 4))
    cases.append(("n=1e6 k=4", x, Route.TINY_COUNT))
    cases.append(("n=1e4 distinct", _distinct_values(10_000, 7), Route.FALLBACK_HIGH_ENTROPY))
    cases.append(("sorted ramp", np.sort(gen_input(GenSpec(100_000, 1_000))),
                  Route.ALREADY_SORTED))
    x = gen_input(GenSpec(1_000_000, 1_000))
    cases.append(("n=1e6 k=1000", x, Route.MAIN))

    for name, x, want in cases:
        oracle = np.sort(x)
        tel = SortTelemetry()
        cafs_sort(x, telemetry=tel)
        if tel.route is not want:
            return SuiteResult("dispatch-routes", False,
                               f"{name}: routed {tel.route} instead of {want}")
        if not np.array_equal(x, oracle):
            return SuiteResult("dispatch-routes", False, f"{name}: wrong output")
    return SuiteResult("dispatch-routes", True, f"{len(cases)} routes as designed")


def suite_estimator_accuracy(seeds: int = 100) -> SuiteResult:
    """Chao1 within 20% of k=100 on >= 95% of seeds; exact on saturation."""
    n, k = 1_000_000, 100
    close = 0
    for seed in range(seeds):
        est = sample_and_estimate(gen_input(GenSpec(n, k, seed_base=seed)))
        if abs(est.k_hat - k) / k <= 0.2:
            close += 1
    needed = int(np.ceil(0.95 * seeds))
    if close < needed:
        return SuiteResult("estimator-accuracy", False,
                           f"only {close}/{seeds} seeds within 20% of k={k}")
    for seed in range(seeds):
        est = sample_and_estimate(_distinct_values(n, seed))
        if not est.saturated or est.k_hat != float(n):
            return SuiteResult("estimator-accuracy", False,
                               f"seed {seed}: distinct input not saturated to n")
    return SuiteResult("estimator-accuracy", True,
                       f"{close}/{seeds} within 20%; saturation exact on {seeds}/{seeds}")


def suite_spill_bound(seeds: int = 20) -> SuiteResult:
    """Spill rate at the design load (0.5 keys/bucket) stays under 1e-3.

    The per-bucket Poisson overflow model puts the rate near 1.7e-4; the
    1e-3 ceiling absorbs sampling variance.
    """
    m_log2 = 13
    n_keys = (1 << m_log2) // 2
    spills = updates = 0
    for seed in range(seeds):
        keys = _distinct_values(n_keys, seed * 1_000_003 + 1)
        table = BucketTable(m_log2, dtype=np.uint64)
        table.update_many(keys)
        spills += table.stats.spill_pushes
        updates += table.stats.updates
    frac = spills / updates
    if frac > 1e-3:
        return SuiteResult("spill-bound", False,
                           f"spill fraction {frac:.2e} over {seeds} seeds")
    return SuiteResult("spill-bound", True,
                       f"spill fraction {frac:.2e} <= 1e-3 ({updates} updates)")


def collide_keys(count: int, m_log2: int, bucket: int = 0,
                 start: int = 1) -> np.ndarray:
    """Brute-force `count` distinct keys that all hash into one bucket."""
    found: list[int] = []
    base = start
    while len(found) < count:
        cand = np.arange(base, base + (count << (m_log2 + 3)), dtype=np.uint64)
        hits = cand[fast_hash(cand, m_log2) == bucket]
        found.extend(int(v) for v in hits[: count - len(found)])
        base += cand.shape[0]
    return np.array(found[:count], dtype=np.uint64)


_HASH_INV = pow(HASH_MULT, -1, 1 << 64)  # the multiplier is odd, so invertible


def collide_keys_exact(count: int, m_log2: int, bucket: int = 0,
                       offset: int = 0) -> np.ndarray:
    """Enumerate distinct colliding keys through the hash's modular inverse.

    fast_hash(x, m) == b exactly when x * mult mod 2^64 falls in
    [b << (64-m), (b+1) << (64-m)); multiplying that interval by the
    inverse of the multiplier enumerates every such key directly, which
    scales the brute-force search to millions of keys.
    """
    if offset + count > 1 << (64 - m_log2):
        raise ValueError("bucket preimage exhausted")
    lo = np.uint64(bucket) << np.uint64(64 - m_log2)
    y = lo + np.arange(offset, offset + count, dtype=np.uint64)
    return y * np.uint64(_HASH_INV)


def run_selftest(seed: int = 42, points: int = ORACLE_POINTS,
                 fault_point: int | None = None) -> list[SuiteResult]:
    """All suites; a fault_point makes the oracle sweep fail on purpose."""
    return [
        suite_oracle_sweep(seed=seed, points=points, fault_point=fault_point),
        suite_dispatch_routes(),
        suite_estimator_accuracy(),
        suite_spill_bound(),
    ]
