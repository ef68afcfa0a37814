"""Entropy-bin statistics over benchmark records.

Measurements are aggregated by entropy bin hbin = floor(log2 k), so bin 1
covers k in [2, 4), bin 2 covers [4, 8), and so on.  Per (baseline, bin)
we report the arithmetic mean, minimum, maximum and win rate of the
speedup t_baseline / t_cafs over all grid points where both algorithms
were measured.  The operational crossover against a baseline is the
largest k (over big-n points) whose entropy bin still wins at least half
of its points - the win rate, not the mean, so single extreme points do
not move the boundary.  A Pearson correlation between ln n and speedup
inside the dominance zone (bins with win rate >= 0.5) indicates whether
the lead grows, shrinks, or stays flat with n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

BINS_CSV_HEADER = "baseline,hbin,k_lo,k_hi,avg,min,max,win_rate,count"

CROSSOVER_N_MIN = 10**6


@dataclass(frozen=True)
class BinStats:
    hbin: int
    k_lo: int          # bin covers [k_lo, k_hi)
    k_hi: int
    avg: float
    min: float
    max: float
    win_rate: float
    count: int


def hbin(k: int) -> int:
    """Entropy bin floor(log2 k) for k >= 2."""
    k = int(k)
    if k < 2:
        raise ValueError(f"hbin needs k >= 2, got {k}")
    return k.bit_length() - 1


def speedup(t_baseline: float, t_cafs: float) -> float:
    """Baseline time over cafs time; above 1 means cafs wins."""
    if t_baseline <= 0 or t_cafs <= 0:
        raise ValueError("times must be positive")
    return t_baseline / t_cafs


def join_speedups(records, baseline: str, cafs: str = "cafs"):
    """Per-point speedups: [(n, k, speedup)] joined on (n, k).

    Points missing either side are dropped.  Duplicate (algo, n, k) rows,
    if any, contribute their minimum time (min-of-replicates semantics).
    """
    times: dict[str, dict[tuple[int, int], float]] = {baseline: {}, cafs: {}}
    for r in records:
        if r.algo in times:
            key = (r.n, r.k)
            known = times[r.algo].get(key)
            times[r.algo][key] = r.time_ms if known is None else min(known, r.time_ms)
    out = []
    for (n, k), tb in sorted(times[baseline].items()):
        tc = times[cafs].get((n, k))
        if tc is not None:
            out.append((n, k, speedup(tb, tc)))
    return out


def aggregate_bins(records, baseline: str) -> list[BinStats]:
    """Speedup statistics per entropy bin, ascending; empty bins omitted."""
    per_bin: dict[int, list[float]] = {}
    for _, k, s in join_speedups(records, baseline):
        per_bin.setdefault(hbin(k), []).append(s)
    out = []
    for b in sorted(per_bin):
        ss = per_bin[b]
        wins = sum(1 for s in ss if s > 1.0)
        out.append(BinStats(b, 2**b, 2**(b + 1), sum(ss) / len(ss),
                            min(ss), max(ss), wins / len(ss), len(ss)))
    return out


def crossover(records, baseline: str, n_min: int = CROSSOVER_N_MIN) -> int | None:
    """Largest k whose entropy bin wins >= 50% of its points at n > n_min.

    Returns the maximum k observed inside the highest qualifying bin, or
    None when no bin qualifies.
    """
    joined = [(n, k, s) for n, k, s in join_speedups(records, baseline) if n > n_min]
    per_bin: dict[int, list[tuple[int, float]]] = {}
    for _, k, s in joined:
        per_bin.setdefault(hbin(k), []).append((k, s))
    best = None
    for b in sorted(per_bin):
        pts = per_bin[b]
        wins = sum(1 for _, s in pts if s > 1.0)
        if wins / len(pts) >= 0.5:
            best = max(k for k, _ in pts)
    return best


def pearson_log_n(pairs) -> float | None:
    """Sample Pearson correlation of (ln n, speedup) pairs.

    Returns None when fewer than 2 distinct n values exist or either
    variance is zero (the correlation is undefined there).
    """
    pts = [(math.log(n), float(s)) for n, s in pairs]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    sxx = sum((x - mx) ** 2 for x, _ in pts)
    syy = sum((y - my) ** 2 for _, y in pts)
    sxy = sum((x - mx) * (y - my) for x, y in pts)
    if sxx == 0.0 or syy == 0.0:
        return None
    return sxy / math.sqrt(sxx * syy)


def dominance_pearson(records, baseline: str) -> float | None:
    """Pearson of (ln n, speedup) over the dominance zone.

    The dominance zone is every joined point whose entropy bin has a win
    rate of at least 0.5 (over all records, no n filter).
    """
    joined = join_speedups(records, baseline)
    winning = {b.hbin for b in aggregate_bins(records, baseline) if b.win_rate >= 0.5}
    pts = [(n, s) for n, k, s in joined if hbin(k) in winning]
    return pearson_log_n(pts)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_bins_csv(bins_by_baseline: dict[str, list[BinStats]], path) -> None:
    """Write per-bin statistics for every baseline."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(BINS_CSV_HEADER + "\n")
            for baseline in sorted(bins_by_baseline):
                for b in bins_by_baseline[baseline]:
                    f.write(f"{baseline},{b.hbin},{b.k_lo},{b.k_hi},"
                            f"{_fmt(b.avg)},{_fmt(b.min)},{_fmt(b.max)},"
                            f"{_fmt(b.win_rate)},{b.count}\n")
    except OSError as e:
        raise OSError(f"cannot write bins CSV {path}: {e}") from e


def render_summary(records, baselines, n_min: int = CROSSOVER_N_MIN) -> str:
    """Human-readable per-baseline summary: crossover K* and Pearson r."""
    lines = []
    for baseline in baselines:
        k_star = crossover(records, baseline, n_min=n_min)
        r = dominance_pearson(records, baseline)
        lines.append(f"baseline {baseline}:")
        lines.append(f"  crossover K* = {k_star if k_star is not None else 'none'}"
                     f" (win rate >= 0.5, n > {n_min})")
        lines.append(f"  pearson r(log n, speedup) = "
                     f"{'undefined' if r is None else format(r, '.6f')}"
                     f" over the dominance zone")
    return "\n".join(lines) + ("\n" if lines else "")
