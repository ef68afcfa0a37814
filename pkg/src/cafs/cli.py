"""Command-line surface: bench, analyze, selftest, sortfile.

Exit codes: 0 success, 1 operational failure, 2 usage error.  The seed
base defaults to 42 and can be overridden by --seed or the CAFS_SEED
environment variable (flag wins).  Diagnostics and telemetry go to
stderr; stdout stays pipeline-clean.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, bench, selftest
from .datagen import DEFAULT_SEED_BASE
from .sorter import SortTelemetry, cafs_sort


def _seed_base(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CAFS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            print(f"cafs: bad CAFS_SEED value {env!r}", file=sys.stderr)
            raise SystemExit(2)
    return DEFAULT_SEED_BASE


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    if not algos:
        print("cafs bench: no algorithms given", file=sys.stderr)
        return 2
    unknown = [a for a in algos if a not in bench.ALGORITHMS]
    if unknown:
        print(f"cafs bench: unknown algorithm(s): {', '.join(unknown)}; "
              f"known: {', '.join(sorted(bench.ALGORITHMS))}", file=sys.stderr)
        return 2
    if args.reps < 1:
        print("cafs bench: --reps must hold at least 1", file=sys.stderr)
        return 2
    max_n = bench.FULL_MAX_N if args.full else args.max_n
    if max_n < 1000:
        print("cafs bench: --max-n must be at least 1000", file=sys.stderr)
        return 2
    seed = _seed_base(args)
    all_correct = True
    rows = 0
    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(bench.CSV_HEADER + "\n")
            for point_records in bench.iter_grid(max_n, algos, reps=args.reps,
                                                 seed_base=seed):
                for r in sorted(point_records, key=lambda r: r.algo):
                    f.write(bench._format_record(r) + "\n")
                    rows += 1
                    if not r.correct:
                        all_correct = False
                        print(f"cafs bench: {r.algo} incorrect at "
                              f"n={r.n} k={r.k}", file=sys.stderr)
    except OSError as e:
        print(f"cafs bench: cannot write {args.out}: {e}", file=sys.stderr)
        return 1
    print(f"cafs bench: {rows} rows -> {args.out}", file=sys.stderr)
    return 0 if all_correct else 1


def cmd_analyze(args) -> int:
    try:
        records = bench.read_csv(getattr(args, "in"))
    except (OSError, ValueError) as e:
        print(f"cafs analyze: {e}", file=sys.stderr)
        return 1
    records = [r for r in records if r.correct]
    baselines = sorted({r.algo for r in records if r.algo != "cafs"})
    bins_by_baseline = {b: analysis.aggregate_bins(records, b) for b in baselines}
    try:
        analysis.write_bins_csv(bins_by_baseline, args.bins_out)
    except OSError as e:
        print(f"cafs analyze: {e}", file=sys.stderr)
        return 1
    if not records:
        print("cafs analyze: empty input, wrote empty bins CSV", file=sys.stderr)
        return 0
    if not baselines or all(not b for b in bins_by_baseline.values()):
        print("cafs analyze: no join - need cafs rows and at least one "
              "baseline at shared (n, k) points", file=sys.stderr)
        return 1
    summary = analysis.render_summary(records, baselines, n_min=args.n_min)
    if args.summary_out:
        try:
            with open(args.summary_out, "w", encoding="utf-8") as f:
                f.write(summary)
        except OSError as e:
            print(f"cafs analyze: cannot write {args.summary_out}: {e}",
                  file=sys.stderr)
            return 1
    else:
        sys.stdout.write(summary)
    return 0


def cmd_selftest(args) -> int:
    results = selftest.run_selftest(
        seed=_seed_base(args),
        points=args.points,
        fault_point=0 if args.inject_fault else None,
    )
    failed = False
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        if not r.passed:
            failed = True
    return 1 if failed else 0


def _read_text_ints(path) -> np.ndarray:
    vals = []
    lo, hi = -(1 << 63), (1 << 63) - 1
    with open(path, "r", encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            s = line.strip()
            if not s:
                continue
            try:
                v = int(s)
            except ValueError:
                raise ValueError(f"{path}:{ln}: not an integer: {s!r}")
            if not lo <= v <= hi:
                raise ValueError(f"{path}:{ln}: {v} outside 64-bit signed range")
            vals.append(v)
    return np.array(vals, dtype=np.int64) if vals else np.empty(0, np.int64)


def cmd_sortfile(args) -> int:
    src = getattr(args, "in")
    try:
        if args.binary:
            try:
                x = np.fromfile(src, dtype=np.int64)
            except OSError as e:
                raise OSError(f"cannot read {src}: {e}")
        else:
            x = _read_text_ints(src)
    except (OSError, ValueError) as e:
        print(f"cafs sortfile: {e}", file=sys.stderr)
        return 1
    tel = SortTelemetry()
    cafs_sort(x, telemetry=tel)
    route = tel.route.value if tel.route else "none"
    print(f"cafs sortfile: n={x.shape[0]} route={route} "
          f"spill={tel.spill_len} guard={'yes' if tel.guard_fired else 'no'}",
          file=sys.stderr)
    try:
        if args.binary:
            x.tofile(args.out)
        else:
            with open(args.out, "w", encoding="utf-8", newline="\n") as f:
                f.writelines(f"{v}\n" for v in x.tolist())
    except OSError as e:
        print(f"cafs sortfile: cannot write {args.out}: {e}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cafs",
        description="Adaptive low-cardinality integer sort: benchmark grid, "
                    "statistics, self-test and file sorting.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the (n, k) benchmark grid to CSV")
    b.add_argument("--max-n", type=int, default=bench.DESK_MAX_N,
                   help="largest array size (default: desk-scale 10^6)")
    b.add_argument("--full", action="store_true",
                   help="full-scale grid to 3*10^7 (hours of runtime)")
    b.add_argument("--algos", default="cafs,stdsort,mapcount",
                   help="comma-separated algorithm names")
    b.add_argument("--reps", type=int, default=2,
                   help="replicates per point; the minimum time is kept")
    b.add_argument("--seed", type=int, default=None, help="seed base")
    b.add_argument("--out", required=True, help="output CSV path")
    b.set_defaults(fn=cmd_bench)

    a = sub.add_parser("analyze", help="entropy-bin stats over a bench CSV")
    a.add_argument("--in", required=True, help="bench CSV path")
    a.add_argument("--bins-out", required=True, help="per-bin stats CSV path")
    a.add_argument("--summary-out", default=None,
                   help="summary text path (default: stdout)")
    a.add_argument("--n-min", type=int, default=analysis.CROSSOVER_N_MIN,
                   help="crossover considers points with n above this")
    a.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("selftest", help="oracle sweep, routing, estimator, spill")
    s.add_argument("--seed", type=int, default=None, help="sweep seed")
    s.add_argument("--points", type=int, default=selftest.ORACLE_POINTS,
                   help="oracle sweep size")
    s.add_argument("--inject-fault", action="store_true",
                   help="negative control: corrupt one point on purpose")
    s.set_defaults(fn=cmd_selftest)

    f = sub.add_parser("sortfile", help="sort a file of 64-bit integers")
    f.add_argument("--in", required=True, help="input path")
    f.add_argument("--out", required=True, help="output path")
    f.add_argument("--binary", action="store_true",
                   help="raw little-endian int64 instead of decimal lines")
    f.set_defaults(fn=cmd_sortfile)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
