"""Command-line harness.

    ddr4bench --plan table3 --out results --csv --svg
    ddr4bench --plan fig3 --seed 7 --out results
    ddr4bench --plan myplan.txt --rate 2400 --channels 2
    ddr4bench host                      # line protocol on stdin/stdout
    ddr4bench compare base.csv other.csv

Exit status is non-zero on any error and when any point reports data errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from ddr4bench.bench import (
    builtin_plan,
    compare,
    load_plan,
    read_csv,
    render_rate_chart,
    run_plan,
    summary_table,
    write_csv,
)
from ddr4bench.clocks import SUPPORTED_DATA_RATES
from ddr4bench.controller import ControllerConfig
from ddr4bench.dram import TimingParams, timing_preset
from ddr4bench.host import HostController, run_repl


def _load_timings(path: str, rate: int) -> TimingParams:
    """key=value per line; unset fields fall back to the rate's preset."""
    fields = dataclasses.asdict(timing_preset(rate))
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in fields:
                raise ValueError(f"unknown timing parameter {key!r}")
            fields[key] = int(value.strip(), 0)
    return TimingParams(**fields)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddr4bench",
        description="DDR4 benchmarking platform simulator",
    )
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="execute a benchmark plan (default)")
    run.add_argument("--plan", required=True,
                     help="built-in plan name or plan file path")
    run.add_argument("--rate", type=int, choices=SUPPORTED_DATA_RATES,
                     help="override the data rate of every plan point")
    run.add_argument("--channels", type=int,
                     help="override the channel count of every plan point")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--seed", type=int, default=1)
    run.add_argument("--csv", action="store_true", help="write results CSV")
    run.add_argument("--svg", action="store_true", help="write throughput charts")
    run.add_argument("--timings", help="timing override file (key=value lines)")
    run.add_argument("--no-refresh", action="store_true",
                     help="disable periodic refresh")
    run.add_argument("--audit", action="store_true",
                     help="replay command logs through the legality checker")
    run.add_argument("--beats", type=int,
                     help="data beats per point for auto-sized batches")
    run.add_argument("--reps", type=int, help="repetitions per point")
    run.add_argument("--quiet", action="store_true")

    host = sub.add_parser("host", help="line-protocol host on stdin/stdout")
    host.add_argument("--rate", type=int, default=1600,
                      choices=SUPPORTED_DATA_RATES)
    host.add_argument("--channels", type=int, default=1)
    host.add_argument("--no-refresh", action="store_true")

    cmp_p = sub.add_parser("compare", help="ratio report between two result CSVs")
    cmp_p.add_argument("baseline")
    cmp_p.add_argument("other")

    return parser


def _cmd_run(args) -> int:
    if os.path.exists(args.plan):
        plan = load_plan(args.plan)
    else:
        plan = builtin_plan(args.plan)
    if args.rate or args.channels:
        plan.points = [
            dataclasses.replace(
                p,
                rate=args.rate or p.rate,
                channels=args.channels or p.channels,
            )
            for p in plan.points
        ]
    if args.beats:
        plan.beats_per_point = args.beats
    if args.reps:
        plan.repetitions = args.reps

    timing = None
    if args.timings:
        rates = {p.rate for p in plan.points}
        if len(rates) > 1:
            print("error: --timings requires a single-rate plan", file=sys.stderr)
            return 1
        timing = _load_timings(args.timings, rates.pop())

    rows, audit = run_plan(
        plan,
        seed=args.seed,
        refresh=not args.no_refresh,
        timing=timing,
        collect_audit=args.audit,
    )

    os.makedirs(args.out, exist_ok=True)
    if args.csv:
        path = os.path.join(args.out, f"{plan.name}.csv")
        write_csv(rows, path)
        if not args.quiet:
            print(f"wrote {path}")
    if args.svg:
        for rate in sorted({p.rate for p in plan.points}):
            chart = render_rate_chart(rows, rate, f"{plan.name} at {rate} MT/s")
            path = os.path.join(args.out, f"{plan.name}-{rate}.svg")
            with open(path, "w") as fh:
                fh.write(chart)
            if not args.quiet:
                print(f"wrote {path}")
    if not args.quiet:
        print(summary_table(rows))

    status = 0
    if audit is not None:
        if audit.clean:
            if not args.quiet:
                print(f"audit: {audit.commands} commands, no violations")
        else:
            for violation in audit.violations[:20]:
                print(f"audit: {violation}", file=sys.stderr)
            print(f"audit: {len(audit.violations)} violation(s)", file=sys.stderr)
            status = 1
    errors = sum(r.data_errors for r in rows)
    if errors:
        print(f"error: {errors} data error(s) detected", file=sys.stderr)
        status = 1
    return status


def _cmd_host(args) -> int:
    host = HostController(args.channels, args.rate,
                          refresh_enabled=not args.no_refresh)
    run_repl(host, sys.stdin, sys.stdout)
    return 0


def _cmd_compare(args) -> int:
    baseline = read_csv(args.baseline)
    other = read_csv(args.other)
    report = compare(baseline, other)
    print(f"{'category':<14} {'min':>7} {'mean':>7} {'max':>7}")
    for (addressing, op), (lo, mean, hi) in report.categories.items():
        print(f"{addressing + '-' + op:<14} {lo:>7.3f} {mean:>7.3f} {hi:>7.3f}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("run", "host", "compare", "-h", "--help"):
        argv.insert(0, "run")
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "host":
        return _cmd_host(args)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "run":
        try:
            return _cmd_run(args)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    parser.print_help()
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
