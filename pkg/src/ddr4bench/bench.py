"""Benchmark plans, the plan runner, CSV results, and comparisons.

A plan is a list of traffic points (operation x addressing x burst x
signaling) bound to a data rate and channel count.  Built-in plans reproduce
the standard experiments:

    table3          single-channel 1600 MT/s throughput table
                    (read/write x single/4/32/128 x seq/rnd)
    fig3            burst-length sweep 1..128 at 1600 and 2400 MT/s,
                    read/write/mixed x seq/rnd (chart per rate)
    fig4            mixed read-write breakdown at 1600 MT/s
    scale-rate      burst-128 points at all four data rates
    scale-channels  1..3 channels, sequential burst-128

Batch lengths are auto-derived from the burst length so every point moves the
same data volume and spans at least ten refresh intervals.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from ddr4bench.audit import check_command_log, check_row_consistency, max_refresh_gap
from ddr4bench.axi import BurstType
from ddr4bench.host import Configure, HostController, RunAll, ThroughputReport
from ddr4bench.traffic import Addressing, DataPattern, OpMode, Signaling, TrafficConfig

DEFAULT_BEATS_PER_POINT = 16384
BURST_SWEEP = (1, 2, 4, 8, 16, 32, 64, 128)


class ShapeMismatch(Exception):
    """Result sets do not cover the same points."""


@dataclass(frozen=True)
class PlanPoint:
    op: str                      # 'r' | 'w' | 'm'
    addressing: str              # 'seq' | 'rnd'
    burst_len: int
    burst_type: str = "incr"
    signaling: str = "nb"
    rate: int = 1600
    channels: int = 1
    batch_len: int | None = None
    read_fraction: float = 0.5

    @property
    def label(self) -> str:
        return f"{self.op}-{self.addressing}-{self.burst_type}{self.burst_len}"


@dataclass
class BenchPlan:
    name: str
    points: list[PlanPoint]
    repetitions: int = 1
    beats_per_point: int = DEFAULT_BEATS_PER_POINT

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.points:
            raise ValueError("plan has no points")


def _points(rates, ops, addressings, bursts, channels=1, signaling="nb"):
    return [
        PlanPoint(op=op, addressing=addr, burst_len=burst, rate=rate,
                  channels=channels, signaling=signaling)
        for rate in rates
        for addr in addressings
        for op in ops
        for burst in bursts
    ]


def builtin_plan(name: str) -> BenchPlan:
    if name == "table3":
        return BenchPlan("table3", _points(
            (1600,), ("r", "w"), ("seq", "rnd"), (1, 4, 32, 128)))
    if name == "fig3":
        return BenchPlan("fig3", _points(
            (1600, 2400), ("r", "w", "m"), ("seq", "rnd"), BURST_SWEEP))
    if name == "fig4":
        return BenchPlan("fig4", _points(
            (1600,), ("m",), ("seq", "rnd"), (1, 4, 32, 128)))
    if name == "scale-rate":
        return BenchPlan("scale-rate", _points(
            (1600, 1866, 2133, 2400), ("r", "w"), ("seq", "rnd"), (128,)))
    if name == "scale-channels":
        points = [
            PlanPoint(op=op, addressing="seq", burst_len=128, rate=1600,
                      channels=n)
            for n in (1, 2, 3) for op in ("r", "w")
        ]
        return BenchPlan("scale-channels", points)
    raise ValueError(f"unknown built-in plan {name!r}; "
                     "try table3, fig3, fig4, scale-rate, scale-channels")


def load_plan(path) -> BenchPlan:
    """Line-oriented plan file: `name`, `reps`, `beats`, defaults via
    `rate`/`channels`, and one `point key=value...` line per point."""
    name = "custom"
    reps = 1
    beats = DEFAULT_BEATS_PER_POINT
    rate = 1600
    channels = 1
    points = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "name":
                name = rest
            elif key == "reps":
                reps = int(rest)
            elif key == "beats":
                beats = int(rest)
            elif key == "rate":
                rate = int(rest)
            elif key == "channels":
                channels = int(rest)
            elif key == "point":
                fields = dict(token.split("=", 1) for token in rest.split())
                burst_type, _, burst_len = fields.get("burst", "incr:1").partition(":")
                point = PlanPoint(
                    op=fields.get("op", "r").split(":")[0][0],
                    addressing=fields.get("addr", "seq").split(":")[0],
                    burst_len=int(burst_len or "1", 0),
                    burst_type=burst_type,
                    signaling=fields.get("sig", "nb"),
                    rate=int(fields.get("rate", rate)),
                    channels=int(fields.get("channels", channels)),
                    batch_len=int(fields["batch"], 0) if "batch" in fields else None,
                    read_fraction=float(fields.get("frac", 0.5)),
                )
                points.append(point)
            else:
                raise ValueError(f"unknown plan directive {key!r}")
    return BenchPlan(name, points, repetitions=reps, beats_per_point=beats)


_OP_MODE = {"r": OpMode.READ_ONLY, "w": OpMode.WRITE_ONLY, "m": OpMode.MIXED}


MAX_AUTO_BATCH = 8192   # keeps short-burst points at desk scale; still > 10 tREFI


def point_config(point: PlanPoint, beats_per_point: int, seed: int,
                 capacity: int) -> TrafficConfig:
    batch = point.batch_len
    if batch is None:
        batch = max(1, beats_per_point // point.burst_len)
        if point.op == "m":
            batch *= 2      # per-direction batch halves under mixed split
        batch = min(MAX_AUTO_BATCH, batch)
    return TrafficConfig(
        op_mode=_OP_MODE[point.op],
        read_fraction=point.read_fraction,
        addressing=Addressing(point.addressing),
        addr_seed=seed,
        burst_type=BurstType(point.burst_type),
        burst_len=point.burst_len,
        signaling=Signaling(point.signaling),
        batch_len=batch,
        base=0,
        limit=capacity,
        data_pattern=DataPattern.ADDRESS_HASH,
        data_seed=seed,
    )


RESULT_FIELDS = (
    "plan", "point", "label", "repetition", "rate", "channels", "channel",
    "direction", "op", "addressing", "burst_type", "burst_len", "signaling",
    "batch_len", "bytes", "cycles", "axi_clock_hz", "gbps", "tx",
    "mean_cycles_per_tx", "data_errors", "unwritten_reads",
)

_INT_FIELDS = {"point", "repetition", "rate", "channels", "channel",
               "burst_len", "batch_len", "bytes", "cycles", "axi_clock_hz",
               "tx", "data_errors", "unwritten_reads"}
_FLOAT_FIELDS = {"gbps", "mean_cycles_per_tx"}


@dataclass(frozen=True)
class ResultRow:
    plan: str
    point: int
    label: str
    repetition: int
    rate: int
    channels: int
    channel: int
    direction: str
    op: str
    addressing: str
    burst_type: str
    burst_len: int
    signaling: str
    batch_len: int
    bytes: int
    cycles: int
    axi_clock_hz: int
    gbps: float
    tx: int
    mean_cycles_per_tx: float
    data_errors: int
    unwritten_reads: int

    def key(self) -> tuple:
        return (self.label, self.rate, self.channels, self.repetition,
                self.channel, self.direction)


@dataclass
class AuditReport:
    commands: int = 0
    violations: list = field(default_factory=list)
    max_ref_gap: int | None = None

    @property
    def clean(self) -> bool:
        return not self.violations


def run_plan(plan: BenchPlan, *, seed: int = 1, refresh: bool = True,
             timing=None, controller_config=None, collect_audit: bool = False,
             timeout_axi: int = 10_000_000, progress=None):
    """Execute every point; returns (rows, audit_report_or_None)."""
    rows: list[ResultRow] = []
    audit = AuditReport() if collect_audit else None
    for index, point in enumerate(plan.points):
        for rep in range(plan.repetitions):
            host = HostController(
                point.channels, point.rate, refresh_enabled=refresh,
                timing=timing, controller_config=controller_config,
                keep_command_log=collect_audit, timeout_axi=timeout_axi)
            capacity = host.channels[0].geometry.capacity_bytes
            cfg = point_config(point, plan.beats_per_point, seed, capacity)
            for ch in range(point.channels):
                host.execute(Configure(ch, cfg))
            result = host.execute(RunAll())
            for ch, reports in enumerate(result["reports"]):
                counters = host.channels[ch].last_counters
                for rep_obj in reports:
                    rows.append(ResultRow(
                        plan=plan.name, point=index, label=point.label,
                        repetition=rep, rate=point.rate,
                        channels=point.channels, channel=ch,
                        direction=rep_obj.direction, op=point.op,
                        addressing=point.addressing,
                        burst_type=point.burst_type,
                        burst_len=point.burst_len, signaling=point.signaling,
                        batch_len=cfg.batch_len, bytes=rep_obj.bytes,
                        cycles=rep_obj.cycles,
                        axi_clock_hz=rep_obj.axi_clock_hz,
                        gbps=rep_obj.throughput_gbps, tx=rep_obj.tx_count,
                        mean_cycles_per_tx=rep_obj.mean_cycles_per_tx,
                        data_errors=counters.data_errors,
                        unwritten_reads=counters.unwritten_reads,
                    ))
            if collect_audit:
                for ch_obj in host.channels:
                    log = ch_obj.command_log
                    audit.commands += len(log)
                    audit.violations.extend(
                        check_command_log(log, ch_obj.timing, ch_obj.geometry))
                    audit.violations.extend(check_row_consistency(log))
                    gap = max_refresh_gap(log)
                    if gap is not None and (audit.max_ref_gap is None
                                            or gap > audit.max_ref_gap):
                        audit.max_ref_gap = gap
            if progress is not None:
                progress(point, rep, rows)
    return rows, audit


# -- CSV ------------------------------------------------------------------

def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_FIELDS)
    for row in rows:
        record = []
        for name in RESULT_FIELDS:
            value = getattr(row, name)
            record.append(repr(value) if isinstance(value, float) else value)
        writer.writerow(record)
    return buf.getvalue()


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(path_or_buf) -> list[ResultRow]:
    if hasattr(path_or_buf, "read"):
        fh = path_or_buf
        close = False
    else:
        fh = open(path_or_buf, newline="")
        close = True
    try:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != RESULT_FIELDS:
            raise ValueError(f"unexpected result header {header}")
        rows = []
        for record in reader:
            kwargs = {}
            for name, value in zip(RESULT_FIELDS, record):
                if name in _INT_FIELDS:
                    kwargs[name] = int(value)
                elif name in _FLOAT_FIELDS:
                    kwargs[name] = float(value)
                else:
                    kwargs[name] = value
            rows.append(ResultRow(**kwargs))
        return rows
    finally:
        if close:
            fh.close()


# -- comparison -------------------------------------------------------------

@dataclass
class CompareReport:
    ratios: dict                     # key -> other/baseline throughput ratio
    categories: dict                 # (addressing, op) -> (min, mean, max)


def compare(baseline, other) -> CompareReport:
    """Per-point other/baseline throughput ratios with category summaries.

    Points are matched by (label, repetition, channel, direction), so the two
    result sets may differ in data rate but must share the plan shape.
    """
    def keyed(rows):
        out = {}
        for row in rows:
            out[(row.label, row.repetition, row.channel, row.direction)] = row
        return out

    a, b = keyed(baseline), keyed(other)
    if set(a) != set(b):
        missing = set(a) ^ set(b)
        raise ShapeMismatch(f"result sets differ on {len(missing)} point(s)")
    ratios = {}
    buckets: dict[tuple, list[float]] = {}
    for key in a:
        ratio = b[key].gbps / a[key].gbps
        ratios[key] = ratio
        row = a[key]
        buckets.setdefault((row.addressing, row.op), []).append(ratio)
    categories = {
        cat: (min(vals), sum(vals) / len(vals), max(vals))
        for cat, vals in sorted(buckets.items())
    }
    return CompareReport(ratios=ratios, categories=categories)


# -- charts -------------------------------------------------------------------

_SERIES_DIRECTION = {"r": "read", "w": "write", "m": "combined"}


def chart_series(rows, rate: int):
    """fig3-style series for one data rate: GB/s vs burst length."""
    series: dict[str, dict[int, float]] = {}
    for row in rows:
        if row.rate != rate or row.repetition != 0 or row.channel != 0:
            continue
        if row.direction != _SERIES_DIRECTION[row.op]:
            continue
        name = f"{'Seq' if row.addressing == 'seq' else 'Rnd'}-{row.op.upper()}"
        series.setdefault(name, {})[row.burst_len] = row.gbps
    return {
        name: sorted(points.items())
        for name, points in sorted(series.items())
    }


def render_rate_chart(rows, rate: int, title: str) -> str:
    from ddr4bench.svg import render_line_chart

    return render_line_chart(
        chart_series(rows, rate),
        title=title,
        xlabel="burst length (beats)",
        ylabel="throughput (GB/s)",
    )


def summary_table(rows) -> str:
    """Plain-text table of point throughputs (first repetition, channel 0)."""
    lines = [f"{'label':<22} {'rate':>5} {'dir':>9} {'GB/s':>8} "
             f"{'tx':>7} {'errors':>6}"]
    for row in rows:
        if row.repetition != 0 or row.channel != 0:
            continue
        lines.append(f"{row.label:<22} {row.rate:>5} {row.direction:>9} "
                     f"{row.gbps:>8.3f} {row.tx:>7} {row.data_errors:>6}")
    return "\n".join(lines)
