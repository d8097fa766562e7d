"""Host-side command layer.

Configures each channel's traffic generator at run time, launches batches,
reads counters back, and turns counters into throughput statistics.  The
physical serial link of the hardware platform is replaced by an in-process
API plus a line-oriented text protocol usable over stdin/stdout:

    config <ch> op=<r|w|mixed[:frac]> addr=<seq|rnd[:seed]>
               burst=<fixed|incr|wrap>:<len> sig=<nb|b|ag> batch=<n>
               range=<base>:<limit> [pattern=<hash|lfsr|const[:arg]>]
    run <ch> | runall | counters <ch> | reset <ch> | query

Responses are single lines: `ok key=value ...` or `err <code> <detail>`.
"""

from __future__ import annotations

from dataclasses import dataclass

from ddr4bench.axi import BurstType
from ddr4bench.channel import MemoryChannel
from ddr4bench.clocks import ClockConfig
from ddr4bench.traffic import (
    Addressing,
    BatchTimeout,
    DataPattern,
    OpMode,
    PerfCounters,
    Signaling,
    TrafficConfig,
)

BAD_CHANNEL = "BadChannel"
BAD_CONFIG = "BadConfig"
BUSY = "Busy"
EMPTY_BATCH = "EmptyBatch"
TIMEOUT = "Timeout"
BAD_COMMAND = "BadCommand"


class HostError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


# -- commands ----------------------------------------------------------------

@dataclass(frozen=True)
class Configure:
    channel: int
    config: TrafficConfig


@dataclass(frozen=True)
class Run:
    channel: int


@dataclass(frozen=True)
class RunAll:
    pass


@dataclass(frozen=True)
class ReadCounters:
    channel: int


@dataclass(frozen=True)
class ResetCounters:
    channel: int


@dataclass(frozen=True)
class Query:
    pass


@dataclass(frozen=True)
class ThroughputReport:
    channel: int
    direction: str            # read | write | combined
    bytes: int
    cycles: int
    axi_clock_hz: int
    throughput_gbps: float
    tx_count: int
    mean_cycles_per_tx: float


def throughput(counters: PerfCounters, clk: ClockConfig,
               channel: int = 0) -> list[ThroughputReport]:
    """Per-direction reports plus a combined report for mixed batches.

    Per-direction throughput_gbps is exactly bytes / (cycles / axi_clock_hz)
    / 1e9; the combined report's throughput is exactly the sum of the two.
    """
    reports = []
    hz = clk.axi_clock_hz
    if counters.read_tx:
        if counters.read_cycles <= 0:
            raise HostError(EMPTY_BATCH, "read transactions with zero cycles")
        gbps = counters.read_bytes / (counters.read_cycles / hz) / 1e9
        reports.append(ThroughputReport(
            channel, "read", counters.read_bytes, counters.read_cycles, hz,
            gbps, counters.read_tx, counters.read_cycles / counters.read_tx))
    if counters.write_tx:
        if counters.write_cycles <= 0:
            raise HostError(EMPTY_BATCH, "write transactions with zero cycles")
        gbps = counters.write_bytes / (counters.write_cycles / hz) / 1e9
        reports.append(ThroughputReport(
            channel, "write", counters.write_bytes, counters.write_cycles, hz,
            gbps, counters.write_tx, counters.write_cycles / counters.write_tx))
    if not reports:
        raise HostError(EMPTY_BATCH, "no transactions ran")
    if len(reports) == 2:
        combined_bytes = counters.read_bytes + counters.write_bytes
        combined_cycles = max(counters.read_cycles, counters.write_cycles)
        tx = counters.read_tx + counters.write_tx
        reports.append(ThroughputReport(
            channel, "combined", combined_bytes, combined_cycles, hz,
            reports[0].throughput_gbps + reports[1].throughput_gbps,
            tx, combined_cycles / tx))
    return reports


def aggregate(reports_per_channel: list[list[ThroughputReport]]) -> dict:
    """System-level view: per-channel throughputs plus their sums."""
    if not reports_per_channel:
        raise HostError(EMPTY_BATCH, "no channel reports")
    totals: dict[str, float] = {}
    channels = []
    for reports in reports_per_channel:
        entry = {}
        for rep in reports:
            entry[rep.direction] = rep.throughput_gbps
            totals[rep.direction] = totals.get(rep.direction, 0.0) + rep.throughput_gbps
        channels.append(entry)
    return {"channels": channels, "total_gbps": totals}


class HostController:
    """Command executor over N identical, independent channels."""

    def __init__(self, channel_count: int = 1, data_rate_mts: int = 1600, *,
                 refresh_enabled: bool = True, timing=None, geometry=None,
                 controller_config=None, keep_command_log: bool = False,
                 timeout_axi: int = 10_000_000):
        if channel_count < 1:
            raise ValueError("channel_count must be >= 1")
        self.clock = ClockConfig.from_data_rate(data_rate_mts)
        self.channels = [
            MemoryChannel(data_rate_mts, timing=timing, geometry=geometry,
                          refresh_enabled=refresh_enabled,
                          controller_config=controller_config,
                          keep_command_log=keep_command_log)
            for _ in range(channel_count)
        ]
        self.configs: list[TrafficConfig | None] = [None] * channel_count
        self.timeout_axi = timeout_axi
        self._busy = False

    def _channel(self, index: int) -> MemoryChannel:
        if not 0 <= index < len(self.channels):
            raise HostError(BAD_CHANNEL, f"channel {index} of {len(self.channels)}")
        return self.channels[index]

    def execute(self, cmd):
        if isinstance(cmd, Configure):
            ch = self._channel(cmd.channel)
            try:
                cmd.config.validate(ch.geometry.capacity_bytes)
            except ValueError as exc:
                raise HostError(BAD_CONFIG, str(exc)) from None
            self.configs[cmd.channel] = cmd.config
            return {"status": "ok"}
        if isinstance(cmd, Run):
            return {"status": "ok", "reports": self._run_one(cmd.channel)}
        if isinstance(cmd, RunAll):
            all_reports = [self._run_one(i) for i in range(len(self.channels))]
            return {"status": "ok", "reports": all_reports,
                    "aggregate": aggregate(all_reports)}
        if isinstance(cmd, ReadCounters):
            ch = self._channel(cmd.channel)
            return {"status": "ok", "counters": ch.last_counters.copy()}
        if isinstance(cmd, ResetCounters):
            self._channel(cmd.channel).reset_counters()
            return {"status": "ok"}
        if isinstance(cmd, Query):
            ch = self.channels[0]
            return {
                "status": "ok",
                "channels": len(self.channels),
                "data_rate_mts": self.clock.data_rate_mts,
                "mem_clock_hz": self.clock.mem_clock_hz,
                "axi_clock_hz": self.clock.axi_clock_hz,
                "capacity_bytes": ch.geometry.capacity_bytes,
                "refresh_enabled": ch.device.refresh_enabled,
            }
        raise HostError(BAD_COMMAND, repr(cmd))

    def _run_one(self, index: int) -> list[ThroughputReport]:
        ch = self._channel(index)
        cfg = self.configs[index]
        if cfg is None:
            raise HostError(BAD_CONFIG, f"channel {index} not configured")
        if self._busy:
            raise HostError(BUSY, "a batch is already running")
        self._busy = True
        try:
            ch.run_batch(cfg, timeout_axi=self.timeout_axi)
        except BatchTimeout as exc:
            raise HostError(TIMEOUT, str(exc)) from None
        finally:
            self._busy = False
        return throughput(ch.last_counters, self.clock, channel=index)


# -- text protocol -------------------------------------------------------------

def parse_config_fields(fields: dict[str, str]) -> TrafficConfig:
    """Build a TrafficConfig from protocol key=value fields."""
    kwargs = {}
    try:
        if "op" in fields:
            op = fields["op"]
            if op.startswith("mixed"):
                kwargs["op_mode"] = OpMode.MIXED
                if ":" in op:
                    kwargs["read_fraction"] = float(op.split(":", 1)[1])
            else:
                kwargs["op_mode"] = OpMode(op)
        if "addr" in fields:
            addr = fields["addr"]
            if addr.startswith("rnd"):
                kwargs["addressing"] = Addressing.RANDOM
                if ":" in addr:
                    kwargs["addr_seed"] = int(addr.split(":", 1)[1], 0)
            else:
                kwargs["addressing"] = Addressing(addr)
        if "burst" in fields:
            kind, _, length = fields["burst"].partition(":")
            kwargs["burst_type"] = BurstType(kind)
            if length:
                kwargs["burst_len"] = int(length, 0)
        if "sig" in fields:
            kwargs["signaling"] = Signaling(fields["sig"])
        if "batch" in fields:
            kwargs["batch_len"] = int(fields["batch"], 0)
        if "range" in fields:
            base, _, limit = fields["range"].partition(":")
            kwargs["base"] = int(base, 0)
            kwargs["limit"] = int(limit, 0)
        if "pattern" in fields:
            name, _, arg = fields["pattern"].partition(":")
            kwargs["data_pattern"] = DataPattern(name)
            if arg and kwargs["data_pattern"] is DataPattern.CONSTANT:
                kwargs["constant_byte"] = int(arg, 0)
            elif arg:
                kwargs["data_seed"] = int(arg, 0)
        if "frac" in fields:
            kwargs["read_fraction"] = float(fields["frac"])
        if "seed" in fields:
            kwargs["addr_seed"] = int(fields["seed"], 0)
    except (ValueError, KeyError) as exc:
        raise HostError(BAD_CONFIG, f"bad field: {exc}") from None
    return TrafficConfig(**kwargs)


def parse_command(line: str):
    tokens = line.split()
    if not tokens:
        raise HostError(BAD_COMMAND, "empty line")
    name = tokens[0].lower()
    try:
        if name == "config":
            channel = int(tokens[1], 0)
            fields = {}
            for token in tokens[2:]:
                key, _, value = token.partition("=")
                if not value:
                    raise HostError(BAD_CONFIG, f"expected key=value, got {token!r}")
                fields[key] = value
            return Configure(channel, parse_config_fields(fields))
        if name == "run":
            return Run(int(tokens[1], 0))
        if name == "runall":
            return RunAll()
        if name == "counters":
            return ReadCounters(int(tokens[1], 0))
        if name == "reset":
            return ResetCounters(int(tokens[1], 0))
        if name == "query":
            return Query()
    except (IndexError, ValueError) as exc:
        raise HostError(BAD_COMMAND, f"{name}: {exc}") from None
    raise HostError(BAD_COMMAND, name)


def _format_counters(c: PerfCounters) -> str:
    return (f"read_cycles={c.read_cycles} write_cycles={c.write_cycles} "
            f"read_tx={c.read_tx} write_tx={c.write_tx} "
            f"read_bytes={c.read_bytes} write_bytes={c.write_bytes} "
            f"data_errors={c.data_errors} unwritten_reads={c.unwritten_reads}")


def format_response(result: dict) -> str:
    parts = ["ok"]
    if "counters" in result:
        parts.append(_format_counters(result["counters"]))
    if "reports" in result:
        reports = result["reports"]
        if reports and isinstance(reports[0], ThroughputReport):
            reports = [reports]
        for channel_reports in reports:
            for rep in channel_reports:
                parts.append(
                    f"ch{rep.channel}.{rep.direction}={rep.throughput_gbps:.6f}"
                )
    if "aggregate" in result:
        for direction, value in result["aggregate"]["total_gbps"].items():
            parts.append(f"total.{direction}={value:.6f}")
    for key in ("channels", "data_rate_mts", "mem_clock_hz", "axi_clock_hz",
                "capacity_bytes", "refresh_enabled"):
        if key in result:
            parts.append(f"{key}={result[key]}")
    return " ".join(parts)


def run_repl(host: HostController, instream, outstream) -> None:
    """One command per line on instream, one response line on outstream."""
    for line in instream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("quit", "exit"):
            break
        try:
            result = host.execute(parse_command(line))
            outstream.write(format_response(result) + "\n")
        except HostError as exc:
            outstream.write(f"err {exc.code} {exc.detail}\n")
        outstream.flush()
