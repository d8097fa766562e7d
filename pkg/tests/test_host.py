import io

import pytest

from ddr4bench.clocks import ClockConfig
from ddr4bench.host import (
    BAD_CHANNEL,
    BAD_CONFIG,
    EMPTY_BATCH,
    Configure,
    HostController,
    HostError,
    Query,
    ReadCounters,
    ResetCounters,
    Run,
    RunAll,
    ThroughputReport,
    aggregate,
    format_response,
    parse_command,
    run_repl,
    throughput,
)
from ddr4bench.traffic import OpMode, PerfCounters, TrafficConfig


def small_cfg(**kw):
    base = dict(burst_len=8, batch_len=40, limit=1 << 22)
    base.update(kw)
    return TrafficConfig(**base)


def test_throughput_arithmetic():
    clk = ClockConfig.from_data_rate(1600)
    counters = PerfCounters(read_cycles=2_000_000, read_tx=1000,
                            read_bytes=64_000_000)
    reports = throughput(counters, clk)
    assert len(reports) == 1
    rep = reports[0]
    assert rep.direction == "read"
    assert rep.throughput_gbps == pytest.approx(6.4)
    # exact recompute from the report's own fields
    assert rep.throughput_gbps == rep.bytes / (rep.cycles / rep.axi_clock_hz) / 1e9
    assert rep.mean_cycles_per_tx == 2000.0


def test_throughput_combined_is_sum():
    clk = ClockConfig.from_data_rate(1600)
    counters = PerfCounters(read_cycles=1000, read_tx=10, read_bytes=32000,
                            write_cycles=2000, write_tx=10, write_bytes=32000)
    reports = {r.direction: r for r in throughput(counters, clk)}
    assert reports["combined"].throughput_gbps == pytest.approx(
        reports["read"].throughput_gbps + reports["write"].throughput_gbps)


def test_throughput_write_only_omits_read_direction():
    clk = ClockConfig.from_data_rate(1600)
    counters = PerfCounters(write_cycles=1000, write_tx=5, write_bytes=6400)
    reports = throughput(counters, clk)
    assert [r.direction for r in reports] == ["write"]


def test_throughput_empty_batch_error():
    clk = ClockConfig.from_data_rate(1600)
    with pytest.raises(HostError) as err:
        throughput(PerfCounters(), clk)
    assert err.value.code == EMPTY_BATCH


def test_aggregate_sums_channels():
    def rep(ch, gbps):
        return ThroughputReport(ch, "read", 0, 1, 200_000_000, gbps, 1, 1.0)

    agg = aggregate([[rep(0, 6.29)], [rep(1, 6.29)], [rep(2, 6.29)]])
    assert agg["total_gbps"]["read"] == pytest.approx(3 * 6.29)
    assert agg["total_gbps"]["read"] == pytest.approx(18.87)
    single = aggregate([[rep(0, 5.0)]])
    assert single["total_gbps"]["read"] == 5.0


def test_configure_then_counters_zero_without_run():
    host = HostController(1)
    host.execute(Configure(0, small_cfg()))
    result = host.execute(ReadCounters(0))
    c = result["counters"]
    assert c.read_cycles == 0 and c.read_tx == 0 and c.read_bytes == 0


def test_run_unconfigured_is_bad_config():
    host = HostController(1)
    with pytest.raises(HostError) as err:
        host.execute(Run(0))
    assert err.value.code == BAD_CONFIG


def test_bad_channel():
    host = HostController(2)
    with pytest.raises(HostError) as err:
        host.execute(Configure(5, small_cfg()))
    assert err.value.code == BAD_CHANNEL


def test_bad_config_reported():
    host = HostController(1)
    with pytest.raises(HostError) as err:
        host.execute(Configure(0, small_cfg(batch_len=0)))
    assert err.value.code == BAD_CONFIG


def test_busy_guard():
    from ddr4bench.host import BUSY

    host = HostController(1)
    host.execute(Configure(0, small_cfg()))
    host._busy = True
    with pytest.raises(HostError) as err:
        host.execute(Run(0))
    assert err.value.code == BUSY


def test_run_and_counters_then_reset():
    host = HostController(1)
    host.execute(Configure(0, small_cfg()))
    result = host.execute(Run(0))
    rep = result["reports"][0]
    assert rep.direction == "read" and rep.tx_count == 40
    counters = host.execute(ReadCounters(0))["counters"]
    assert counters.read_tx == 40
    host.execute(ResetCounters(0))
    counters = host.execute(ReadCounters(0))["counters"]
    assert counters.read_tx == 0


def test_runall_identical_channels_identical_reports():
    host = HostController(3)
    for ch in range(3):
        host.execute(Configure(ch, small_cfg()))
    result = host.execute(RunAll())
    reports = result["reports"]
    assert len(reports) == 3
    first = reports[0][0]
    for channel_reports in reports[1:]:
        rep = channel_reports[0]
        assert rep.throughput_gbps == first.throughput_gbps
        assert rep.cycles == first.cycles and rep.bytes == first.bytes
    agg = result["aggregate"]
    assert agg["total_gbps"]["read"] == pytest.approx(3 * first.throughput_gbps)


def test_channel_isolation_single_vs_runall():
    solo = HostController(1)
    solo.execute(Configure(0, small_cfg()))
    solo_rep = solo.execute(Run(0))["reports"][0]
    multi = HostController(3)
    for ch in range(3):
        multi.execute(Configure(ch, small_cfg()))
    multi_reps = multi.execute(RunAll())["reports"]
    assert multi_reps[1][0].throughput_gbps == solo_rep.throughput_gbps
    assert multi_reps[1][0].cycles == solo_rep.cycles


def test_query():
    host = HostController(2, 2400)
    info = host.execute(Query())
    assert info["channels"] == 2
    assert info["data_rate_mts"] == 2400
    assert info["mem_clock_hz"] == 1_200_000_000
    assert info["axi_clock_hz"] == 300_000_000


# -- text protocol ------------------------------------------------------------

def test_parse_config_command():
    cmd = parse_command(
        "config 0 op=mixed:0.5 addr=rnd:7 burst=incr:32 sig=nb batch=100 "
        "range=0x0:0x100000 pattern=lfsr:3")
    assert isinstance(cmd, Configure)
    c = cmd.config
    assert c.op_mode is OpMode.MIXED and c.read_fraction == 0.5
    assert c.addr_seed == 7 and c.burst_len == 32
    assert c.batch_len == 100 and c.limit == 0x100000
    assert c.data_seed == 3


def test_parse_simple_commands():
    assert isinstance(parse_command("run 1"), Run)
    assert isinstance(parse_command("runall"), RunAll)
    assert isinstance(parse_command("counters 0"), ReadCounters)
    assert isinstance(parse_command("reset 0"), ResetCounters)
    assert isinstance(parse_command("query"), Query)
    with pytest.raises(HostError):
        parse_command("bogus 1")
    with pytest.raises(HostError):
        parse_command("config 0 op")


def test_repl_roundtrip():
    host = HostController(1)
    commands = io.StringIO(
        "# demo\n"
        "query\n"
        "config 0 op=r addr=seq burst=incr:8 sig=nb batch=20 range=0x0:0x400000\n"
        "run 0\n"
        "counters 0\n"
        "badcmd\n"
        "quit\n")
    out = io.StringIO()
    run_repl(host, commands, out)
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("ok channels=1")
    assert lines[1] == "ok"
    assert lines[2].startswith("ok ch0.read=")
    assert "read_tx=20" in lines[3]
    assert lines[4].startswith("err BadCommand")


def test_format_response_counters():
    text = format_response({"counters": PerfCounters(read_tx=3)})
    assert "read_tx=3" in text and text.startswith("ok")
