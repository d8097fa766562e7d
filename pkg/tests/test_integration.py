"""End-to-end channel workloads: data integrity against an independent shadow
model, determinism, refresh liveness, and full-run legality audits."""

import pytest

from ddr4bench.audit import check_command_log, check_row_consistency, max_refresh_gap
from ddr4bench.axi import BurstType, beat_addresses
from ddr4bench.channel import MemoryChannel
from ddr4bench.dram import timing_preset
from ddr4bench.traffic import (
    Addressing,
    OpMode,
    TrafficConfig,
    gen_data,
    next_address,
)


def wcfg(**kw):
    base = dict(op_mode=OpMode.WRITE_ONLY, addressing=Addressing.RANDOM,
                addr_seed=7, burst_len=4, batch_len=300, limit=1 << 24)
    base.update(kw)
    return TrafficConfig(**base)


def rcfg(**kw):
    base = dict(op_mode=OpMode.READ_ONLY, addressing=Addressing.RANDOM,
                addr_seed=7, burst_len=4, batch_len=300, limit=1 << 24)
    base.update(kw)
    return TrafficConfig(**base)


def build_shadow(cfg, direction):
    """Replay the write stream through the pure address/data functions into a
    flat shadow memory; later writes to a location win, as in the device."""
    shadow = {}
    for index in range(cfg.batch_len):
        start = next_address(cfg, direction, index)
        for beat, addr in enumerate(
                beat_addresses(start, cfg.burst_len, cfg.burst_type)):
            shadow[addr] = gen_data(cfg, addr, beat)
    return shadow


def test_write_batch_matches_shadow_memory():
    ch = MemoryChannel(1600)
    w = wcfg()
    ch.run_batch(w)
    shadow = build_shadow(w, "w")
    for addr, expected in shadow.items():
        bg, bank, row, col = ch.mapper.decode(addr)
        block = ch.device.read_block(bg, bank, row, col // 8)
        off = addr % 64
        assert block[off:off + 32] == expected, f"addr {addr:#x}"


def test_write_then_read_zero_errors_random():
    ch = MemoryChannel(1600)
    ch.run_batch(wcfg())
    res = ch.run_batch(rcfg())
    assert res.counters.data_errors == 0
    assert res.counters.unwritten_reads == 0  # same seed revisits every spot


def test_write_then_read_zero_errors_sequential():
    ch = MemoryChannel(1600)
    ch.run_batch(wcfg(addressing=Addressing.SEQUENTIAL, burst_len=8,
                      batch_len=200))
    res = ch.run_batch(rcfg(addressing=Addressing.SEQUENTIAL, burst_len=8,
                            batch_len=200))
    assert res.counters.data_errors == 0
    assert res.counters.unwritten_reads == 0


def test_unwritten_reads_reported_not_fatal():
    ch = MemoryChannel(1600)
    res = ch.run_batch(rcfg(addr_seed=99, batch_len=50))
    assert res.counters.data_errors == 0
    assert res.counters.unwritten_reads == 200  # 50 txns x 4 beats, all cold


def test_determinism_identical_runs():
    def one_run():
        ch = MemoryChannel(1600)
        ch.run_batch(wcfg(batch_len=120))
        res = ch.run_batch(rcfg(batch_len=120))
        return res.counters

    a, b = one_run(), one_run()
    assert a == b


def test_refresh_liveness_gap_bound():
    ch = MemoryChannel(1600, keep_command_log=True)
    cfg = TrafficConfig(op_mode=OpMode.READ_ONLY, burst_len=32,
                        batch_len=2500, limit=1 << 24)
    ch.run_batch(cfg)
    t = timing_preset(1600)
    gap = max_refresh_gap(ch.command_log)
    assert gap is not None, "expected several refreshes in a long run"
    assert gap <= 2 * t.tREFI


def test_full_run_audit_clean_mixed_random():
    ch = MemoryChannel(1600, keep_command_log=True)
    cfg = TrafficConfig(op_mode=OpMode.MIXED, addressing=Addressing.RANDOM,
                        burst_len=8, batch_len=400, limit=1 << 24)
    ch.run_batch(cfg)
    log = ch.command_log
    assert len(log) > 800
    assert check_command_log(log, ch.timing, ch.geometry) == []
    assert check_row_consistency(log) == []


def test_channel_state_persists_across_batches():
    ch = MemoryChannel(1600)
    ch.run_batch(wcfg(batch_len=64))
    written = ch.device.blocks_written
    assert written > 0
    ch.run_batch(rcfg(batch_len=64))
    assert ch.device.blocks_written == written  # reads do not allocate


def test_wrap_burst_workload_runs_clean():
    ch = MemoryChannel(1600, keep_command_log=True)
    w = wcfg(burst_type=BurstType.WRAP, burst_len=8, batch_len=80)
    ch.run_batch(w)
    r = rcfg(burst_type=BurstType.WRAP, burst_len=8, batch_len=80)
    res = ch.run_batch(r)
    assert res.counters.data_errors == 0
    assert check_command_log(ch.command_log, ch.timing, ch.geometry) == []


def test_fixed_burst_workload_runs_clean():
    ch = MemoryChannel(1600)
    w = wcfg(burst_type=BurstType.FIXED, burst_len=4, batch_len=60)
    ch.run_batch(w)
    res = ch.run_batch(rcfg(burst_type=BurstType.FIXED, burst_len=4,
                            batch_len=60))
    assert res.counters.data_errors == 0


def test_no_refresh_channel_never_refreshes():
    ch = MemoryChannel(1600, refresh_enabled=False, keep_command_log=True)
    cfg = TrafficConfig(op_mode=OpMode.READ_ONLY, burst_len=32, batch_len=600,
                        limit=1 << 24)
    ch.run_batch(cfg)
    assert all(k != "REF" for _, k, *_ in ch.command_log)


def test_2400_channel_runs_clean():
    ch = MemoryChannel(2400, keep_command_log=True)
    ch.run_batch(wcfg(batch_len=150))
    res = ch.run_batch(rcfg(batch_len=150))
    assert res.counters.data_errors == 0
    assert check_command_log(ch.command_log, ch.timing, ch.geometry) == []
