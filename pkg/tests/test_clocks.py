import pytest

from ddr4bench.clocks import (
    MEM_CYCLES_PER_AXI_CYCLE,
    SUPPORTED_DATA_RATES,
    ClockConfig,
    SimTime,
    to_seconds,
)
from ddr4bench.kernel import SimKernel


@pytest.mark.parametrize("rate,mem_mhz,axi_mhz", [
    (1600, 800.0, 200.0),
    (1866, 933.0, 233.25),
    (2133, 1066.5, 266.625),
    (2400, 1200.0, 300.0),
])
def test_clock_presets(rate, mem_mhz, axi_mhz):
    clk = ClockConfig.from_data_rate(rate)
    assert clk.mem_clock_hz == int(mem_mhz * 1e6)
    assert clk.axi_clock_hz == int(axi_mhz * 1e6)
    assert clk.mem_clock_hz * 2 == rate * 1_000_000
    assert clk.axi_clock_hz * 4 == clk.mem_clock_hz


def test_unsupported_rate_rejected():
    with pytest.raises(ValueError):
        ClockConfig.from_data_rate(3200)
    with pytest.raises(ValueError):
        ClockConfig(1600, 800_000_000, 100_000_000)


def test_axi_cycle_is_integer_division():
    assert SimTime(7).axi_cycles == 1
    assert SimTime(8).axi_cycles == 2
    assert SimTime(4000).axi_cycles == 1000


def test_to_seconds():
    clk1600 = ClockConfig.from_data_rate(1600)
    assert to_seconds(SimTime(800_000_000), clk1600) == 1.0
    assert to_seconds(SimTime(0), clk1600) == 0.0
    clk2400 = ClockConfig.from_data_rate(2400)
    assert to_seconds(SimTime(1_200_000_000), clk2400) == 1.0
    assert to_seconds(123, clk1600) == 123 / 800e6


class _Recorder:
    def __init__(self, log, name):
        self.log = log
        self.name = name

    def tick(self, now):
        self.log.append((self.name, now))

    def tick_axi(self, axi_now):
        self.log.append((self.name, "axi", axi_now))


def test_kernel_tick_order_and_ratio():
    log = []
    kernel = SimKernel()
    kernel.add_mem_ticker(_Recorder(log, "device"))
    kernel.add_mem_ticker(_Recorder(log, "controller"))
    kernel.add_axi_ticker(_Recorder(log, "fabric"))
    kernel.add_axi_ticker(_Recorder(log, "tg"))

    kernel.advance()  # cycle 1: no AXI boundary
    assert log == [("device", 1), ("controller", 1)]
    log.clear()
    kernel.advance_n(3)  # cycles 2..4: boundary at 4
    assert ("fabric", "axi", 1) in log and ("tg", "axi", 1) in log
    assert log.index(("fabric", "axi", 1)) < log.index(("tg", "axi", 1))
    # mem components of cycle 4 tick before the AXI components
    assert log.index(("controller", 4)) < log.index(("fabric", "axi", 1))


def test_kernel_axi_tick_count():
    kernel = SimKernel()
    ticks = []
    kernel.add_axi_ticker(_Recorder(ticks, "t"))
    kernel.advance_n(4000)
    assert len(ticks) == 1000
    assert kernel.now.axi_cycles == 1000


def test_all_rates_have_4_to_1_ratio():
    for rate in SUPPORTED_DATA_RATES:
        clk = ClockConfig.from_data_rate(rate)
        assert clk.mem_clock_hz == clk.axi_clock_hz * MEM_CYCLES_PER_AXI_CYCLE
