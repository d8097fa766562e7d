"""One complete memory channel: device, controller, fabric, traffic generator.

Channels are independent and share no state; a multi-channel platform is N
instances of this class.  Components tick in the fixed kernel order (device,
controller, then fabric and traffic generator on AXI boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass

from ddr4bench.axi import AxiFabric
from ddr4bench.clocks import ClockConfig, SimTime
from ddr4bench.controller import ControllerConfig, MemoryController
from ddr4bench.dram import DramDevice, DramGeometry, TimingParams, timing_preset
from ddr4bench.kernel import SimKernel
from ddr4bench.mapping import AddressMap
from ddr4bench.traffic import PerfCounters, TrafficConfig, TrafficGenerator


@dataclass
class BatchResult:
    counters: PerfCounters
    controller_stats: dict
    mem_cycles: int


class MemoryChannel:
    def __init__(self, data_rate_mts: int = 1600, *,
                 geometry: DramGeometry | None = None,
                 timing: TimingParams | None = None,
                 refresh_enabled: bool = True,
                 controller_config: ControllerConfig | None = None,
                 keep_command_log: bool = False,
                 trace_axi: bool = False):
        self.clock = ClockConfig.from_data_rate(data_rate_mts)
        self.geometry = geometry or DramGeometry()
        self.timing = timing or timing_preset(data_rate_mts)
        self.device = DramDevice(self.geometry, self.timing,
                                 refresh_enabled=refresh_enabled,
                                 keep_log=keep_command_log)
        self.mapper = AddressMap(self.geometry)
        self.controller = MemoryController(self.device, self.mapper,
                                           controller_config)
        self.kernel = SimKernel()
        self.kernel.add_mem_ticker(self.device)
        self.kernel.add_mem_ticker(self.controller)
        self.axi_trace = [] if trace_axi else None
        self.last_counters = PerfCounters()
        self.tg: TrafficGenerator | None = None

    @property
    def now(self) -> SimTime:
        return self.kernel.now

    @property
    def command_log(self):
        return self.device.command_log

    def advance(self) -> SimTime:
        return self.kernel.advance()

    def run_batch(self, cfg: TrafficConfig, *,
                  timeout_axi: int = 10_000_000,
                  fault_beat: int | None = None,
                  fault_bit: int = 0) -> BatchResult:
        """Run one transaction batch to completion and return its counters."""
        cfg.validate(self.geometry.capacity_bytes)
        tg = TrafficGenerator(cfg, timeout_axi=timeout_axi,
                              fault_beat=fault_beat, fault_bit=fault_bit)
        fabric = AxiFabric(tg, self.controller, trace=self.axi_trace)
        self.tg = tg
        self.kernel.set_axi_tickers([fabric, tg])
        start = self.kernel.mem_cycles
        while not tg.batch_done:
            self.kernel.advance()
        self.kernel.set_axi_tickers([])
        self.last_counters = tg.finalize()
        return BatchResult(
            counters=self.last_counters.copy(),
            controller_stats=self.controller.stats(),
            mem_cycles=self.kernel.mem_cycles - start,
        )

    def reset_counters(self) -> None:
        self.last_counters = PerfCounters()
