"""Cycle-approximate simulator of a DDR4 memory benchmarking platform.

A JEDEC-timing DDR4 device model sits behind a reordering memory controller
and an AXI4 bus-functional fabric, stimulated by a run-time-configurable
traffic generator with performance counters.  A host-command layer and a CLI
harness drive throughput experiments and emit CSV tables and SVG charts.
"""

from ddr4bench.clocks import ClockConfig, SimTime, to_seconds
from ddr4bench.dram import (
    DramGeometry,
    TimingParams,
    DramCommand,
    DramDevice,
    peak_bandwidth_gbps,
    timing_preset,
)
from ddr4bench.traffic import TrafficConfig, PerfCounters
from ddr4bench.channel import MemoryChannel
from ddr4bench.host import HostController, ThroughputReport

__version__ = "0.1.0"

__all__ = [
    "ClockConfig",
    "SimTime",
    "to_seconds",
    "DramGeometry",
    "TimingParams",
    "DramCommand",
    "DramDevice",
    "peak_bandwidth_gbps",
    "timing_preset",
    "TrafficConfig",
    "PerfCounters",
    "MemoryChannel",
    "HostController",
    "ThroughputReport",
    "__version__",
]
