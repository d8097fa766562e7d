"""Clock configuration and simulated-time primitives.

The platform has two clock domains locked at a fixed 4:1 ratio: the DRAM
device and the memory controller run on the memory clock, the transaction
fabric and traffic generator on the slower AXI clock.  Time is counted in
integer memory-clock cycles; the AXI cycle index is derived by integer
division, never tracked separately.
"""

from __future__ import annotations

from dataclasses import dataclass

MEM_CYCLES_PER_AXI_CYCLE = 4

# DDR transfers twice per memory-clock cycle, so mem_clock_hz = MT/s * 1e6 / 2.
SUPPORTED_DATA_RATES = (1600, 1866, 2133, 2400)


@dataclass(frozen=True)
class ClockConfig:
    """Clock plan for one data rate: memory clock and the 4:1 AXI clock."""

    data_rate_mts: int
    mem_clock_hz: int
    axi_clock_hz: int

    def __post_init__(self):
        if self.data_rate_mts not in SUPPORTED_DATA_RATES:
            raise ValueError(
                f"unsupported data rate {self.data_rate_mts} MT/s; "
                f"supported: {SUPPORTED_DATA_RATES}"
            )
        if self.mem_clock_hz * 2 != self.data_rate_mts * 1_000_000:
            raise ValueError("mem_clock_hz must equal data_rate_mts * 1e6 / 2")
        if self.axi_clock_hz * MEM_CYCLES_PER_AXI_CYCLE != self.mem_clock_hz:
            raise ValueError("axi_clock_hz must equal mem_clock_hz / 4")

    @classmethod
    def from_data_rate(cls, data_rate_mts: int) -> "ClockConfig":
        mem_hz = data_rate_mts * 1_000_000 // 2
        return cls(
            data_rate_mts=data_rate_mts,
            mem_clock_hz=mem_hz,
            axi_clock_hz=mem_hz // MEM_CYCLES_PER_AXI_CYCLE,
        )


@dataclass(frozen=True, order=True)
class SimTime:
    """Monotone count of memory-clock cycles since reset."""

    mem_cycles: int

    @property
    def axi_cycles(self) -> int:
        return self.mem_cycles // MEM_CYCLES_PER_AXI_CYCLE


def to_seconds(t: SimTime | int, clk: ClockConfig) -> float:
    """Convert a memory-cycle count to wall-clock seconds at this data rate."""
    cycles = t.mem_cycles if isinstance(t, SimTime) else t
    return cycles / clk.mem_clock_hz
