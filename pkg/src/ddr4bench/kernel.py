"""Deterministic fixed-order tick engine.

Components are ticked in a fixed order every memory cycle: memory device
first, then controller, then (only when the cycle index is a multiple of
four) the AXI fabric and finally the traffic generator.  Responses therefore
travel toward the traffic generator before new requests launched in the same
cycle, which resolves same-cycle handshakes identically on every run.  No
event calendar: the system is a synchronous pipeline and a fixed tick order
gives determinism cheaply.
"""

from __future__ import annotations

from ddr4bench.clocks import MEM_CYCLES_PER_AXI_CYCLE, SimTime


class SimKernel:
    """Global tick source shared by all components of one channel."""

    def __init__(self):
        self.mem_cycles = 0
        self._mem_tickers = []
        self._axi_tickers = []

    def add_mem_ticker(self, component) -> None:
        """Register a component ticked every memory cycle via .tick(now)."""
        self._mem_tickers.append(component)

    def add_axi_ticker(self, component) -> None:
        """Register a component ticked on AXI boundaries via .tick_axi(axi_now)."""
        self._axi_tickers.append(component)

    def set_axi_tickers(self, components) -> None:
        """Replace the AXI-domain tick list (fabric and generator per batch)."""
        self._axi_tickers = list(components)

    @property
    def now(self) -> SimTime:
        return SimTime(self.mem_cycles)

    @property
    def axi_now(self) -> int:
        return self.mem_cycles // MEM_CYCLES_PER_AXI_CYCLE

    def advance(self) -> SimTime:
        """Advance one memory cycle, ticking components in the fixed order."""
        self.mem_cycles += 1
        now = self.mem_cycles
        for component in self._mem_tickers:
            component.tick(now)
        if now % MEM_CYCLES_PER_AXI_CYCLE == 0:
            axi_now = now // MEM_CYCLES_PER_AXI_CYCLE
            for component in self._axi_tickers:
                component.tick_axi(axi_now)
        return SimTime(now)

    def advance_n(self, cycles: int) -> SimTime:
        for _ in range(cycles):
            self.advance()
        return SimTime(self.mem_cycles)

    def run_until(self, predicate, max_cycles: int) -> SimTime:
        """Advance until predicate() is true; raises RuntimeError at the bound."""
        deadline = self.mem_cycles + max_cycles
        while not predicate():
            if self.mem_cycles >= deadline:
                raise RuntimeError(f"run_until exceeded {max_cycles} cycles")
            self.advance()
        return SimTime(self.mem_cycles)
