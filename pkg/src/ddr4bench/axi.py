"""AXI4 bus-functional model.

Five independent channels (read address, read data, write address, write
data, write response) resolved once per AXI-clock cycle.  A transfer happens
exactly when one side offers a payload (valid) and the other side is ready in
the same cycle; a stalled payload is re-offered unchanged the next cycle.
Responses resolve before new addresses so a same-cycle completion can free a
queue slot that a new request then takes.

Beat size is fixed at the full 256-bit port width (32 bytes); bursts of 1 to
128 beats are accepted for FIXED and INCR, and WRAP is restricted to the
protocol-legal lengths {2, 4, 8, 16}.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

BEAT_BYTES = 32
MAX_BURST_LEN = 128
AXI_BOUNDARY = 4096
WRAP_LENGTHS = (2, 4, 8, 16)


class InvalidBurst(Exception):
    """Burst parameters violate the bus protocol rules."""


class BurstType(enum.Enum):
    FIXED = "fixed"
    INCR = "incr"
    WRAP = "wrap"


def beat_addresses(start_addr: int, burst_len: int, burst_type: BurstType,
                   beat_bytes: int = BEAT_BYTES) -> list[int]:
    """Per-beat byte addresses for one transaction."""
    if not 1 <= burst_len <= MAX_BURST_LEN:
        raise InvalidBurst(f"burst length {burst_len} outside 1..{MAX_BURST_LEN}")
    if start_addr % beat_bytes:
        raise InvalidBurst(f"start address {start_addr:#x} not beat aligned")
    if burst_type is BurstType.FIXED:
        return [start_addr] * burst_len
    if burst_type is BurstType.INCR:
        last = start_addr + (burst_len - 1) * beat_bytes
        if start_addr // AXI_BOUNDARY != last // AXI_BOUNDARY:
            raise InvalidBurst(
                f"INCR burst {start_addr:#x}+{burst_len} beats crosses a 4 KB boundary"
            )
        return [start_addr + i * beat_bytes for i in range(burst_len)]
    if burst_type is BurstType.WRAP:
        if burst_len not in WRAP_LENGTHS:
            raise InvalidBurst(f"WRAP burst length must be one of {WRAP_LENGTHS}")
        region = burst_len * beat_bytes
        base = (start_addr // region) * region
        return [base + (start_addr - base + i * beat_bytes) % region
                for i in range(burst_len)]
    raise InvalidBurst(f"unknown burst type {burst_type}")


@dataclass
class AxiTransaction:
    """One read or write request and its handshake lifecycle."""

    txn_id: int
    direction: str                    # 'r' or 'w'
    start_addr: int
    burst_len: int
    burst_type: BurstType
    beat_bytes: int = BEAT_BYTES
    issue_cycle: int | None = None    # AXI cycle of the address transfer
    last_beat_cycle: int | None = None
    addr_done: bool = False
    beats_done: int = 0
    resp_done: bool = False
    beats: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.direction not in ("r", "w"):
            raise ValueError("direction must be 'r' or 'w'")
        if not self.beats:
            self.beats = beat_addresses(self.start_addr, self.burst_len,
                                        self.burst_type, self.beat_bytes)

    @property
    def state(self) -> str:
        if not self.addr_done:
            return "AddressPending"
        if self.beats_done < self.burst_len:
            return f"DataPhase({self.beats_done})"
        if self.direction == "w" and not self.resp_done:
            return "AwaitingResponse"
        return "Done"

    @property
    def done(self) -> bool:
        if self.direction == "r":
            return self.addr_done and self.beats_done >= self.burst_len
        return self.resp_done

    @property
    def bytes_total(self) -> int:
        return self.burst_len * self.beat_bytes


@dataclass
class ChannelState:
    """Valid/ready snapshot of the five channels for one AXI cycle."""

    ar: tuple[bool, bool] = (False, False)
    aw: tuple[bool, bool] = (False, False)
    w: tuple[bool, bool] = (False, False)
    r: tuple[bool, bool] = (False, False)
    b: tuple[bool, bool] = (False, False)

    def transfers(self) -> list[str]:
        return [name for name in ("ar", "aw", "w", "r", "b")
                if getattr(self, name) == (True, True)]


class AxiFabric:
    """Connects a master-side endpoint (traffic generator) to a slave-side
    endpoint (memory controller adapter) and resolves handshakes.

    Master endpoint interface:
        ar_request(axi_now) -> AxiTransaction | None      (AR valid + payload)
        on_ar_accept(axi_now, txn)
        aw_request(axi_now) -> AxiTransaction | None
        on_aw_accept(axi_now, txn)
        w_beat(axi_now) -> (txn, beat_index, addr, data) | None
        on_w_accept(axi_now, txn, beat_index)
        r_ready(axi_now) -> bool
        on_r_beat(axi_now, txn_id, beat_index, data, last)
        b_ready(axi_now) -> bool
        on_b_resp(axi_now, txn_id)

    Slave endpoint interface:
        accept_read(txn, axi_now) -> bool                 (AR ready this cycle)
        accept_write(txn, axi_now) -> bool
        w_ready(axi_now) -> bool
        push_write_beat(txn_id, beat_index, addr, data)
        peek_read_beat() -> (txn_id, beat_index, data, last) | None
        pop_read_beat()
        peek_write_resp() -> txn_id | None
        pop_write_resp()
    """

    def __init__(self, master, slave, trace: list | None = None,
                 record_state: bool = False):
        self.master = master
        self.slave = slave
        self.trace = trace
        self.record_state = record_state
        self.last_state: ChannelState | None = None
        self.reads_in_flight = 0
        self.writes_in_flight = 0

    def track_outstanding(self) -> tuple[int, int]:
        return self.reads_in_flight, self.writes_in_flight

    def _note(self, cycle, channel, event, txn_id, addr):
        if self.trace is not None:
            self.trace.append((cycle, channel, event, txn_id, addr))

    def tick_axi(self, axi_now: int) -> None:
        master, slave = self.master, self.slave

        # R: read data toward the master, one beat per cycle
        beat = slave.peek_read_beat()
        r_valid = beat is not None
        r_ready = master.r_ready(axi_now)
        if r_valid and r_ready:
            txn_id, beat_index, data, last = beat
            slave.pop_read_beat()
            master.on_r_beat(axi_now, txn_id, beat_index, data, last)
            if last:
                self.reads_in_flight -= 1
            self._note(axi_now, "R", "beat", txn_id, beat_index)

        # B: write responses toward the master
        resp = slave.peek_write_resp()
        b_valid = resp is not None
        b_ready = master.b_ready(axi_now)
        if b_valid and b_ready:
            slave.pop_write_resp()
            master.on_b_resp(axi_now, resp)
            self.writes_in_flight -= 1
            self._note(axi_now, "B", "resp", resp, 0)

        # AR: new read addresses
        ar = master.ar_request(axi_now)
        ar_ready = False
        if ar is not None:
            ar_ready = slave.accept_read(ar, axi_now)
            if ar_ready:
                ar.addr_done = True
                ar.issue_cycle = axi_now
                master.on_ar_accept(axi_now, ar)
                self.reads_in_flight += 1
                self._note(axi_now, "AR", "addr", ar.txn_id, ar.start_addr)

        # AW: new write addresses
        aw = master.aw_request(axi_now)
        aw_ready = False
        if aw is not None:
            aw_ready = slave.accept_write(aw, axi_now)
            if aw_ready:
                aw.addr_done = True
                aw.issue_cycle = axi_now
                master.on_aw_accept(axi_now, aw)
                self.writes_in_flight += 1
                self._note(axi_now, "AW", "addr", aw.txn_id, aw.start_addr)

        # W: write data beats, one per cycle
        item = master.w_beat(axi_now)
        w_ready = False
        if item is not None:
            w_ready = slave.w_ready(axi_now)
            if w_ready:
                txn, beat_index, addr, data = item
                slave.push_write_beat(txn.txn_id, beat_index, addr, data)
                master.on_w_accept(axi_now, txn, beat_index)
                self._note(axi_now, "W", "beat", txn.txn_id, beat_index)

        if self.record_state:
            self.last_state = ChannelState(
                ar=(ar is not None, ar_ready),
                aw=(aw is not None, aw_ready),
                w=(item is not None, w_ready),
                r=(r_valid, r_ready),
                b=(b_valid, b_ready),
            )


def export_trace_csv(trace, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cycle", "channel", "event", "id", "addr"])
        for row in trace:
            writer.writerow(row)
