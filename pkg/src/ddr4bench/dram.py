"""Single-rank DDR4 device model.

Models geometry, per-bank row-buffer state machines, JEDEC command-spacing
legality, shared data-bus occupancy, periodic refresh demand, and a
byte-accurate backing store.  The device is a legality-checked command sink:
`can_issue` is a pure predicate over the constraint table, `issue` mutates
state and appends to an audit log that `ddr4bench.audit` can replay with an
independent checker.

Units: all timing parameters are memory-clock cycles.  A data beat on the
DRAM bus moves 2 x bus_width per memory cycle (double data rate), so one
fixed BL8 burst occupies the bus for burst_length / 2 = 4 cycles and moves
64 bytes on a 64-bit bus.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ddr4bench.clocks import ClockConfig

_FAR_PAST = -(1 << 30)


class IllegalCommand(Exception):
    """A command violated the spacing table; this is a scheduler bug."""


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class DramGeometry:
    """Rank organization; capacity follows from the field product."""

    bank_groups: int = 4
    banks_per_group: int = 4
    rows: int = 16384
    columns: int = 1024          # bus-width words per row
    bus_width_bits: int = 64

    def __post_init__(self):
        if self.bank_groups < 1 or self.banks_per_group < 1:
            raise ValueError("bank_groups and banks_per_group must be >= 1")
        if not _is_pow2(self.rows) or not _is_pow2(self.columns):
            raise ValueError("rows and columns must be powers of two")
        if self.bus_width_bits % 8:
            raise ValueError("bus_width_bits must be a multiple of 8")

    @property
    def bus_bytes(self) -> int:
        return self.bus_width_bits // 8

    @property
    def burst_bytes(self) -> int:
        # one BL8 column access
        return self.bus_bytes * 8

    @property
    def row_bytes(self) -> int:
        return self.columns * self.bus_bytes

    @property
    def banks_total(self) -> int:
        return self.bank_groups * self.banks_per_group

    @property
    def capacity_bytes(self) -> int:
        return self.banks_total * self.rows * self.row_bytes


@dataclass(frozen=True)
class TimingParams:
    """JEDEC minimum command spacings in memory-clock cycles for one speed bin."""

    CL: int
    CWL: int
    tRCD: int
    tRP: int
    tRAS: int
    tRFC: int
    tREFI: int
    tCCD_S: int
    tCCD_L: int
    tRRD_S: int
    tRRD_L: int
    tFAW: int
    tWR: int
    tWTR_S: int
    tWTR_L: int
    tRTP: int
    burst_length: int = 8

    def __post_init__(self):
        values = self.__dict__
        for name, value in values.items():
            if value <= 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if self.tCCD_L < self.tCCD_S:
            raise ValueError("tCCD_L must be >= tCCD_S")
        if self.tRRD_L < self.tRRD_S:
            raise ValueError("tRRD_L must be >= tRRD_S")
        if self.tREFI <= self.tRFC:
            raise ValueError("tREFI must be much larger than tRFC")
        if self.burst_length != 8:
            raise ValueError("only fixed BL8 is modeled")

    @property
    def tRC(self) -> int:
        return self.tRAS + self.tRP

    @property
    def burst_cycles(self) -> int:
        return self.burst_length // 2


# Nominal speed-bin presets.  The 1600 bin is the reference; the others scale
# its analog times to the faster clock and use the standard CAS latencies for
# that bin (DDR4-1866 CL13, -2133 CL15, -2400 CL17).
_PRESETS = {
    1600: TimingParams(CL=11, CWL=9, tRCD=11, tRP=11, tRAS=28, tRFC=208,
                       tREFI=6240, tCCD_S=4, tCCD_L=5, tRRD_S=4, tRRD_L=5,
                       tFAW=20, tWR=12, tWTR_S=2, tWTR_L=6, tRTP=6),
    1866: TimingParams(CL=13, CWL=10, tRCD=13, tRP=13, tRAS=32, tRFC=243,
                       tREFI=7278, tCCD_S=4, tCCD_L=6, tRRD_S=5, tRRD_L=6,
                       tFAW=24, tWR=14, tWTR_S=3, tWTR_L=7, tRTP=7),
    2133: TimingParams(CL=15, CWL=11, tRCD=15, tRP=15, tRAS=36, tRFC=278,
                       tREFI=8318, tCCD_S=4, tCCD_L=7, tRRD_S=6, tRRD_L=7,
                       tFAW=27, tWR=16, tWTR_S=3, tWTR_L=8, tRTP=8),
    2400: TimingParams(CL=17, CWL=12, tRCD=17, tRP=17, tRAS=39, tRFC=312,
                       tREFI=9360, tCCD_S=4, tCCD_L=8, tRRD_S=6, tRRD_L=8,
                       tFAW=30, tWR=18, tWTR_S=3, tWTR_L=9, tRTP=9),
}


def timing_preset(data_rate_mts: int) -> TimingParams:
    try:
        return _PRESETS[data_rate_mts]
    except KeyError:
        raise ValueError(f"no timing preset for {data_rate_mts} MT/s") from None


ACT = "ACT"
RD = "RD"
WR = "WR"
PRE = "PRE"
REF = "REF"


@dataclass(frozen=True)
class DramCommand:
    kind: str
    bank_group: int = 0
    bank: int = 0
    row: int = -1
    column: int = -1

    @classmethod
    def act(cls, bank_group, bank, row):
        return cls(ACT, bank_group, bank, row=row)

    @classmethod
    def rd(cls, bank_group, bank, column, row=-1):
        # row is an audit annotation (the requester's intended row); the
        # device addresses the open row, as real column commands do
        return cls(RD, bank_group, bank, row=row, column=column)

    @classmethod
    def wr(cls, bank_group, bank, column, row=-1):
        return cls(WR, bank_group, bank, row=row, column=column)

    @classmethod
    def pre(cls, bank_group, bank):
        return cls(PRE, bank_group, bank)

    @classmethod
    def ref(cls):
        return cls(REF)


@dataclass(frozen=True)
class CompletionInfo:
    """Bus occupancy of the command's data phase; None/None for row commands."""

    data_start: int | None = None
    data_end: int | None = None


@dataclass
class RefreshDemand:
    pending: int          # accrued refresh commands not yet issued
    overdue: bool         # liveness bound or postpone limit reached; must service


class BankState:
    """Row-buffer state machine of one bank; at most one open row."""

    __slots__ = ("open_row", "last_act", "last_rd", "last_wr", "last_pre",
                 "refresh_locked_until")

    def __init__(self):
        self.open_row = None
        self.last_act = _FAR_PAST
        self.last_rd = _FAR_PAST
        self.last_wr = _FAR_PAST
        self.last_pre = _FAR_PAST
        self.refresh_locked_until = 0


class DramDevice:
    """One DDR4 rank: state, legality checks, data store, audit log."""

    REFRESH_POSTPONE_MAX = 8     # JEDEC allowance for pulled-in/postponed REF
    REFRESH_FORCE_FACTOR = 2     # liveness: never let the REF gap exceed 2 x tREFI
    REFRESH_FORCE_MARGIN = 96    # forced early enough to precharge within the bound

    def __init__(self, geometry: DramGeometry, timing: TimingParams,
                 refresh_enabled: bool = True, keep_log: bool = False):
        self.geometry = geometry
        self.timing = timing
        self.refresh_enabled = refresh_enabled
        self.banks = [BankState() for _ in range(geometry.banks_total)]
        self._banks_per_group = geometry.banks_per_group
        # tFAW window of recent ACT cycles plus per-group trackers for tRRD/tCCD
        self._act_window = deque()
        self._last_act_any = _FAR_PAST
        self._last_act_by_group = [_FAR_PAST] * geometry.bank_groups
        self._last_rd_any = _FAR_PAST
        self._last_rd_by_group = [_FAR_PAST] * geometry.bank_groups
        self._last_wr_any = _FAR_PAST
        self._last_wr_by_group = [_FAR_PAST] * geometry.bank_groups
        # outstanding data-bus windows [start, end), pruned as they pass
        self._bus_windows = deque()
        self.command_log = [] if keep_log else None
        self.commands_issued = 0
        self.refresh_count = 0
        # refresh accrual
        self._next_refi = timing.tREFI
        self._refresh_pending = 0
        self._last_ref_cycle = 0
        # backing store: (bg, bank, row, column-block) -> 64-byte bytes
        self._store: dict[tuple, bytes] = {}
        self._zeros = bytes(geometry.burst_bytes)

    # -- clocking ---------------------------------------------------------

    def tick(self, now: int) -> None:
        """Accrue refresh demand; the device itself is otherwise passive."""
        if self.refresh_enabled and now >= self._next_refi:
            self._refresh_pending += 1
            self._next_refi += self.timing.tREFI

    def refresh_tick(self, now: int) -> RefreshDemand | None:
        """Pending-refresh view for the controller; None when nothing is due."""
        if self._refresh_pending == 0:
            return None
        overdue = (
            self._refresh_pending >= self.REFRESH_POSTPONE_MAX
            or now - self._last_ref_cycle
            >= self.REFRESH_FORCE_FACTOR * self.timing.tREFI - self.REFRESH_FORCE_MARGIN
        )
        return RefreshDemand(pending=self._refresh_pending, overdue=overdue)

    # -- legality ---------------------------------------------------------

    def bank(self, bank_group: int, bank: int) -> BankState:
        return self.banks[bank_group * self._banks_per_group + bank]

    def _bus_free(self, start: int, end: int) -> bool:
        for s, e in self._bus_windows:
            if start < e and s < end:
                return False
        return True

    def why_illegal(self, cmd: DramCommand, now: int) -> str | None:
        """Name the violated constraint, or None when the command is legal."""
        t = self.timing
        kind = cmd.kind
        if kind == REF:
            if now - self._last_ref_cycle < t.tRFC and self.refresh_count:
                return "tRFC(REF->REF)"
            for b in self.banks:
                if b.open_row is not None:
                    return "REF: bank not precharged"
                if now - b.last_pre < t.tRP and b.last_pre > _FAR_PAST:
                    return "REF: tRP pending"
                if now < b.refresh_locked_until:
                    return "REF: refresh in progress"
            return None

        bank = self.bank(cmd.bank_group, cmd.bank)
        if now < bank.refresh_locked_until:
            return "refresh lock"
        g = cmd.bank_group

        if kind == ACT:
            if bank.open_row is not None:
                return "ACT: row already open"
            if now - bank.last_pre < t.tRP:
                return "tRP"
            if now - bank.last_act < t.tRC:
                return "tRC"
            if now - self._last_act_by_group[g] < t.tRRD_L:
                return "tRRD_L"
            if now - self._last_act_any < t.tRRD_S:
                return "tRRD_S"
            window_start = now - t.tFAW
            recent = 0
            for c in self._act_window:
                if c > window_start:
                    recent += 1
            if recent >= 4:
                return "tFAW"
            return None

        if kind == PRE:
            if now - bank.last_act < t.tRAS:
                return "tRAS"
            if now - bank.last_rd < t.tRTP:
                return "tRTP"
            if now - bank.last_wr < t.CWL + t.burst_cycles + t.tWR:
                return "tWR"
            return None

        if kind in (RD, WR):
            if bank.open_row is None:
                return f"{kind}: no open row"
            if now - bank.last_act < t.tRCD:
                return "tRCD"
            if now - max(self._last_rd_by_group[g], self._last_wr_by_group[g]) < t.tCCD_L:
                return "tCCD_L"
            if now - max(self._last_rd_any, self._last_wr_any) < t.tCCD_S:
                return "tCCD_S"
            if kind == RD:
                gap_l = t.CWL + t.burst_cycles + t.tWTR_L
                gap_s = t.CWL + t.burst_cycles + t.tWTR_S
                if now - self._last_wr_by_group[g] < gap_l:
                    return "tWTR_L"
                if now - self._last_wr_any < gap_s:
                    return "tWTR_S"
                start = now + t.CL
            else:
                start = now + t.CWL
            if not self._bus_free(start, start + t.burst_cycles):
                return "data bus busy"
            return None

        return f"unknown command kind {kind!r}"

    def can_issue(self, cmd: DramCommand, now: int) -> bool:
        return self.why_illegal(cmd, now) is None

    # -- issue ------------------------------------------------------------

    def issue(self, cmd: DramCommand, now: int) -> CompletionInfo:
        reason = self.why_illegal(cmd, now)
        if reason is not None:
            raise IllegalCommand(f"{cmd.kind} @ {now}: {reason}")
        t = self.timing
        kind = cmd.kind
        info = CompletionInfo()

        if kind == ACT:
            bank = self.bank(cmd.bank_group, cmd.bank)
            bank.open_row = cmd.row
            bank.last_act = now
            self._last_act_any = now
            self._last_act_by_group[cmd.bank_group] = now
            self._act_window.append(now)
            while self._act_window and self._act_window[0] <= now - t.tFAW:
                self._act_window.popleft()
        elif kind == PRE:
            bank = self.bank(cmd.bank_group, cmd.bank)
            bank.open_row = None
            bank.last_pre = now
        elif kind == RD:
            bank = self.bank(cmd.bank_group, cmd.bank)
            bank.last_rd = now
            self._last_rd_any = now
            self._last_rd_by_group[cmd.bank_group] = now
            start = now + t.CL
            end = start + t.burst_cycles
            self._add_bus_window(start, end, now)
            info = CompletionInfo(start, end)
        elif kind == WR:
            bank = self.bank(cmd.bank_group, cmd.bank)
            bank.last_wr = now
            self._last_wr_any = now
            self._last_wr_by_group[cmd.bank_group] = now
            start = now + t.CWL
            end = start + t.burst_cycles
            self._add_bus_window(start, end, now)
            info = CompletionInfo(start, end)
        elif kind == REF:
            locked_until = now + t.tRFC
            for bank in self.banks:
                bank.refresh_locked_until = locked_until
                bank.open_row = None
            self._last_ref_cycle = now
            self.refresh_count += 1
            if self._refresh_pending:
                self._refresh_pending -= 1

        self.commands_issued += 1
        if self.command_log is not None:
            self.command_log.append(
                (now, kind, cmd.bank_group, cmd.bank, cmd.row, cmd.column)
            )
        return info

    def _add_bus_window(self, start: int, end: int, now: int) -> None:
        while self._bus_windows and self._bus_windows[0][1] <= now:
            self._bus_windows.popleft()
        self._bus_windows.append((start, end))

    # -- data -------------------------------------------------------------

    def read_block(self, bank_group: int, bank: int, row: int, column: int) -> bytes:
        """Array contents for one BL8 burst; zeros if never written."""
        return self._store.get((bank_group, bank, row, column), self._zeros)

    def write_block(self, bank_group: int, bank: int, row: int, column: int,
                    data: bytes, offset: int = 0) -> None:
        """Write `data` into a BL8 burst at byte `offset` (data-mask semantics)."""
        burst = self.geometry.burst_bytes
        if offset == 0 and len(data) == burst:
            self._store[(bank_group, bank, row, column)] = bytes(data)
            return
        key = (bank_group, bank, row, column)
        current = bytearray(self._store.get(key, self._zeros))
        current[offset:offset + len(data)] = data
        self._store[key] = bytes(current)

    @property
    def blocks_written(self) -> int:
        return len(self._store)

    # -- export -----------------------------------------------------------

    def export_log_csv(self, path) -> None:
        import csv

        if self.command_log is None:
            raise ValueError("device was created without keep_log")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cycle", "command", "bank_group", "bank", "row", "column"])
            for row in self.command_log:
                writer.writerow(row)


def peak_bandwidth_gbps(clk: ClockConfig, geometry: DramGeometry) -> float:
    """Raw pin bandwidth in GB/s (1e9 bytes/s): transfer rate times bus width."""
    return clk.data_rate_mts * 1e6 * geometry.bus_bytes / 1e9
