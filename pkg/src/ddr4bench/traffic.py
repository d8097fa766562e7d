"""Run-time-configurable traffic generation.

Generates batches of read/write/mixed transactions with sequential or
pseudo-random addressing, configurable burst type and length, three signaling
modes, deterministic non-zero data, and readback verification.  Addresses and
data are pure functions of (config, direction, index), so any run can be
replayed or checked offline without recording state.

Data words are never all-zero: an all-zero readback therefore identifies a
location that was never written, and is counted separately from a data error.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ddr4bench.axi import (
    AXI_BOUNDARY,
    BEAT_BYTES,
    MAX_BURST_LEN,
    WRAP_LENGTHS,
    AxiTransaction,
    BurstType,
)

_M64 = (1 << 64) - 1
_ZERO_BEAT = bytes(BEAT_BYTES)
_READ_SALT = 0x52656164
_WRITE_SALT = 0x57726974


class BatchTimeout(Exception):
    """No forward progress within the configured cycle budget."""


class OpMode(enum.Enum):
    READ_ONLY = "r"
    WRITE_ONLY = "w"
    MIXED = "mixed"


class Addressing(enum.Enum):
    SEQUENTIAL = "seq"
    RANDOM = "rnd"


class Signaling(enum.Enum):
    NON_BLOCKING = "nb"
    BLOCKING = "b"
    AGGRESSIVE = "ag"


class DataPattern(enum.Enum):
    LFSR = "lfsr"
    ADDRESS_HASH = "hash"
    CONSTANT = "const"


@dataclass(frozen=True)
class TrafficConfig:
    op_mode: OpMode = OpMode.READ_ONLY
    read_fraction: float = 0.5
    addressing: Addressing = Addressing.SEQUENTIAL
    addr_seed: int = 1
    burst_type: BurstType = BurstType.INCR
    burst_len: int = 1
    signaling: Signaling = Signaling.NON_BLOCKING
    batch_len: int = 1
    base: int = 0
    limit: int = 1 << 31
    data_pattern: DataPattern = DataPattern.ADDRESS_HASH
    data_seed: int = 1
    constant_byte: int = 0xA5

    @property
    def footprint(self) -> int:
        return self.burst_len * BEAT_BYTES

    def validate(self, capacity: int) -> None:
        if not 1 <= self.burst_len <= MAX_BURST_LEN:
            raise ValueError(f"burst_len {self.burst_len} outside 1..{MAX_BURST_LEN}")
        if self.burst_type is BurstType.WRAP and self.burst_len not in WRAP_LENGTHS:
            raise ValueError(f"WRAP burst_len must be one of {WRAP_LENGTHS}")
        if self.batch_len < 1:
            raise ValueError("batch_len must be >= 1")
        if self.op_mode is OpMode.MIXED and not 0.0 < self.read_fraction < 1.0:
            raise ValueError("read_fraction must be in (0, 1) for mixed mode")
        if not 0 <= self.base < self.limit <= capacity:
            raise ValueError(
                f"addr range [{self.base:#x}, {self.limit:#x}) outside capacity"
            )
        if self.base % BEAT_BYTES:
            raise ValueError("base must be beat aligned")
        if self.addressing is Addressing.RANDOM and self.base % AXI_BOUNDARY:
            raise ValueError("random addressing requires a 4 KB aligned base")
        if self.op_mode is OpMode.MIXED and self.base % AXI_BOUNDARY:
            raise ValueError("mixed mode requires a 4 KB aligned base")
        if self.data_pattern is DataPattern.CONSTANT and not 0 < self.constant_byte <= 0xFF:
            raise ValueError("constant_byte must be a non-zero byte value")
        for direction in self.directions():
            lo, hi = direction_range(self, direction)
            if hi - lo < _pow2_footprint(self.footprint):
                raise ValueError("addr range too small for one burst footprint")

    def directions(self) -> tuple[str, ...]:
        if self.op_mode is OpMode.READ_ONLY:
            return ("r",)
        if self.op_mode is OpMode.WRITE_ONLY:
            return ("w",)
        return ("r", "w")

    def batch_split(self) -> tuple[int, int]:
        """(reads, writes) issued per batch; mixed splits by read_fraction."""
        if self.op_mode is OpMode.READ_ONLY:
            return self.batch_len, 0
        if self.op_mode is OpMode.WRITE_ONLY:
            return 0, self.batch_len
        reads = _ceil_frac(self.read_fraction, self.batch_len)
        return reads, self.batch_len - reads


def _ceil_frac(f: float, n: int) -> int:
    value = int(f * n + 1e-9)
    if value < f * n - 1e-9:
        value += 1
    return min(n, max(0, value))


def _pow2_footprint(footprint: int) -> int:
    return 1 << (footprint - 1).bit_length()


def _mix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def direction_range(cfg: TrafficConfig, direction: str) -> tuple[int, int]:
    """Address subrange for one direction.  Mixed mode gives the read and
    write streams disjoint halves so both stress the array independently."""
    if cfg.op_mode is not OpMode.MIXED:
        return cfg.base, cfg.limit
    size = cfg.limit - cfg.base
    half = (size // 2 // AXI_BOUNDARY) * AXI_BOUNDARY
    mid = cfg.base + half
    return (cfg.base, mid) if direction == "r" else (mid, cfg.limit)


def next_address(cfg: TrafficConfig, direction: str, index: int) -> int:
    """Start address of transaction `index` in the given direction's stream."""
    fp = cfg.footprint
    lo, hi = direction_range(cfg, direction)
    size = hi - lo
    if cfg.addressing is Addressing.SEQUENTIAL:
        if fp & (fp - 1) == 0:
            span = (size // fp) * fp
            return lo + (index * fp) % span
        # non-power-of-two bursts pack into 4 KB pages so INCR never crosses one
        per_page = AXI_BOUNDARY // fp
        pages = size // AXI_BOUNDARY
        if pages == 0:
            return lo + (index % (size // fp)) * fp
        slot = index % (pages * per_page)
        return lo + (slot // per_page) * AXI_BOUNDARY + (slot % per_page) * fp
    # random: align to the power-of-two footprint so bursts never straddle
    # the range or a 4 KB boundary
    fp2 = _pow2_footprint(fp)
    slots = size // fp2
    # concurrent mixed streams are salted apart; single-direction batches share
    # one sequence so a write batch then a read batch revisit the same places
    if cfg.op_mode is OpMode.MIXED:
        salt = _READ_SALT if direction == "r" else _WRITE_SALT
    else:
        salt = 0
    value = _mix64(_mix64(cfg.addr_seed ^ salt) ^ index)
    return lo + (value % slots) * fp2


def gen_data(cfg: TrafficConfig, addr: int, beat_index: int) -> bytes:
    """Deterministic non-zero 32-byte word for one beat.

    Patterns depend on (seed, addr) only, so rewriting a location in a later
    position of the stream leaves readback expectations consistent.
    """
    pattern = cfg.data_pattern
    if pattern is DataPattern.CONSTANT:
        return bytes((cfg.constant_byte,)) * BEAT_BYTES
    h = _mix64(cfg.data_seed ^ (addr >> 5) * 0x2545F4914F6CDD1D)
    if pattern is DataPattern.ADDRESS_HASH:
        words = (h, _mix64(h ^ 1), _mix64(h ^ 2), _mix64(h ^ 3))
    else:  # LFSR: 64-bit Galois, taps x^64+x^63+x^61+x^60+1; non-zero seed
        state = h | 1
        words = []
        for _ in range(4):
            for _ in range(8):
                lsb = state & 1
                state >>= 1
                if lsb:
                    state ^= 0xD800000000000000
            words.append(state)
    data = b"".join(w.to_bytes(8, "little") for w in words)
    if data == _ZERO_BEAT:
        data = data[:-1] + b"\x01"
    return data


CHECK_OK = "ok"
CHECK_MISMATCH = "mismatch"
CHECK_UNWRITTEN = "unwritten"


def check_read(cfg: TrafficConfig, addr: int, beat_index: int, observed: bytes) -> str:
    expected = gen_data(cfg, addr, beat_index)
    if observed == expected:
        return CHECK_OK
    if observed == _ZERO_BEAT:
        return CHECK_UNWRITTEN
    return CHECK_MISMATCH


def signal_gate(signaling: Signaling, outstanding: int, remaining: int) -> bool:
    """May a new address be issued this cycle for one direction?"""
    if remaining <= 0:
        return False
    if signaling is Signaling.BLOCKING:
        return outstanding == 0
    return True


@dataclass
class PerfCounters:
    """Per-batch hardware-counter equivalents, all in AXI-clock cycles."""

    read_cycles: int = 0
    write_cycles: int = 0
    read_tx: int = 0
    write_tx: int = 0
    read_bytes: int = 0
    write_bytes: int = 0
    data_errors: int = 0
    unwritten_reads: int = 0
    first_error: str | None = None

    def copy(self) -> "PerfCounters":
        return PerfCounters(**self.__dict__)


class _DirEngine:
    __slots__ = ("direction", "total", "issued", "outstanding", "next_issue",
                 "pending_txn", "first_cycle", "last_cycle", "completed")

    def __init__(self, direction, total):
        self.direction = direction
        self.total = total
        self.issued = 0
        self.outstanding = 0
        self.next_issue = 0
        self.pending_txn = None
        self.first_cycle = None
        self.last_cycle = None
        self.completed = 0


class TrafficGenerator:
    """Master-side endpoint driving the AXI fabric for one batch."""

    ISSUE_GAP_AXI = 2   # address-generation turnaround between issues per direction

    def __init__(self, cfg: TrafficConfig, timeout_axi: int = 10_000_000,
                 fault_beat: int | None = None, fault_bit: int = 0):
        self.cfg = cfg
        reads, writes = cfg.batch_split()
        self._r = _DirEngine("r", reads)
        self._w = _DirEngine("w", writes)
        self._txns: dict[int, AxiTransaction] = {}
        self._next_id = 0
        self._w_data_queue = []       # (txn, next beat index) in AW-accept order
        self.counters = PerfCounters()
        self._timeout_axi = timeout_axi
        self._fault_beat = fault_beat
        self._fault_bit = fault_bit
        self._beats_received = 0
        self._progress_mark = -1
        self._progress = 0
        self._stale_since = 0
        self.axi_now = 0

    # -- issue plan ------------------------------------------------------

    def _turn(self) -> str:
        r, w = self._r, self._w
        if r.issued < r.total and w.issued < w.total:
            p = r.issued + w.issued
            target = _ceil_frac(self.cfg.read_fraction, p + 1)
            return "r" if r.issued < target else "w"
        return "r" if r.issued < r.total else "w"

    def _make_txn(self, engine: _DirEngine) -> AxiTransaction:
        addr = next_address(self.cfg, engine.direction, engine.issued)
        txn = AxiTransaction(
            txn_id=self._next_id,
            direction=engine.direction,
            start_addr=addr,
            burst_len=self.cfg.burst_len,
            burst_type=self.cfg.burst_type,
        )
        self._next_id += 1
        return txn

    def _address_offer(self, engine: _DirEngine, axi_now: int):
        if engine.pending_txn is not None:
            return engine.pending_txn   # held stable until accepted
        if not signal_gate(self.cfg.signaling, engine.outstanding,
                           engine.total - engine.issued):
            return None
        if axi_now < engine.next_issue:
            return None
        if self.cfg.op_mode is OpMode.MIXED and self._turn() != engine.direction:
            return None
        engine.pending_txn = self._make_txn(engine)
        return engine.pending_txn

    # -- master-side fabric interface -------------------------------------

    def ar_request(self, axi_now: int):
        return self._address_offer(self._r, axi_now)

    def on_ar_accept(self, axi_now: int, txn) -> None:
        e = self._r
        e.pending_txn = None
        e.issued += 1
        e.outstanding += 1
        e.next_issue = axi_now + self.ISSUE_GAP_AXI
        if e.first_cycle is None:
            e.first_cycle = axi_now
        self._txns[txn.txn_id] = txn
        self._progress += 1

    def aw_request(self, axi_now: int):
        return self._address_offer(self._w, axi_now)

    def on_aw_accept(self, axi_now: int, txn) -> None:
        e = self._w
        e.pending_txn = None
        e.issued += 1
        e.outstanding += 1
        e.next_issue = axi_now + self.ISSUE_GAP_AXI
        if e.first_cycle is None:
            e.first_cycle = axi_now
        self._txns[txn.txn_id] = txn
        self._w_data_queue.append([txn, 0])
        self._progress += 1

    def w_beat(self, axi_now: int):
        if not self._w_data_queue:
            return None
        txn, beat_index = self._w_data_queue[0]
        addr = txn.beats[beat_index]
        return txn, beat_index, addr, gen_data(self.cfg, addr, beat_index)

    def on_w_accept(self, axi_now: int, txn, beat_index: int) -> None:
        entry = self._w_data_queue[0]
        entry[1] += 1
        txn.beats_done += 1
        self.counters.write_bytes += txn.beat_bytes
        if entry[1] == txn.burst_len:
            self._w_data_queue.pop(0)
        self._progress += 1

    def r_ready(self, axi_now: int) -> bool:
        if self.cfg.signaling is Signaling.AGGRESSIVE:
            return True
        return self._r.outstanding > 0

    def on_r_beat(self, axi_now: int, txn_id: int, beat_index: int,
                  data: bytes, last: bool) -> None:
        txn = self._txns[txn_id]
        if self._fault_beat is not None and self._beats_received == self._fault_beat:
            flipped = bytearray(data)
            flipped[self._fault_bit // 8] ^= 1 << (self._fault_bit % 8)
            data = bytes(flipped)
        self._beats_received += 1
        addr = txn.beats[beat_index]
        result = check_read(self.cfg, addr, beat_index, data)
        if result == CHECK_MISMATCH:
            self.counters.data_errors += 1
            if self.counters.first_error is None:
                expected = gen_data(self.cfg, addr, beat_index)
                self.counters.first_error = (
                    f"txn {txn_id} beat {beat_index} addr {addr:#x}: "
                    f"expected {expected.hex()[:16]}.., got {data.hex()[:16]}.."
                )
        elif result == CHECK_UNWRITTEN:
            self.counters.unwritten_reads += 1
        txn.beats_done += 1
        txn.last_beat_cycle = axi_now
        self.counters.read_bytes += txn.beat_bytes
        e = self._r
        e.last_cycle = axi_now
        if last:
            e.outstanding -= 1
            e.completed += 1
            self.counters.read_tx += 1
            del self._txns[txn_id]
        self._progress += 1

    def b_ready(self, axi_now: int) -> bool:
        if self.cfg.signaling is Signaling.AGGRESSIVE:
            return True
        return self._w.outstanding > 0

    def on_b_resp(self, axi_now: int, txn_id: int) -> None:
        txn = self._txns.pop(txn_id)
        txn.resp_done = True
        txn.last_beat_cycle = axi_now
        e = self._w
        e.outstanding -= 1
        e.completed += 1
        e.last_cycle = axi_now
        self.counters.write_tx += 1
        self._progress += 1

    # -- batch control -----------------------------------------------------

    def tick_axi(self, axi_now: int) -> None:
        self.axi_now = axi_now
        if self._progress != self._progress_mark:
            self._progress_mark = self._progress
            self._stale_since = axi_now
        elif not self.batch_done and axi_now - self._stale_since > self._timeout_axi:
            raise BatchTimeout(
                f"no forward progress for {self._timeout_axi} AXI cycles "
                f"(reads {self._r.issued}/{self._r.total}, "
                f"writes {self._w.issued}/{self._w.total})"
            )

    @property
    def batch_done(self) -> bool:
        r, w = self._r, self._w
        return (r.issued == r.total and w.issued == w.total
                and r.outstanding == 0 and w.outstanding == 0
                and not self._w_data_queue)

    def finalize(self) -> PerfCounters:
        c = self.counters
        r, w = self._r, self._w
        if r.first_cycle is not None and r.last_cycle is not None:
            c.read_cycles = r.last_cycle - r.first_cycle + 1
        if w.first_cycle is not None and w.last_cycle is not None:
            c.write_cycles = w.last_cycle - w.first_cycle + 1
        return c.copy()
