"""Reordering memory controller.

Accepts AXI read and write requests concurrently on independent queues,
splits each burst into 64-byte column operations (coalescing consecutive
half-block beats), keeps per-bank row state under an open-page policy, and
schedules DRAM commands with a first-ready policy: legal column accesses to
already-open rows issue first (oldest first, with a bounded look-ahead past a
blocked head), while row operations (PRE/ACT) are dispatched by a small
number of row engines that only work for the oldest incomplete request.  A
row engine stays busy until the first column access to the bank it prepared
issues, which models the serialized request turnaround of compact FPGA
memory-interface IP and is the main calibration lever for random-access
throughput.

Read data returns strictly in request order (single AXI ID); writes are
batched behind watermarks to amortize bus turnaround.  Same-address ordering
is enforced by per-block conflict detection rather than store forwarding: a
column access never overtakes an older access of the opposite direction to
the same block, so a read of an in-flight write address returns the written
data from the array.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ddr4bench.dram import DramCommand, DramDevice, RD, WR
from ddr4bench.mapping import AddressMap

_READ = "r"
_WRITE = "w"


@dataclass(frozen=True)
class ControllerConfig:
    read_queue_depth: int = 16
    write_queue_depth: int = 16
    command_slots: int = 2          # command-bus slots per memory cycle
    row_engines: int = 2            # concurrent bank-preparation machines
    reorder_window_beats: int = 16  # read beats issued ahead of in-order delivery
    hit_bypass_ops: int = 8         # ops scanned past a blocked head for row hits
    write_high_watermark_ops: int = 24
    write_low_watermark_ops: int = 8

    def __post_init__(self):
        if self.read_queue_depth < 1 or self.write_queue_depth < 1:
            raise ValueError("queue depths must be >= 1")
        if self.command_slots < 1:
            raise ValueError("command_slots must be >= 1")
        if self.row_engines < 1:
            raise ValueError("row_engines must be >= 1")
        if self.write_low_watermark_ops >= self.write_high_watermark_ops:
            raise ValueError("write watermarks must satisfy low < high")


class _Op:
    """One BL8 column access derived from one or two consecutive AXI beats."""

    __slots__ = ("request", "direction", "gseq", "bg", "bank", "row", "col",
                 "block", "bank_idx", "beats", "seq_first", "seq_last",
                 "data", "have", "issued", "prepped", "cmd")

    def __init__(self, request, direction, gseq, bg, bank, row, col, block,
                 bank_idx, beats):
        self.request = request
        self.direction = direction
        self.gseq = gseq
        self.bg = bg
        self.bank = bank
        self.row = row
        self.col = col
        self.block = block
        self.bank_idx = bank_idx
        self.beats = beats            # tuple of (beat_index, byte offset in block)
        self.seq_first = 0
        self.seq_last = 0
        self.data = None              # write payloads keyed by beat offset
        self.have = 0
        self.issued = False
        self.prepped = False
        kind = DramCommand.rd if direction == _READ else DramCommand.wr
        self.cmd = kind(bg, bank, col, row=row)


class _Request:
    __slots__ = ("txn", "direction", "ops", "ops_unissued", "arrival",
                 "beats_total", "beats_delivered", "windows_left",
                 "retire_at", "scan_epoch", "beat_to_op")

    def __init__(self, txn, direction, ops, arrival):
        self.txn = txn
        self.direction = direction
        self.ops = ops
        self.ops_unissued = len(ops)
        self.arrival = arrival
        self.beats_total = txn.burst_len
        self.beats_delivered = 0
        self.windows_left = len(ops)
        self.retire_at = None
        self.scan_epoch = -1
        self.beat_to_op = None


class MemoryController:
    """Scheduler core; the fabric drives the accept/beat/response interface."""

    def __init__(self, device: DramDevice, mapper: AddressMap,
                 config: ControllerConfig | None = None):
        self.device = device
        self.mapper = mapper
        self.config = config or ControllerConfig()
        t = device.timing
        self._t = t
        self._wr_to_pre = t.CWL + t.burst_cycles + t.tWR
        self.now = 0

        self.read_requests: deque[_Request] = deque()
        self.write_requests: deque[_Request] = deque()
        self._write_by_txn: dict[int, _Request] = {}

        # column-op streams; lists with advancing head pointers so the bypass
        # scan can skip issued entries without O(n) removal
        self._read_ops: list[_Op | None] = []
        self._read_head = 0
        self._write_ops: list[_Op | None] = []
        self._write_head = 0
        self._pending_read_ops = 0
        self._ready_write_ops = 0
        self._gseq = 0
        self._block_waiters: dict[tuple, list[_Op]] = {}

        # in-order read return
        self._next_read_seq = 0
        self._delivered_seq = 0
        self._ready_beats: dict[int, tuple] = {}
        self._rd_windows: deque[tuple] = deque()
        self._wr_windows: deque[tuple] = deque()
        self._write_resps: deque[int] = deque()

        self.mode = _READ
        self._engines = [None] * self.config.row_engines  # (bank_idx, op, cmds)
        self._bank_epoch = 0
        self._next_cas_at = 0
        self._refresh_active = False
        # cross-direction same-block ordering can block the active mode's head;
        # these flags force a mode switch so the older access can drain
        self._read_blocked_on_write = False
        self._write_blocked_on_read = False

        # statistics
        self.row_hits = 0
        self.row_misses = 0
        self.reads_accepted = 0
        self.writes_accepted = 0
        self.bytes_read = 0
        self.bytes_written = 0
        self._occ_read_sum = 0
        self._occ_write_sum = 0
        self._occ_ticks = 0

    # ------------------------------------------------------------------
    # fabric-facing interface (called on AXI boundaries)
    # ------------------------------------------------------------------

    def accept_read(self, txn, axi_now) -> bool:
        if len(self.read_requests) >= self.config.read_queue_depth:
            return False
        req = self._expand(txn, _READ)
        for op in req.ops:
            op.seq_first = self._next_read_seq
            self._next_read_seq += len(op.beats)
            op.seq_last = self._next_read_seq - 1
        self.read_requests.append(req)
        self._read_ops.extend(req.ops)
        self._pending_read_ops += len(req.ops)
        self.reads_accepted += 1
        return True

    def accept_write(self, txn, axi_now) -> bool:
        if len(self.write_requests) >= self.config.write_queue_depth:
            return False
        req = self._expand(txn, _WRITE)
        beat_to_op = {}
        for op in req.ops:
            op.data = {}
            for beat_index, _off in op.beats:
                beat_to_op[beat_index] = op
        req.beat_to_op = beat_to_op
        self.write_requests.append(req)
        self._write_by_txn[txn.txn_id] = req
        self._write_ops.extend(req.ops)
        self.writes_accepted += 1
        return True

    def w_ready(self, axi_now) -> bool:
        return True

    def push_write_beat(self, txn_id, beat_index, addr, data) -> None:
        req = self._write_by_txn[txn_id]
        op = req.beat_to_op[beat_index]
        for bi, off in op.beats:
            if bi == beat_index:
                op.data[off] = data
                break
        op.have += 1
        if op.have == len(op.beats):
            self._ready_write_ops += 1

    def peek_read_beat(self):
        return self._ready_beats.get(self._delivered_seq)

    def pop_read_beat(self) -> None:
        seq = self._delivered_seq
        entry = self._ready_beats.pop(seq)
        self._delivered_seq = seq + 1
        head = self.read_requests[0]
        head.beats_delivered += 1
        if head.beats_delivered == head.beats_total:
            self.read_requests.popleft()

    def peek_write_resp(self):
        return self._write_resps[0] if self._write_resps else None

    def pop_write_resp(self) -> None:
        self._write_resps.popleft()

    # ------------------------------------------------------------------
    # request expansion
    # ------------------------------------------------------------------

    def _expand(self, txn, direction) -> _Request:
        decode = self.mapper.decode_block
        block_bytes = self.device.geometry.burst_bytes
        req = _Request(txn, direction, [], self.now)
        ops = req.ops
        prev = None
        for beat_index, addr in enumerate(txn.beats):
            bg, bank, row, colblk = decode(addr)
            off = addr % block_bytes
            block = (bg, bank, row, colblk)
            if (prev is not None and prev.block == block
                    and prev.beats[-1][1] + txn.beat_bytes == off):
                prev.beats.append((beat_index, off))
                continue
            self._gseq += 1
            op = _Op(req, direction, self._gseq, bg, bank, row, colblk * 8,
                     block, bg * self.device.geometry.banks_per_group + bank,
                     [(beat_index, off)])
            waiters = self._block_waiters.get(block)
            if waiters is None:
                self._block_waiters[block] = [op]
            else:
                waiters.append(op)
            ops.append(op)
            prev = op
        req.ops_unissued = len(ops)
        req.windows_left = len(ops)
        return req

    def _ordered(self, op) -> bool:
        """True when no older opposite-direction access targets the same block."""
        waiters = self._block_waiters.get(op.block)
        if waiters is None or len(waiters) == 1:
            return True
        for other in waiters:
            if other.direction != op.direction and other.gseq < op.gseq:
                return False
        return True

    def _unwait(self, op) -> None:
        waiters = self._block_waiters[op.block]
        if len(waiters) == 1:
            del self._block_waiters[op.block]
        else:
            waiters.remove(op)

    # ------------------------------------------------------------------
    # per-cycle scheduling
    # ------------------------------------------------------------------

    def tick(self, now: int) -> None:
        self.now = now
        if self._rd_windows or self._wr_windows:
            self._drain_windows(now)
        if self.write_requests:
            self._retire_writes(now)

        self._occ_read_sum += len(self.read_requests)
        self._occ_write_sum += len(self.write_requests)
        self._occ_ticks += 1

        device = self.device
        if device._refresh_pending and not self._refresh_active:
            overdue = (
                device._refresh_pending >= device.REFRESH_POSTPONE_MAX
                or now - device._last_ref_cycle
                >= (device.REFRESH_FORCE_FACTOR * self._t.tREFI
                    - device.REFRESH_FORCE_MARGIN)
            )
            if overdue or self._idle():
                self._refresh_active = True
                self._free_engines()

        budget = self.config.command_slots
        if self._refresh_active:
            self._refresh_step(now, budget)
            return

        self._update_mode()
        if self._issue_column(now):
            budget -= 1
        if budget > 0:
            self._run_engines(now, budget)

    def _idle(self) -> bool:
        return (self._pending_read_ops == 0 and not self._write_by_txn
                and not self._rd_windows and not self._wr_windows)

    def _drain_windows(self, now: int) -> None:
        rd = self._rd_windows
        while rd and rd[0][0] <= now:
            _end, beats = rd.popleft()
            for seq, payload in beats:
                self._ready_beats[seq] = payload
        wr = self._wr_windows
        while wr and wr[0][0] <= now:
            end, op = wr.popleft()
            req = op.request
            req.windows_left -= 1
            if req.windows_left == 0:
                req.retire_at = end + self._t.tWR
                self._write_resps.append(req.txn.txn_id)

    def _retire_writes(self, now: int) -> None:
        # retirement frees the queue slot once write recovery elapsed
        wq = self.write_requests
        while wq and wq[0].retire_at is not None and now >= wq[0].retire_at:
            req = wq.popleft()
            del self._write_by_txn[req.txn.txn_id]

    def _update_mode(self) -> None:
        if self.mode == _READ:
            if self._ready_write_ops and (
                    self._ready_write_ops >= self.config.write_high_watermark_ops
                    or self._pending_read_ops == 0
                    or self._read_blocked_on_write):
                self.mode = _WRITE
                self._read_blocked_on_write = False
                self._free_engines()
        else:
            if self._pending_read_ops and (
                    self._ready_write_ops <= self.config.write_low_watermark_ops
                    or self._write_blocked_on_read):
                self.mode = _READ
                self._write_blocked_on_read = False
                self._free_engines()

    def _free_engines(self) -> None:
        for i in range(len(self._engines)):
            self._engines[i] = None
        self._bank_epoch += 1

    # -- column path -------------------------------------------------------

    def _issue_column(self, now: int) -> bool:
        if now < self._next_cas_at:
            return False
        if self.mode == _READ:
            return self._issue_read_column(now)
        return self._issue_write_column(now)

    def _issue_read_column(self, now: int) -> bool:
        if self._pending_read_ops == 0:
            return False
        ops = self._read_ops
        head = self._read_head
        # advance past issued entries
        n = len(ops)
        while head < n and (ops[head] is None or ops[head].issued):
            ops[head] = None
            head += 1
        if head > 4096:
            del ops[:head]
            n -= head
            head = 0
        self._read_head = head
        if head >= n:
            return False
        window_limit = self._delivered_seq + self.config.reorder_window_beats
        device = self.device
        banks = device.banks
        bpg = device.geometry.banks_per_group
        scan_limit = min(n, head + self.config.hit_bypass_ops)
        for idx in range(head, scan_limit):
            op = ops[idx]
            if op is None or op.issued:
                continue
            if op.seq_last >= window_limit:
                break  # further ops have even larger sequence numbers
            bank = banks[op.bank_idx]
            if bank.open_row != op.row:
                continue
            if not self._ordered(op):
                self._read_blocked_on_write = True
                continue
            if device.why_illegal(op.cmd, now) is not None:
                continue
            self._do_issue_read(op, now)
            if idx == head:
                self._read_head = head + 1
            return True
        return False

    def _do_issue_read(self, op, now: int) -> None:
        device = self.device
        info = device.issue(op.cmd, now)
        block = device.read_block(op.bg, op.bank, op.row, op.col // 8)
        txn = op.request.txn
        last_index = txn.burst_len - 1
        beats = []
        seq = op.seq_first
        for beat_index, off in op.beats:
            payload = (txn.txn_id, beat_index,
                       block[off:off + txn.beat_bytes], beat_index == last_index)
            beats.append((seq, payload))
            seq += 1
        self._rd_windows.append((info.data_end, beats))
        op.issued = True
        op.request.ops_unissued -= 1
        self._pending_read_ops -= 1
        self._unwait(op)
        self._after_cas(op, now)
        self.bytes_read += len(op.beats) * txn.beat_bytes

    def _issue_write_column(self, now: int) -> bool:
        ops = self._write_ops
        head = self._write_head
        n = len(ops)
        while head < n and (ops[head] is None or ops[head].issued):
            ops[head] = None
            head += 1
        if head > 4096:
            del ops[:head]
            n -= head
            head = 0
        self._write_head = head
        if head >= n:
            return False
        op = ops[head]
        if op.have < len(op.beats):
            return False
        device = self.device
        if device.banks[op.bank_idx].open_row != op.row:
            return False
        if not self._ordered(op):
            self._write_blocked_on_read = True
            return False
        if device.why_illegal(op.cmd, now) is not None:
            return False
        info = device.issue(op.cmd, now)
        colblk = op.col // 8
        for _bi, off in op.beats:
            device.write_block(op.bg, op.bank, op.row, colblk, op.data[off], off)
        self._wr_windows.append((info.data_end, op))
        op.issued = True
        op.request.ops_unissued -= 1
        self._ready_write_ops -= 1
        self._unwait(op)
        self._after_cas(op, now)
        self.bytes_written += len(op.beats) * op.request.txn.beat_bytes
        self._write_head = head + 1
        return True

    def _after_cas(self, op, now: int) -> None:
        self._next_cas_at = now + self._t.tCCD_S
        if op.prepped:
            self.row_misses += 1
        else:
            self.row_hits += 1
        engines = self._engines
        for i, held in enumerate(engines):
            if held is not None and held[0] == op.bank_idx:
                engines[i] = None

    # -- row engines ---------------------------------------------------------

    def _run_engines(self, now: int, budget: int) -> None:
        stream = self.read_requests if self.mode == _READ else self.write_requests
        if not stream:
            return
        head = stream[0]
        engines = self._engines
        device = self.device
        banks = device.banks
        for i in range(len(engines)):
            if budget == 0:
                return
            held = engines[i]
            if held is None:
                if head.ops_unissued == 0:
                    continue
                if head.scan_epoch == self._bank_epoch:
                    continue
                op = self._find_prep_target(head, banks)
                if op is None:
                    head.scan_epoch = self._bank_epoch
                    continue
                held = (op.bank_idx, op,
                        DramCommand.pre(op.bg, op.bank),
                        DramCommand.act(op.bg, op.bank, op.row))
                engines[i] = held
            bank_idx, op, pre_cmd, act_cmd = held
            bank = banks[bank_idx]
            if bank.open_row == op.row:
                continue  # prepared; waiting for the first column access
            cmd = pre_cmd if bank.open_row is not None else act_cmd
            if device.why_illegal(cmd, now) is None:
                device.issue(cmd, now)
                self._bank_epoch += 1
                budget -= 1
                if cmd is act_cmd:
                    op.prepped = True

    def _find_prep_target(self, req, banks):
        held_banks = {h[0] for h in self._engines if h is not None}
        for op in req.ops:
            if op.issued:
                continue
            if op.bank_idx in held_banks:
                continue
            if banks[op.bank_idx].open_row != op.row:
                return op
        return None

    # -- refresh ---------------------------------------------------------------

    def _refresh_step(self, now: int, budget: int) -> None:
        device = self.device
        ref = DramCommand.ref()
        if device.why_illegal(ref, now) is None:
            device.issue(ref, now)
            self._bank_epoch += 1
            self._refresh_active = False
            return
        for bg in range(device.geometry.bank_groups):
            if budget == 0:
                return
            for bank in range(device.geometry.banks_per_group):
                b = device.bank(bg, bank)
                if b.open_row is None:
                    continue
                cmd = DramCommand.pre(bg, bank)
                if device.why_illegal(cmd, now) is None:
                    device.issue(cmd, now)
                    self._bank_epoch += 1
                    budget -= 1
                    if budget == 0:
                        return

    # ------------------------------------------------------------------
    # statistics
    # ------------------------------------------------------------------

    def stats(self) -> dict:
        cas_total = self.row_hits + self.row_misses
        return {
            "row_hits": self.row_hits,
            "row_misses": self.row_misses,
            "row_hit_rate": self.row_hits / cas_total if cas_total else 0.0,
            "reads_accepted": self.reads_accepted,
            "writes_accepted": self.writes_accepted,
            "bytes_read": self.bytes_read,
            "bytes_written": self.bytes_written,
            "avg_read_queue": self._occ_read_sum / self._occ_ticks if self._occ_ticks else 0.0,
            "avg_write_queue": self._occ_write_sum / self._occ_ticks if self._occ_ticks else 0.0,
            "refresh_count": self.device.refresh_count,
        }

    def export_stats_csv(self, path, channel: int = 0) -> None:
        import csv

        stats = self.stats()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["channel"] + list(stats.keys()))
            writer.writerow([channel] + list(stats.values()))
