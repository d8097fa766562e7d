"""Independent replay checker for DRAM command logs.

Re-implements the spacing table from scratch over the exported command log,
sharing no code with `ddr4bench.dram`, so the device model and the checker
fail independently.  Also verifies row-buffer consistency (every column
access targets the row opened by the most recent ACT), data-bus exclusivity,
and refresh bank locking.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from ddr4bench.dram import DramGeometry, TimingParams

LOG_COLUMNS = ("cycle", "command", "bank_group", "bank", "row", "column")


@dataclass(frozen=True)
class Violation:
    index: int
    cycle: int
    rule: str
    detail: str

    def __str__(self):
        return f"[{self.index}] cycle {self.cycle}: {self.rule} ({self.detail})"


def _bank_key(row) -> tuple:
    return (row[2], row[3])


def check_command_log(log, timing: TimingParams, geometry: DramGeometry):
    """Replay a command log; returns the list of Violations (empty == clean)."""
    t = timing
    bl = t.burst_length // 2
    violations = []

    open_row = {}            # bank key -> row
    act_at = {}              # bank key -> cycle of last ACT
    pre_at = {}
    cas_rd_at = {}
    cas_wr_at = {}
    group_act_at = {}        # group -> cycle
    group_rd_at = {}
    group_wr_at = {}
    any_act_at = None
    any_rd_at = None
    any_wr_at = None
    act_history = []         # cycles of all ACTs, for the tFAW sliding window
    ref_at = None
    ref_lock_until = -1
    bus = []                 # (start, end) data windows
    prev_cycle = None

    def flag(i, cycle, rule, detail=""):
        violations.append(Violation(i, cycle, rule, detail))

    for i, entry in enumerate(log):
        cycle, kind, bg, bank, row, column = entry
        if prev_cycle is not None and cycle < prev_cycle:
            flag(i, cycle, "log order", f"cycle went backwards from {prev_cycle}")
        prev_cycle = cycle
        key = (bg, bank)

        if kind != "REF" and cycle < ref_lock_until:
            flag(i, cycle, "refresh lock", f"bank {key} locked until {ref_lock_until}")

        if kind == "ACT":
            if key in open_row:
                flag(i, cycle, "double ACT", f"bank {key} already open")
            if key in pre_at and cycle - pre_at[key] < t.tRP:
                flag(i, cycle, "tRP", f"PRE at {pre_at[key]}")
            if key in act_at and cycle - act_at[key] < t.tRAS + t.tRP:
                flag(i, cycle, "tRC", f"ACT at {act_at[key]}")
            if bg in group_act_at and cycle - group_act_at[bg] < t.tRRD_L:
                flag(i, cycle, "tRRD_L", f"group ACT at {group_act_at[bg]}")
            if any_act_at is not None and cycle - any_act_at < t.tRRD_S:
                flag(i, cycle, "tRRD_S", f"ACT at {any_act_at}")
            recent = [c for c in act_history if c > cycle - t.tFAW]
            if len(recent) >= 4:
                flag(i, cycle, "tFAW", f"ACTs at {recent}")
            open_row[key] = row
            act_at[key] = cycle
            group_act_at[bg] = cycle
            any_act_at = cycle
            act_history.append(cycle)
            if len(act_history) > 64:
                act_history = [c for c in act_history if c > cycle - t.tFAW]

        elif kind == "PRE":
            if key in act_at and cycle - act_at[key] < t.tRAS:
                flag(i, cycle, "tRAS", f"ACT at {act_at[key]}")
            if key in cas_rd_at and cycle - cas_rd_at[key] < t.tRTP:
                flag(i, cycle, "tRTP", f"RD at {cas_rd_at[key]}")
            if key in cas_wr_at and cycle - cas_wr_at[key] < t.CWL + bl + t.tWR:
                flag(i, cycle, "tWR", f"WR at {cas_wr_at[key]}")
            open_row.pop(key, None)
            pre_at[key] = cycle

        elif kind in ("RD", "WR"):
            if key not in open_row:
                flag(i, cycle, "row closed", f"{kind} with no open row in {key}")
            if key in act_at and cycle - act_at[key] < t.tRCD:
                flag(i, cycle, "tRCD", f"ACT at {act_at[key]}")
            last_group_cas = max(group_rd_at.get(bg, -(1 << 40)),
                                 group_wr_at.get(bg, -(1 << 40)))
            if cycle - last_group_cas < t.tCCD_L:
                flag(i, cycle, "tCCD_L", f"CAS at {last_group_cas}")
            last_any_cas = max(any_rd_at or -(1 << 40), any_wr_at or -(1 << 40))
            if cycle - last_any_cas < t.tCCD_S:
                flag(i, cycle, "tCCD_S", f"CAS at {last_any_cas}")
            if kind == "RD":
                if bg in group_wr_at and cycle - group_wr_at[bg] < t.CWL + bl + t.tWTR_L:
                    flag(i, cycle, "tWTR_L", f"WR at {group_wr_at[bg]}")
                if any_wr_at is not None and cycle - any_wr_at < t.CWL + bl + t.tWTR_S:
                    flag(i, cycle, "tWTR_S", f"WR at {any_wr_at}")
                start = cycle + t.CL
                cas_rd_at[key] = cycle
                group_rd_at[bg] = cycle
                any_rd_at = cycle
            else:
                start = cycle + t.CWL
                cas_wr_at[key] = cycle
                group_wr_at[bg] = cycle
                any_wr_at = cycle
            end = start + bl
            for s, e in bus:
                if start < e and s < end:
                    flag(i, cycle, "bus overlap", f"window [{start},{end}) vs [{s},{e})")
            bus.append((start, end))
            if len(bus) > 32:
                bus = [(s, e) for s, e in bus if e > cycle]

        elif kind == "REF":
            if open_row:
                flag(i, cycle, "REF with open rows", f"open: {sorted(open_row)}")
            if ref_at is not None and cycle - ref_at < t.tRFC:
                flag(i, cycle, "tRFC", f"REF at {ref_at}")
            for key2, pc in pre_at.items():
                if cycle - pc < t.tRP:
                    flag(i, cycle, "REF before tRP", f"PRE at {pc} bank {key2}")
            ref_at = cycle
            ref_lock_until = cycle + t.tRFC
            open_row.clear()

        else:
            flag(i, cycle, "unknown command", kind)

    return violations


def check_row_consistency(log):
    """Every RD/WR must target the row opened by the latest prior ACT with no
    intervening PRE/REF on that bank.  Column commands carry the requester's
    intended row as an audit annotation (-1 when absent), which is compared
    against the row opened by the ACT history."""
    violations = []
    open_row = {}
    for i, entry in enumerate(log):
        cycle, kind, bg, bank, row, column = entry
        key = (bg, bank)
        if kind == "ACT":
            open_row[key] = row
        elif kind == "PRE":
            open_row.pop(key, None)
        elif kind == "REF":
            open_row.clear()
        elif kind in ("RD", "WR"):
            if key not in open_row:
                violations.append(
                    Violation(i, cycle, "row consistency",
                              f"{kind} on closed bank {key}")
                )
            elif row != -1 and open_row[key] != row:
                violations.append(
                    Violation(i, cycle, "row consistency",
                              f"{kind} wanted row {row}, open row {open_row[key]}")
                )
    return violations


def max_refresh_gap(log) -> int | None:
    """Largest spacing between consecutive REF commands, None without two REFs."""
    refs = [entry[0] for entry in log if entry[1] == "REF"]
    if len(refs) < 2:
        return None
    return max(b - a for a, b in zip(refs, refs[1:]))


def load_log_csv(path):
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != LOG_COLUMNS:
            raise ValueError(f"unexpected log header {header}")
        for rec in reader:
            out.append((int(rec[0]), rec[1], int(rec[2]), int(rec[3]),
                        int(rec[4]), int(rec[5])))
    return out
