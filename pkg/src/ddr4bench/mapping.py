"""Physical address decomposition.

Bit layout, LSB to MSB:

    | burst offset (6) | bank group | column block | bank | row |

One 64-byte block is a single BL8 burst.  Placing the bank-group bits
directly above the burst offset makes consecutive 64-byte blocks alternate
bank groups, so streaming accesses pace column commands at tCCD_S instead of
tCCD_L.  The column-block field counts BL8 bursts within a row; the device
column address is column_block * 8 bus words.
"""

from __future__ import annotations

from ddr4bench.dram import DramGeometry


class OutOfRange(Exception):
    """Address beyond device capacity."""


def _log2(n: int) -> int:
    return n.bit_length() - 1


class AddressMap:
    def __init__(self, geometry: DramGeometry):
        self.geometry = geometry
        self.block_bytes = geometry.burst_bytes
        self.offset_bits = _log2(self.block_bytes)
        self.group_bits = _log2(geometry.bank_groups)
        self.bank_bits = _log2(geometry.banks_per_group)
        self.colblk_bits = _log2(geometry.row_bytes // self.block_bytes)
        self.row_bits = _log2(geometry.rows)

        self.group_shift = self.offset_bits
        self.colblk_shift = self.group_shift + self.group_bits
        self.bank_shift = self.colblk_shift + self.colblk_bits
        self.row_shift = self.bank_shift + self.bank_bits
        self.capacity = geometry.capacity_bytes

        self._group_mask = (1 << self.group_bits) - 1
        self._bank_mask = (1 << self.bank_bits) - 1
        self._colblk_mask = (1 << self.colblk_bits) - 1
        self._row_mask = (1 << self.row_bits) - 1

    def decode(self, addr: int) -> tuple[int, int, int, int]:
        """addr -> (bank_group, bank, row, column).  Column is BL8-aligned."""
        if not 0 <= addr < self.capacity:
            raise OutOfRange(f"address {addr:#x} outside capacity {self.capacity:#x}")
        group = (addr >> self.group_shift) & self._group_mask
        bank = (addr >> self.bank_shift) & self._bank_mask
        row = (addr >> self.row_shift) & self._row_mask
        colblk = (addr >> self.colblk_shift) & self._colblk_mask
        return group, bank, row, colblk * 8

    def decode_block(self, addr: int) -> tuple[int, int, int, int]:
        """Like decode but returns the column-block index instead of the column."""
        group, bank, row, column = self.decode(addr)
        return group, bank, row, column // 8

    def encode(self, bank_group: int, bank: int, row: int, column: int) -> int:
        colblk = column // 8
        return (
            (row << self.row_shift)
            | (bank << self.bank_shift)
            | (colblk << self.colblk_shift)
            | (bank_group << self.group_shift)
        )
