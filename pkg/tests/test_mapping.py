import random

import pytest

from ddr4bench.dram import DramGeometry
from ddr4bench.mapping import AddressMap, OutOfRange


@pytest.fixture
def amap():
    return AddressMap(DramGeometry())


def test_zero_address(amap):
    assert amap.decode(0) == (0, 0, 0, 0)


def test_consecutive_blocks_alternate_bank_groups(amap):
    # 64-byte neighbours land in the next bank group, same bank and row
    g0 = amap.decode(0)
    g1 = amap.decode(64)
    assert g1[0] == g0[0] + 1
    assert g1[1:] == g0[1:]
    groups = [amap.decode(64 * i)[0] for i in range(8)]
    assert groups == [0, 1, 2, 3, 0, 1, 2, 3]


def test_column_advances_after_group_wrap(amap):
    bg, bank, row, col = amap.decode(256)
    assert (bg, bank, row) == (0, 0, 0)
    assert col == 8  # next BL8 block in the same row


def test_encode_decode_bijective(amap):
    rng = random.Random(1234)
    cap = amap.capacity
    for _ in range(100_000):
        addr = rng.randrange(cap) & ~63  # block aligned
        bg, bank, row, col = amap.decode(addr)
        assert amap.encode(bg, bank, row, col) == addr


def test_out_of_range(amap):
    with pytest.raises(OutOfRange):
        amap.decode(amap.capacity)
    with pytest.raises(OutOfRange):
        amap.decode(-1)


def test_fields_cover_capacity(amap):
    top = amap.capacity - 64
    bg, bank, row, col = amap.decode(top)
    assert bg == 3 and bank == 3
    assert row == 16383
    assert col == 1016
