"""The replay checker must catch each planted violation and pass clean logs."""

import pytest

from ddr4bench.audit import (
    check_command_log,
    check_row_consistency,
    max_refresh_gap,
)
from ddr4bench.dram import DramGeometry, timing_preset

T = timing_preset(1600)
GEO = DramGeometry()


def _rules(log):
    return {v.rule for v in check_command_log(log, T, GEO)}


def act(cycle, bg=0, bank=0, row=1):
    return (cycle, "ACT", bg, bank, row, -1)


def rd(cycle, bg=0, bank=0, col=0):
    return (cycle, "RD", bg, bank, -1, col)


def wr(cycle, bg=0, bank=0, col=0):
    return (cycle, "WR", bg, bank, -1, col)


def pre(cycle, bg=0, bank=0):
    return (cycle, "PRE", bg, bank, -1, -1)


def ref(cycle):
    return (cycle, "REF", 0, 0, -1, -1)


def test_clean_sequence_passes():
    log = [
        act(0),
        rd(T.tRCD),
        rd(T.tRCD + T.tCCD_L, col=8),
        pre(max(T.tRAS, T.tRCD + T.tCCD_L + T.tRTP)),
    ]
    assert check_command_log(log, T, GEO) == []
    assert check_row_consistency(log) == []


def test_trcd_violation():
    assert "tRCD" in _rules([act(0), rd(T.tRCD - 1)])


def test_trp_violation():
    log = [act(0), pre(T.tRAS), act(T.tRAS + T.tRP - 1, row=2)]
    assert "tRP" in _rules(log)


def test_tras_violation():
    assert "tRAS" in _rules([act(0), pre(T.tRAS - 1)])


def test_trc_violation():
    log = [act(0), pre(T.tRAS), act(T.tRC - 1, row=2)]
    assert "tRC" in _rules(log)


def test_trrd_violations():
    assert "tRRD_L" in _rules([act(0, bank=0), act(T.tRRD_L - 1, bank=1)])
    assert "tRRD_S" in _rules([act(0, bg=0), act(T.tRRD_S - 1, bg=1)])


def test_tfaw_violation():
    s = T.tRRD_S
    log = [act(0, bg=0), act(s, bg=1), act(2 * s, bg=2), act(3 * s, bg=3),
           act(T.tFAW - 1, bg=0, bank=1)]
    assert "tFAW" in _rules(log)
    ok = [act(0, bg=0), act(s, bg=1), act(2 * s, bg=2), act(3 * s, bg=3),
          act(T.tFAW, bg=0, bank=1)]
    assert "tFAW" not in _rules(ok)


def test_tccd_violations():
    log = [act(0), rd(T.tRCD), rd(T.tRCD + T.tCCD_L - 1, col=8)]
    assert "tCCD_L" in _rules(log)
    log = [act(0, bg=0), act(T.tRRD_S, bg=1),
           rd(T.tRRD_S + T.tRCD, bg=0),
           rd(T.tRRD_S + T.tRCD + T.tCCD_S - 1, bg=1)]
    assert "tCCD_S" in _rules(log)


def test_twtr_violation():
    log = [act(0), wr(T.tRCD), rd(T.tRCD + T.CWL + 4 + T.tWTR_L - 1, col=8)]
    assert "tWTR_L" in _rules(log)


def test_twr_violation():
    log = [act(0), wr(T.tRCD), pre(T.tRCD + T.CWL + 4 + T.tWR - 1)]
    assert "tWR" in _rules(log)


def test_trtp_violation():
    log = [act(0), rd(T.tRAS), pre(T.tRAS + T.tRTP - 1)]
    assert "tRTP" in _rules(log)


def test_bus_overlap_violation():
    # same-bank reads forced closer than a burst via a doctored log
    log = [act(0, bg=0), act(T.tRRD_S, bg=1),
           rd(20, bg=0), rd(22, bg=1)]
    rules = _rules(log)
    assert "bus overlap" in rules


def test_row_closed_violation():
    assert "row closed" in _rules([rd(100)])
    assert check_row_consistency([rd(100)]) != []


def test_refresh_lock_violation():
    log = [ref(0), act(T.tRFC - 1)]
    assert "refresh lock" in _rules(log)
    assert "refresh lock" not in _rules([ref(0), act(T.tRFC)])


def test_ref_with_open_rows():
    assert "REF with open rows" in _rules([act(0), ref(T.tRAS + 1)])


def test_trfc_between_refreshes():
    assert "tRFC" in _rules([ref(0), ref(T.tRFC - 1)])
    assert "tRFC" not in _rules([ref(0), ref(T.tRFC)])


def test_max_refresh_gap():
    assert max_refresh_gap([ref(0)]) is None
    assert max_refresh_gap([ref(0), ref(6240), ref(18000)]) == 11760


def test_double_act_violation():
    assert "double ACT" in _rules([act(0), act(T.tRC, row=2)])


def test_row_annotation_mismatch_detected():
    # column command annotated with an intended row that is not the open one
    log = [act(0, row=1), (T.tRCD, "RD", 0, 0, 2, 0)]
    violations = check_row_consistency(log)
    assert violations and violations[0].rule == "row consistency"
    clean = [act(0, row=1), (T.tRCD, "RD", 0, 0, 1, 0)]
    assert check_row_consistency(clean) == []
