import math

import numpy as np
import pytest

from nwbench.boolcore import TruthTable, as_bits, make_rng
from nwbench.circuits import ANY, SYM, AndGate, CircuitSpec, ClassDescriptor, TopGate, circuit_table, eval_circuit, sample_circuit
from nwbench.errors import DimensionError, SpecError, WidthError
from nwbench.hardfn import GIPParams, eval_gip, gip_table
from nwbench.nofproto import (
    NOFPartition, Transcript, any_bits_bound, assign_gates, bns_budget, gip_circuit, gip_correlation_scan,
    hg_protocol_table, message_width, read_partition, run_any_protocol, run_hg_protocol, write_partition,
)


def test_partition_validation():
    with pytest.raises(SpecError):
        NOFPartition(((0, 1), (1, 2)))
    with pytest.raises(SpecError):
        NOFPartition(((0,), ()))
    with pytest.raises(SpecError):
        NOFPartition(((0,), (2,)))


def test_partition_file_round_trip(tmp_path):
    P = NOFPartition.contiguous(7, 3)
    write_partition(tmp_path / "p.txt", P)
    assert read_partition(tmp_path / "p.txt") == P
    assert P.n == 7 and P.players == 3


def test_assign_examples():
    P = NOFPartition(((0, 1), (2, 3), (4, 5)))
    C = CircuitSpec(6, TopGate.or_(2), (AndGate(((4, True), (5, False))), AndGate(())))
    assert assign_gates(C, P) == {0: 0, 1: 0}
    C = CircuitSpec(6, TopGate.or_(1), (AndGate(((0, True), (4, True))),))
    assert assign_gates(C, P) == {0: 1}


def test_assign_random_disjoint():
    rng = make_rng(1)
    P = NOFPartition.contiguous(9, 3)
    for _ in range(30):
        C = sample_circuit(ClassDescriptor(top=SYM, s=6, k=2), 9, rng)
        for g, player in assign_gates(C, P).items():
            assert not {v for v, _ in C.children[g].lits} & set(P.blocks[player])


def test_assign_width_error():
    P = NOFPartition(((0,), (1,)))
    C = CircuitSpec(2, TopGate.or_(1), (AndGate(((0, True), (1, True))),))
    with pytest.raises(WidthError):
        assign_gates(C, P)


def test_assign_rejects_thr_and_mismatch():
    C = CircuitSpec(2, TopGate.thr((1,), 1), (AndGate(((0, True),)),))
    with pytest.raises(SpecError):
        assign_gates(C, NOFPartition(((0,), (1,))))
    with pytest.raises(DimensionError):
        assign_gates(gip_circuit(2, 2), NOFPartition.contiguous(3, 2))


def test_single_gate_protocol():
    C = CircuitSpec(2, TopGate.or_(1), (AndGate(((0, True),)),))
    P = NOFPartition(((0,), (1,)))
    for x in range(4):
        t = run_hg_protocol(C, P, as_bits(x, 2))
        assert t.total_bits == 2
        assert t.output == x & 1


def test_gip_row_partition_exhaustive():
    C = gip_circuit(2, 2)
    P = NOFPartition.gip_rows(2, 2)
    for x in range(16):
        assert run_hg_protocol(C, P, as_bits(x, 4)).output == eval_gip(GIPParams(2, 2), as_bits(x, 4))


def test_gip_column_partition_is_infeasible():
    with pytest.raises(WidthError):
        assign_gates(gip_circuit(2, 2), NOFPartition.gip_columns(2, 2))


def test_random_sym_and2_exhaustive():
    rng = make_rng(2)
    C = sample_circuit(ClassDescriptor(top=SYM, s=8, k=2), 9, rng)
    P = NOFPartition.contiguous(9, 3)
    for x in range(512):
        t = run_hg_protocol(C, P, as_bits(x, 9))
        assert t.output == eval_circuit(C, as_bits(x, 9))
        assert t.total_bits == 3 * 4


@pytest.mark.parametrize("k", [1, 2, 3])
def test_protocol_table_and_bits(k):
    rng = make_rng(k)
    for _ in range(5):
        n = int(rng.integers(k + 1, 11))
        s = int(rng.integers(1, 10))
        C = sample_circuit(ClassDescriptor(top=SYM, s=s, k=k), n, rng)
        P = NOFPartition.contiguous(n, k + 1)
        assert hg_protocol_table(C, P) == circuit_table(C)
        t = run_hg_protocol(C, P, rng.integers(0, 2, size=n))
        assert t.total_bits <= (k + 1) * math.ceil(math.log2(s + 1))


def test_players_never_read_own_block():
    # the view masks the speaker's block; any read of it raises
    rng = make_rng(4)
    C = sample_circuit(ClassDescriptor(top=SYM, s=6, k=2), 9, rng)
    P = NOFPartition.contiguous(9, 3)
    bad = {g: 2 for g in range(C.fanin)}
    touching = [g for g, ch in enumerate(C.children) if {v for v, _ in ch.lits} & set(P.blocks[2])]
    if touching:
        with pytest.raises(AssertionError):
            run_hg_protocol(C, P, np.zeros(9, np.uint8), assignment=bad)


def test_any_protocol():
    rng = make_rng(5)
    for u in (1, 2, 3, 4):
        C = sample_circuit(ClassDescriptor(top=ANY, d=3, u=u, s=4, k=2), 8, rng)
        P = NOFPartition.contiguous(8, 3)
        bound = u * 3 * message_width(4)
        assert any_bits_bound(C, 3) == bound
        for x in range(256):
            t = run_any_protocol(C, P, as_bits(x, 8))
            assert t.output == eval_circuit(C, as_bits(x, 8))
            assert t.total_bits <= bound


def test_transcript_round_trip():
    t = run_hg_protocol(gip_circuit(2, 2), NOFPartition.gip_rows(2, 2), "1111")
    again = Transcript.from_json(t.to_json())
    assert again == t and again.total_bits == t.total_bits


def test_scan_examples():
    g = gip_table(GIPParams(2, 2))
    rep = gip_correlation_scan(2, 2, [g, TruthTable.constant(4, 0)])
    assert rep.agreements[0] == 1.0 and rep.correlations[0] == 0.5
    assert rep.agreements[1] == 10 / 16 and rep.correlations[1] == 1 / 8
    assert rep.budget == bns_budget(2, 2, 0.25)


def test_scan_sym_and1_against_enumeration():
    rng = make_rng(6)
    f = sample_circuit(ClassDescriptor(top=SYM, s=4, k=1), 6, rng)
    rep = gip_correlation_scan(3, 2, [f])
    agree = sum(eval_circuit(f, as_bits(x, 6)) == eval_gip(GIPParams(3, 2), as_bits(x, 6)) for x in range(64))
    assert rep.agreements[0] == agree / 64


def test_gip_circuit_is_gip():
    for m, k1 in [(1, 2), (3, 2), (2, 3), (4, 3)]:
        assert circuit_table(gip_circuit(m, k1)) == gip_table(GIPParams(m, k1))
