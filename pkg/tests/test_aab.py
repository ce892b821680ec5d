"""Schedule structure tests for the ten broadcast steps."""

import math

import pytest

from mmtsim import aab
from mmtsim.aab import CODED, PLAIN
from mmtsim.errors import UnsupportedParameterError
from mmtsim.topology import LinkKind, ProcessorId, build_mmt

P = ProcessorId


def row1_transmissions(sched, round_idx, a=1, b=1, i=1):
    """Transmissions of one row unit in one round, as (sender_col, recv_col)."""
    out = []
    for tx in sched.rounds[round_idx].transmissions:
        s, r = tx.sender, tx.receiver
        if (s.block_row, s.block_col, s.row) == (a, b, i):
            out.append((s.col, r.col))
    return sorted(out)


# ---------------------------------------------------------------------------
# step 1: row gather
# ---------------------------------------------------------------------------

def test_row_gather_n8_round_contents():
    sched = aab.row_gather_schedule(8, PLAIN)
    # round 1: positions 5..8 send to 2, 3, 3, 4
    assert row1_transmissions(sched, 0) == [(5, 2), (6, 3), (7, 3), (8, 4)]
    # round 2: 4 -> 2 and 3 -> 1; round 3: 2 -> 1
    assert row1_transmissions(sched, 1) == [(3, 1), (4, 2)]
    assert row1_transmissions(sched, 2) == [(2, 1)]


def test_row_gather_round_counts():
    assert len(aab.row_gather_schedule(8, PLAIN).rounds) == 3
    assert len(aab.row_gather_schedule(8, CODED).rounds) == 2
    assert len(aab.row_gather_schedule(2, PLAIN).rounds) == 1
    assert len(aab.row_gather_schedule(2, CODED).rounds) == 1


def test_row_gather_coded_merges_last_two_rounds():
    plain = aab.row_gather_schedule(8, PLAIN)
    coded = aab.row_gather_schedule(8, CODED)
    assert coded.rounds[0] == plain.rounds[0]
    merged = set(coded.rounds[1].transmissions)
    assert merged == set(plain.rounds[1].transmissions) | set(plain.rounds[2].transmissions)


def test_gather_rejects_non_power_of_two():
    for n in (3, 6, 12):
        with pytest.raises(UnsupportedParameterError):
            aab.row_gather_schedule(n, PLAIN)


def test_gather_coverage_every_position_sends_once():
    for n in (2, 4, 8):
        sched = aab.row_gather_schedule(n, PLAIN)
        unit = sched.phases[0].units[0]
        senders = [tx.sender for rnd in unit.rounds for tx in rnd]
        assert sorted(senders) == sorted(unit.members[1:])


# ---------------------------------------------------------------------------
# step 2: row broadcast
# ---------------------------------------------------------------------------

def test_row_broadcast_n8_round1():
    sched = aab.row_broadcast_schedule(8)
    assert row1_transmissions(sched, 0) == [(1, 2), (1, 3)]


def test_row_broadcast_n2_single_round():
    sched = aab.row_broadcast_schedule(2)
    assert len(sched.rounds) == 1
    assert row1_transmissions(sched, 0) == [(1, 2)]


def test_broadcast_receivers_cover_row_minus_root():
    # tree-children oracle: position k's children are 2k and 2k+1
    for n in (2, 4, 8):
        sched = aab.row_broadcast_schedule(n)
        unit = sched.phases[0].units[0]
        receivers = [tx.receiver for rnd in unit.rounds for tx in rnd]
        assert sorted(receivers) == sorted(unit.members[1:])
        for rnd in unit.rounds:
            for tx in rnd:
                assert tx.receiver.col in (2 * tx.sender.col, 2 * tx.sender.col + 1)


# ---------------------------------------------------------------------------
# steps 3-4: column mirror
# ---------------------------------------------------------------------------

def test_column_gather_n8_round1_tree_parents():
    sched = aab.column_gather_schedule(8, PLAIN)
    got = []
    for tx in sched.rounds[0].transmissions:
        s, r = tx.sender, tx.receiver
        if (s.block_row, s.block_col, s.col) == (1, 1, 1):
            got.append((s.row, r.row))
    assert sorted(got) == [(5, 2), (6, 3), (7, 3), (8, 4)]


def test_column_gather_coded_round_count():
    assert len(aab.column_gather_schedule(8, CODED).rounds) == 2
    assert len(aab.column_gather_schedule(2, CODED).rounds) == 1


def test_column_schedules_use_vertical_links():
    for sched in (aab.column_gather_schedule(4, PLAIN),
                  aab.column_broadcast_schedule(4)):
        for rnd in sched.rounds:
            for tx in rnd.transmissions:
                assert tx.kind == LinkKind.VERTICAL_INTRABLOCK


def test_column_broadcast_coverage():
    sched = aab.column_broadcast_schedule(4)
    unit = sched.phases[0].units[0]
    receivers = [tx.receiver for rnd in unit.rounds for tx in rnd]
    assert sorted(receivers) == sorted(unit.members[1:])


# ---------------------------------------------------------------------------
# steps 5 and 8: interblock exchanges
# ---------------------------------------------------------------------------

def test_interblock_row_single_round_and_kind():
    sched = aab.interblock_row_exchange(4)
    assert len(sched.rounds) == 1
    txs = sched.rounds[0].transmissions
    assert all(tx.kind == LinkKind.HORIZONTAL_INTERBLOCK for tx in txs)
    assert len(txs) == 4 ** 3


def test_interblock_row_endpoint_sets():
    # enumeration oracle: the link family pairs P(a,b,i,1) with P(a,i,b,n);
    # data flows from the column-n boundary into the j=1 roots
    n = 4
    sched = aab.interblock_row_exchange(n)
    txs = sched.rounds[0].transmissions
    senders = {tx.sender for tx in txs}
    receivers = {tx.receiver for tx in txs}
    R = range(1, n + 1)
    assert receivers == {P(a, b, i, 1) for a in R for b in R for i in R}
    assert senders == {P(a, i, b, n) for a in R for b in R for i in R}
    for tx in txs:
        s, r = tx.sender, tx.receiver
        assert (s.block_row, s.block_col, s.row) == (r.block_row, r.row, r.block_col)


def test_interblock_col_single_round_and_kind():
    sched = aab.interblock_column_exchange(4)
    assert len(sched.rounds) == 1
    txs = sched.rounds[0].transmissions
    assert all(tx.kind == LinkKind.VERTICAL_INTERBLOCK for tx in txs)
    n = 4
    R = range(1, n + 1)
    receivers = {tx.receiver for tx in txs}
    senders = {tx.sender for tx in txs}
    assert receivers == {P(a, b, 1, j) for a in R for b in R for j in R}
    assert senders == {P(j, b, n, a) for a in R for b in R for j in R}


# ---------------------------------------------------------------------------
# step 7: block one-to-all
# ---------------------------------------------------------------------------

def test_block_one_to_all_round_counts():
    assert len(aab.block_one_to_all(8).rounds) == 6   # 2 log2 8
    assert len(aab.block_one_to_all(2).rounds) == 2


def test_block_one_to_all_phase_order():
    sched = aab.block_one_to_all(4)
    assert [p.name for p in sched.phases] == ["row_broadcast", "column_broadcast"]


# ---------------------------------------------------------------------------
# full composition
# ---------------------------------------------------------------------------

def test_full_aab_step_ordering():
    scheds = aab.full_aab(8, PLAIN)
    assert [s.step_id for s in scheds] == list(range(1, 11))


def test_full_aab_rejects_non_power_of_two():
    with pytest.raises(UnsupportedParameterError):
        aab.full_aab(6, PLAIN)


def test_full_aab_round_totals_match_composition_oracle():
    # sum of per-step counts: gathers log n, broadcasts log n, exchanges 1,
    # step 7 = 2 log n, step 10 = 4 log n
    for n in (2, 4, 8):
        log_n = int(math.log2(n))
        expected = (4 * log_n      # steps 1, 3, 6, 9
                    + 2 * log_n    # steps 2, 4
                    + 2            # steps 5, 8
                    + 2 * log_n    # step 7
                    + 4 * log_n)   # step 10
        got = sum(len(s.rounds) for s in aab.full_aab(n, PLAIN))
        assert got == expected


def test_plain_vs_coded_differ_only_in_gather_steps():
    plain = {s.step_id: s for s in aab.full_aab(8, PLAIN)}
    coded = {s.step_id: s for s in aab.full_aab(8, CODED)}
    gather_steps = {1, 3, 6, 9, 10}
    for step_id in range(1, 11):
        p_rounds, c_rounds = plain[step_id].rounds, coded[step_id].rounds
        if step_id in gather_steps:
            assert len(c_rounds) < len(p_rounds)
        else:
            assert c_rounds == p_rounds
    # per gather step the saving is exactly one round per gather phase
    assert len(coded[1].rounds) == len(plain[1].rounds) - 1
    assert len(coded[10].rounds) == len(plain[10].rounds) - 2  # two gathers


def test_coded_gather_round_count_formula():
    for n in (2, 4, 8):
        log_n = int(math.log2(n))
        sched = aab.row_gather_schedule(n, CODED)
        assert len(sched.rounds) == max(1, log_n - 1)


# ---------------------------------------------------------------------------
# schedule validity against the topology
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,mode", [(2, PLAIN), (4, PLAIN), (4, CODED), (8, PLAIN)])
def test_every_transmission_uses_an_existing_link(n, mode):
    g = build_mmt(n)
    for sched in aab.full_aab(n, mode):
        for rnd in sched.rounds:
            for tx in rnd.transmissions:
                assert g.has_link(tx.sender, tx.receiver, tx.kind), \
                    f"step {sched.step_id}: {tx.sender}->{tx.receiver} {tx.kind}"


@pytest.mark.parametrize("n,mode", [(4, PLAIN), (4, CODED), (8, PLAIN), (8, CODED)])
def test_no_link_reused_and_single_send_per_round(n, mode):
    for sched in aab.full_aab(n, mode):
        for rnd in sched.rounds:
            links = set()
            sender_payload_targets = {}
            for tx in rnd.transmissions:
                key = frozenset({tx.sender, tx.receiver})
                assert (key, tx.kind) not in links
                links.add((key, tx.kind))
                # a processor may fan out to several neighbours in one round
                # (tree broadcast) but never to the same receiver twice
                targets = sender_payload_targets.setdefault(tx.sender, set())
                assert tx.receiver not in targets
                targets.add(tx.receiver)


def test_units_consistent_with_rounds():
    for sched in aab.full_aab(4, CODED):
        for phase in sched.phases:
            if not phase.units:
                continue
            for t, rnd in enumerate(phase.rounds):
                from_units = []
                for unit in phase.units:
                    if t < len(unit.rounds):
                        from_units.extend(unit.rounds[t])
                assert sorted(from_units, key=lambda tx: (tx.sender, tx.receiver)) == \
                    list(rnd.transmissions)


def test_unit_retry_round_covers_all_tree_links():
    sched = aab.row_gather_schedule(8, CODED)
    unit = sched.phases[0].units[0]
    assert len(unit.retry_round) == 7
    assert {tx.sender for tx in unit.retry_round} == set(unit.members[1:])


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def test_export_schedule_format_and_determinism():
    scheds = aab.full_aab(2, PLAIN)
    text = aab.export_schedule(scheds)
    assert text == aab.export_schedule(aab.full_aab(2, PLAIN))
    lines = text.strip().splitlines()
    total = sum(len(r.transmissions) for s in scheds for r in s.rounds)
    assert len(lines) == total
    first = lines[0].split()
    assert first[0] == "1" and first[1] == "1"
    assert first[4] in [k.value for k in LinkKind]
