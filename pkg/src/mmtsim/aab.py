"""Round schedules for the ten-step all-to-all broadcast on MMT(n).

Steps and the link families they use:

  1  row gather       tree links, leaves up to the row root (col 1)
  2  row broadcast    row root down its tree
  3  column gather    column trees, root at row 1
  4  column broadcast
  5  horizontal interblock exchange (one round)
  6  column gather again (moves what step 5 delivered)
  7  one-to-all inside each block = row broadcast + column broadcast
  8  vertical interblock exchange (one round)
  9  row gather again
  10 in-block all-to-all = gather + broadcast on both axes

Gather steps carry a mode: plain gathers use log2(n) rounds; coded gathers
merge the last two rounds into one (floored at a single round), which is the
round saving the coded transfer claims.  In the merged round every sender
transmits a combination of its pre-round buffer, so the root may come up
short on rank; the engine's failure policy deals with that.

A transmission moves one symbol batch over one link; within a round links are
pairwise distinct and a processor originates at most one batch (sent to one
or more neighbours, as in a tree broadcast fan-out).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import UnsupportedParameterError
from .topology import LinkKind, ProcessorId

PLAIN = "plain"
CODED = "coded"


@dataclass(frozen=True)
class Transmission:
    sender: ProcessorId
    receiver: ProcessorId
    kind: LinkKind


@dataclass(frozen=True)
class Round:
    transmissions: tuple[Transmission, ...]


@dataclass(frozen=True)
class Unit:
    """One tree gather/broadcast unit: a row or column of one block."""

    axis: str                      # "row" | "column"
    root: ProcessorId
    members: tuple[ProcessorId, ...]   # tree positions 1..n in order
    rounds: tuple[tuple[Transmission, ...], ...]
    # one extra round used by the engine's retry policy: every member sends
    # to its tree parent at once (all links distinct, so a single round)
    retry_round: tuple[Transmission, ...] = ()


@dataclass(frozen=True)
class Phase:
    name: str
    gather: bool
    rounds: tuple[Round, ...]
    units: tuple[Unit, ...]


@dataclass(frozen=True)
class StepSchedule:
    step_id: int
    mode: str
    phases: tuple[Phase, ...]

    @property
    def rounds(self) -> tuple[Round, ...]:
        out: list[Round] = []
        for phase in self.phases:
            out.extend(phase.rounds)
        return tuple(out)


def _require_power_of_two(n: int) -> int:
    if n < 2 or n & (n - 1):
        raise UnsupportedParameterError(
            f"gather scheduling requires a power-of-two side length, got {n}"
        )
    return n.bit_length() - 1


def _block_indices(n: int):
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            yield a, b


def _row_member(a: int, b: int, i: int, t: int) -> ProcessorId:
    return ProcessorId(a, b, i, t)


def _col_member(a: int, b: int, j: int, t: int) -> ProcessorId:
    return ProcessorId(a, b, t, j)


def _tree_units(n: int, axis: str):
    """Member lookup (tree position -> processor) for every row or column
    unit of every block, in canonical block order."""
    for a, b in _block_indices(n):
        for k in range(1, n + 1):
            if axis == "row":
                member = lambda t, a=a, b=b, k=k: _row_member(a, b, k, t)
            else:
                member = lambda t, a=a, b=b, k=k: _col_member(a, b, k, t)
            yield member


def _gather_unit_rounds(n: int, member: Callable[[int], ProcessorId],
                        kind: LinkKind, mode: str) -> list[list[Transmission]]:
    """Tree positions in (n/2^t, n/2^(t-1)] send to their parents in round t;
    coded mode folds the final two rounds together."""
    log_n = _require_power_of_two(n)
    plain_rounds: list[list[Transmission]] = []
    for t in range(1, log_n + 1):
        lo, hi = n >> t, n >> (t - 1)
        plain_rounds.append([
            Transmission(member(k), member(k // 2), kind)
            for k in range(lo + 1, hi + 1)
        ])
    if mode == CODED and log_n >= 2:
        merged = plain_rounds[-2] + plain_rounds[-1]
        return plain_rounds[:-2] + [merged]
    return plain_rounds


def _broadcast_unit_rounds(n: int, member: Callable[[int], ProcessorId],
                           kind: LinkKind) -> list[list[Transmission]]:
    """Depth-(t-1) positions forward to their children in round t."""
    if n < 2:
        raise UnsupportedParameterError(f"broadcast needs n >= 2, got {n}")
    rounds: list[list[Transmission]] = []
    t = 1
    while (1 << (t - 1)) <= n // 2:
        txs = []
        for k in range(1 << (t - 1), min(1 << t, n // 2 + 1)):
            for child in (2 * k, 2 * k + 1):
                if child <= n:
                    txs.append(Transmission(member(k), member(child), kind))
        if not txs:
            break
        rounds.append(txs)
        t += 1
    return rounds


def _tree_phase(name: str, n: int, axis: str, mode: str, gather: bool) -> Phase:
    kind = (LinkKind.HORIZONTAL_INTRABLOCK if axis == "row"
            else LinkKind.VERTICAL_INTRABLOCK)
    units = []
    unit_round_lists = []
    for member in _tree_units(n, axis):
        if gather:
            unit_rounds = _gather_unit_rounds(n, member, kind, mode)
            retry = tuple(
                Transmission(member(k), member(k // 2), kind)
                for k in range(2, n + 1)
            )
        else:
            unit_rounds = _broadcast_unit_rounds(n, member, kind)
            retry = ()
        members = tuple(member(t) for t in range(1, n + 1))
        units.append(Unit(
            axis=axis,
            root=member(1),
            members=members,
            rounds=tuple(tuple(r) for r in unit_rounds),
            retry_round=retry,
        ))
        unit_round_lists.append(unit_rounds)
    n_rounds = len(unit_round_lists[0])
    rounds = []
    for t in range(n_rounds):
        txs: list[Transmission] = []
        for unit_rounds in unit_round_lists:
            txs.extend(unit_rounds[t])
        txs.sort(key=lambda tx: (tx.sender, tx.receiver))
        rounds.append(Round(tuple(txs)))
    return Phase(name=name, gather=gather, rounds=tuple(rounds), units=tuple(units))


def _interblock_row_phase(n: int) -> Phase:
    """Every column-n boundary processor hands its buffer across the block
    row: P(a,i,b,n) sends to the row root P(a,b,i,1) it is linked with."""
    txs = [
        Transmission(ProcessorId(a, i, b, n), ProcessorId(a, b, i, 1),
                     LinkKind.HORIZONTAL_INTERBLOCK)
        for a in range(1, n + 1)
        for b in range(1, n + 1)
        for i in range(1, n + 1)
    ]
    txs.sort(key=lambda tx: (tx.sender, tx.receiver))
    return Phase(name="interblock_row", gather=False,
                 rounds=(Round(tuple(txs)),), units=())


def _interblock_col_phase(n: int) -> Phase:
    """Row-n boundary processors hand their buffers across the block column:
    P(j,b,n,a) sends to the column root P(a,b,1,j)."""
    txs = [
        Transmission(ProcessorId(j, b, n, a), ProcessorId(a, b, 1, j),
                     LinkKind.VERTICAL_INTERBLOCK)
        for a in range(1, n + 1)
        for b in range(1, n + 1)
        for j in range(1, n + 1)
    ]
    txs.sort(key=lambda tx: (tx.sender, tx.receiver))
    return Phase(name="interblock_col", gather=False,
                 rounds=(Round(tuple(txs)),), units=())


# ---------------------------------------------------------------------------
# Step builders
# ---------------------------------------------------------------------------

def row_gather_schedule(n: int, mode: str = PLAIN, step_id: int = 1) -> StepSchedule:
    """Step 1 (also step 9 and the first leg of step 10)."""
    return StepSchedule(step_id, mode,
                        (_tree_phase("row_gather", n, "row", mode, gather=True),))


def row_broadcast_schedule(n: int, step_id: int = 2) -> StepSchedule:
    return StepSchedule(step_id, PLAIN,
                        (_tree_phase("row_broadcast", n, "row", PLAIN, gather=False),))


def column_gather_schedule(n: int, mode: str = PLAIN, step_id: int = 3) -> StepSchedule:
    """Step 3; step 6 reuses it to move what the interblock round delivered."""
    return StepSchedule(step_id, mode,
                        (_tree_phase("column_gather", n, "column", mode, gather=True),))


def column_broadcast_schedule(n: int, step_id: int = 4) -> StepSchedule:
    return StepSchedule(step_id, PLAIN,
                        (_tree_phase("column_broadcast", n, "column", PLAIN, gather=False),))


def interblock_row_exchange(n: int, step_id: int = 5) -> StepSchedule:
    if n < 2:
        raise UnsupportedParameterError(f"need n >= 2, got {n}")
    return StepSchedule(step_id, PLAIN, (_interblock_row_phase(n),))


def block_one_to_all(n: int, step_id: int = 7) -> StepSchedule:
    """Step 7: spread each block's aggregate through the block, rows first."""
    return StepSchedule(step_id, PLAIN, (
        _tree_phase("row_broadcast", n, "row", PLAIN, gather=False),
        _tree_phase("column_broadcast", n, "column", PLAIN, gather=False),
    ))


def interblock_column_exchange(n: int, step_id: int = 8) -> StepSchedule:
    if n < 2:
        raise UnsupportedParameterError(f"need n >= 2, got {n}")
    return StepSchedule(step_id, PLAIN, (_interblock_col_phase(n),))


def full_aab(n: int, mode: str = PLAIN) -> list[StepSchedule]:
    """The ten steps in order.  Requires power-of-two n."""
    _require_power_of_two(n)
    if mode not in (PLAIN, CODED):
        raise UnsupportedParameterError(f"unknown mode {mode!r}")
    step10 = StepSchedule(10, mode, (
        _tree_phase("row_gather", n, "row", mode, gather=True),
        _tree_phase("row_broadcast", n, "row", PLAIN, gather=False),
        _tree_phase("column_gather", n, "column", mode, gather=True),
        _tree_phase("column_broadcast", n, "column", PLAIN, gather=False),
    ))
    return [
        row_gather_schedule(n, mode, step_id=1),
        row_broadcast_schedule(n, step_id=2),
        column_gather_schedule(n, mode, step_id=3),
        column_broadcast_schedule(n, step_id=4),
        interblock_row_exchange(n, step_id=5),
        column_gather_schedule(n, mode, step_id=6),
        block_one_to_all(n, step_id=7),
        interblock_column_exchange(n, step_id=8),
        row_gather_schedule(n, mode, step_id=9),
        step10,
    ]


def scheduled_round_counts(schedules: Iterable[StepSchedule]) -> dict[int, int]:
    return {s.step_id: len(s.rounds) for s in schedules}


def export_schedule(schedules: Iterable[StepSchedule]) -> str:
    """One line per transmission: step round sender receiver kind."""
    lines = []
    for sched in schedules:
        for rnd_idx, rnd in enumerate(sched.rounds, start=1):
            for tx in rnd.transmissions:
                lines.append(
                    f"{sched.step_id} {rnd_idx} {tx.sender} {tx.receiver} {tx.kind}"
                )
    return "\n".join(lines) + "\n"
