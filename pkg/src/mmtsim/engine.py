"""Bulk-synchronous execution of AAB schedules over an MMT graph.

Plain mode moves working-array contents (which source messages a processor
holds); coded mode runs random linear coding inside every gather unit:

  * the unit's generation has one source per tree position, a member's
    contribution being its buffer snapshot serialised to field symbols;
  * every transmission carries a batch of fresh random combinations, one per
    rank the sender currently holds;
  * the root decodes at the end of the unit's rounds.  A rank-deficient root
    is a decode failure, handled per the configured policy: ``report`` counts
    it and falls back to the plain union, ``retry`` plays bounded extra
    rounds in which every member re-sends fresh combinations to its parent.

Broadcast and interblock phases forward recovered content verbatim in both
modes; coding there would combine data the receivers cannot reduce against
anything, and the transfer claims under test all concern the gather legs.

Everything is deterministic in (graph, config): coefficient draws come from
per-unit streams derived by hashing (seed, step, phase, unit root), so the
worker count cannot reorder randomness.
"""

from __future__ import annotations

import hashlib
import random
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import aab
from .errors import InvalidParameterError, ParseError, StructuralError
from .gf import Field
from .topology import LinkKind, MmtGraph, ProcessorId, max_flow

METRICS_HEADER = "step,round,transmissions,symbols,active_count,active_pct,failures"


@dataclass(frozen=True)
class RunConfig:
    n: int
    mode: str = aab.PLAIN
    field: Field = dc_field(default_factory=Field)
    payload_len: int = 16
    seed: int = 42
    coeff_mode: str = "uniform"        # uniform | nonzero
    policy: str = "report"             # report | retry
    retry_limit: int = 3               # a dropped dimension needs up to depth
                                       # extra rounds to re-reach the root
    workers: int = 1
    keep_history: bool = False

    def __post_init__(self):
        if self.mode not in (aab.PLAIN, aab.CODED):
            raise InvalidParameterError(f"unknown mode {self.mode!r}")
        if self.coeff_mode not in ("uniform", "nonzero"):
            raise InvalidParameterError(f"unknown coeff_mode {self.coeff_mode!r}")
        if self.policy not in ("report", "retry"):
            raise InvalidParameterError(f"unknown policy {self.policy!r}")
        if self.payload_len < 1:
            raise InvalidParameterError("payload_len must be >= 1")


@dataclass
class RoundRecord:
    step: int
    round: int
    transmissions: int
    symbols: int
    active_count: int
    active_pct: float
    failures: int
    cumulative_count: int = 0
    retry: bool = False


@dataclass
class Metrics:
    n: int
    mode: str
    seed: int
    field_config: dict
    payload_len: int
    coeff_mode: str
    policy: str
    scheduled_rounds: dict[int, int]
    records: list[RoundRecord] = dc_field(default_factory=list)
    decode_failures: int = 0
    retry_rounds: int = 0

    def executed_rounds(self, include_retries: bool = True) -> dict[int, int]:
        out: dict[int, int] = {}
        for rec in self.records:
            if rec.retry and not include_retries:
                continue
            out[rec.step] = out.get(rec.step, 0) + 1
        return out

    def to_csv(self) -> str:
        lines = [
            "# mmt-metrics v1",
            f"# n {self.n}",
            f"# mode {self.mode}",
            f"# seed {self.seed}",
            f"# field u={self.field_config['u']} poly={self.field_config['reduction_poly']}",
            f"# payload_len {self.payload_len}",
            f"# coeff_mode {self.coeff_mode}",
            f"# policy {self.policy}",
            "# scheduled " + " ".join(
                f"{s}:{c}" for s, c in sorted(self.scheduled_rounds.items())
            ),
            f"# decode_failures {self.decode_failures}",
            f"# retry_rounds {self.retry_rounds}",
            METRICS_HEADER,
        ]
        for r in self.records:
            lines.append(
                f"{r.step},{r.round},{r.transmissions},{r.symbols},"
                f"{r.active_count},{r.active_pct:.2f},{r.failures}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Metrics":
        meta: dict[str, str] = {}
        records: list[RoundRecord] = []
        header_seen = False
        header_line = 0
        for idx, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if " " in body:
                    key, _, value = body.partition(" ")
                    meta[key] = value
                continue
            if not header_seen:
                if line != METRICS_HEADER:
                    raise ParseError(
                        f"expected header {METRICS_HEADER!r}, got {line!r}", idx
                    )
                header_seen = True
                header_line = idx
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ParseError(f"expected 7 columns, got {len(parts)}", idx)
            try:
                records.append(RoundRecord(
                    step=int(parts[0]), round=int(parts[1]),
                    transmissions=int(parts[2]), symbols=int(parts[3]),
                    active_count=int(parts[4]), active_pct=float(parts[5]),
                    failures=int(parts[6]),
                ))
            except ValueError as exc:
                raise ParseError(f"bad numeric field: {exc}", idx) from exc
        if not header_seen:
            raise ParseError("missing metrics header", max(1, header_line or 1))
        scheduled = {}
        for chunk in meta.get("scheduled", "").split():
            s, _, c = chunk.partition(":")
            scheduled[int(s)] = int(c)
        fieldmeta = dict(
            part.split("=", 1) for part in meta.get("field", "u=8 poly=0x11b").split()
        )
        return cls(
            n=int(meta.get("n", 0)),
            mode=meta.get("mode", aab.PLAIN),
            seed=int(meta.get("seed", 0)),
            field_config={"u": int(fieldmeta["u"]), "reduction_poly": fieldmeta["poly"]},
            payload_len=int(meta.get("payload_len", 0)),
            coeff_mode=meta.get("coeff_mode", "uniform"),
            policy=meta.get("policy", "report"),
            scheduled_rounds=scheduled,
            records=records,
            decode_failures=int(meta.get("decode_failures", 0)),
            retry_rounds=int(meta.get("retry_rounds", 0)),
        )


@dataclass
class UnitHistory:
    """Per-round decoder ranks and batch-weighted link usage of one coded
    gather unit, for the rank/max-flow audit."""

    step: int
    phase: str
    root: ProcessorId
    members: tuple[ProcessorId, ...]
    round_events: list[list[tuple[ProcessorId, ProcessorId, int]]]
    round_ranks: list[dict[ProcessorId, int]]


@dataclass
class RunResult:
    config: RunConfig
    graph: MmtGraph
    holdings: np.ndarray            # (N, N) bool: holdings[p, s]
    payloads: np.ndarray            # (N, L) original source payloads
    metrics: Metrics
    trace_lines: list[str]
    unit_histories: list[UnitHistory]

    def index_of(self, p: ProcessorId) -> int:
        n = self.config.n
        return (((p.block_row - 1) * n + (p.block_col - 1)) * n + (p.row - 1)) * n + (p.col - 1)

    def pid_of(self, idx: int) -> ProcessorId:
        n = self.config.n
        j = idx % n
        idx //= n
        i = idx % n
        idx //= n
        b = idx % n
        a = idx // n
        return ProcessorId(a + 1, b + 1, i + 1, j + 1)


def derive_seed(*parts) -> int:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _coeff_digest(coeff_rows: list) -> str:
    crc = 0
    for row in coeff_rows:
        crc = zlib.crc32(bytes(int(x) & 0xFF for x in row), crc)
    return f"{crc:08x}"


# ---------------------------------------------------------------------------
# Contribution serialisation (buffer snapshot -> field symbols)
# ---------------------------------------------------------------------------

def _digit_width(value: int, u: int) -> int:
    width = 1
    while value >= (1 << (u * width)):
        width += 1
    return width


def _encode_contribution(mask: np.ndarray, payloads: np.ndarray, fld: Field,
                         id_width: int, count_width: int) -> np.ndarray:
    ids = np.nonzero(mask)[0].astype(np.int64)
    m = len(ids)
    L = payloads.shape[1]
    shifts = [fld.u * (id_width - 1 - k) for k in range(id_width)]
    id_digits = np.stack([(ids >> s) & (fld.q - 1) for s in shifts], axis=1)
    records = np.concatenate(
        [id_digits.astype(fld.dtype), payloads[ids]], axis=1
    ).reshape(-1)
    count_digits = np.array(
        [(m >> (fld.u * (count_width - 1 - k))) & (fld.q - 1)
         for k in range(count_width)],
        dtype=fld.dtype,
    )
    return np.concatenate([count_digits, records])


def _decode_contribution(buf: np.ndarray, payloads: np.ndarray, fld: Field,
                         id_width: int, count_width: int) -> np.ndarray:
    """Parse ids back out and cross-check payload symbols; returns the ids."""
    m = 0
    for k in range(count_width):
        m = (m << fld.u) | int(buf[k])
    L = payloads.shape[1]
    rec_len = id_width + L
    body = buf[count_width:count_width + m * rec_len]
    records = np.asarray(body, dtype=np.int64).reshape(m, rec_len)
    ids = np.zeros(m, dtype=np.int64)
    for k in range(id_width):
        ids = (ids << fld.u) | records[:, k]
    if m and (ids.max() >= payloads.shape[0] or ids.min() < 0):
        raise StructuralError("decoded contribution contains bad source ids")
    if not np.array_equal(records[:, id_width:].astype(payloads.dtype), payloads[ids]):
        raise StructuralError("decoded payloads disagree with the originals")
    return ids


# ---------------------------------------------------------------------------
# Coded gather unit
# ---------------------------------------------------------------------------

class _UnitPeer:
    """Packet store of one unit member: raw received rows plus a coefficient
    RREF for rank tracking and batch generation."""

    def __init__(self, fld: Field, r: int, basis_index: int, contribution: np.ndarray):
        self.fld = fld
        self.r = r
        self.coeff_rows: list[list[int]] = []
        self.payload_rows: list[np.ndarray] = []
        self._rref: list[list[int]] = []
        self._pivots: list[int] = []
        coeffs = [0] * r
        coeffs[basis_index] = 1
        self.receive(coeffs, contribution)

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def _reduce(self, vec: list[int]) -> list[int]:
        f = self.fld
        v = list(vec)
        for pivot, row in zip(self._pivots, self._rref):
            c = v[pivot]
            if c:
                for idx in range(self.r):
                    v[idx] ^= f.mul(c, row[idx])
        return v

    def receive(self, coeffs: list[int], payload: np.ndarray) -> bool:
        self.coeff_rows.append(list(coeffs))
        self.payload_rows.append(payload)
        v = self._reduce(coeffs)
        lead = next((i for i, x in enumerate(v) if x), -1)
        if lead < 0:
            return False
        f = self.fld
        inv = f.inv(v[lead])
        v = [f.mul(inv, x) for x in v]
        pos = 0
        while pos < len(self._pivots) and self._pivots[pos] < lead:
            pos += 1
        self._pivots.insert(pos, lead)
        self._rref.insert(pos, v)
        return True

    def make_batch(self, rng: random.Random, nonzero: bool) -> tuple[list[list[int]], list[np.ndarray]]:
        """rank-many fresh random combinations of everything held."""
        f = self.fld
        batch_c: list[list[int]] = []
        batch_p: list[np.ndarray] = []
        for _ in range(self.rank):
            locals_ = [f.sample(rng, nonzero) for _ in self.coeff_rows]
            coeffs = [0] * self.r
            payload = np.zeros_like(self.payload_rows[0])
            for c, crow, prow in zip(locals_, self.coeff_rows, self.payload_rows):
                if c:
                    for idx in range(self.r):
                        coeffs[idx] ^= f.mul(c, crow[idx])
                    f.addmul_vec(payload, c, prow)
            batch_c.append(coeffs)
            batch_p.append(payload)
        return batch_c, batch_p

    def solve_payloads(self) -> list[np.ndarray]:
        """Gaussian solve for all r contributions (requires full rank)."""
        f = self.fld
        if self.rank != self.r:
            raise StructuralError("solve called before full rank")
        coeff = [list(row) for row in self.coeff_rows]
        pay = [row.copy() for row in self.payload_rows]
        col_to_row: dict[int, int] = {}
        used: set[int] = set()
        for col in range(self.r):
            prow = next(
                (k for k in range(len(coeff)) if k not in used and coeff[k][col]),
                None,
            )
            if prow is None:
                raise StructuralError("rank bookkeeping out of sync")
            inv = f.inv(coeff[prow][col])
            coeff[prow] = [f.mul(inv, x) for x in coeff[prow]]
            pay[prow] = f.mul_vec(inv, pay[prow])
            for k in range(len(coeff)):
                if k != prow and coeff[k][col]:
                    c = coeff[k][col]
                    for idx in range(self.r):
                        coeff[k][idx] ^= f.mul(c, coeff[prow][idx])
                    f.addmul_vec(pay[k], c, pay[prow])
            used.add(prow)
            col_to_row[col] = prow
        return [pay[col_to_row[col]] for col in range(self.r)]


@dataclass
class _UnitResult:
    root: ProcessorId
    root_gain_ids: np.ndarray
    failed: bool
    retries_used: int
    width: int                       # padded contribution length in symbols
    round_txs: list[list[tuple[ProcessorId, ProcessorId, int, str]]]
    round_ranks: list[dict[ProcessorId, int]]


def _run_coded_unit(unit: aab.Unit, member_masks: list[np.ndarray],
                    payloads: np.ndarray, cfg: RunConfig, unit_seed: int,
                    id_width: int, count_width: int) -> _UnitResult:
    fld = cfg.field
    rng = random.Random(unit_seed)
    nonzero = cfg.coeff_mode == "nonzero"
    r = len(unit.members)
    contributions = [
        _encode_contribution(mask, payloads, fld, id_width, count_width)
        for mask in member_masks
    ]
    width = max(len(c) for c in contributions)
    padded = []
    for c in contributions:
        buf = np.zeros(width, dtype=fld.dtype)
        buf[:len(c)] = c
        padded.append(buf)
    peers = {
        member: _UnitPeer(fld, r, k, padded[k])
        for k, member in enumerate(unit.members)
    }

    round_txs: list[list[tuple[ProcessorId, ProcessorId, int, str]]] = []
    round_ranks: list[dict[ProcessorId, int]] = []

    def play_round(txs):
        staged = []
        for tx in sorted(txs, key=lambda t: (t.sender, t.receiver)):
            batch_c, batch_p = peers[tx.sender].make_batch(rng, nonzero)
            staged.append((tx, batch_c, batch_p))
        events = []
        for tx, batch_c, batch_p in staged:
            for coeffs, payload in zip(batch_c, batch_p):
                peers[tx.receiver].receive(coeffs, payload)
            events.append((tx.sender, tx.receiver, len(batch_c), _coeff_digest(batch_c)))
        round_txs.append(events)
        round_ranks.append({m: peers[m].rank for m in unit.members})

    for txs in unit.rounds:
        play_round(txs)

    root = unit.root
    retries = 0
    if cfg.policy == "retry":
        while peers[root].rank < r and retries < cfg.retry_limit:
            play_round(unit.retry_round or unit.rounds[-1])
            retries += 1

    union_ids = np.nonzero(np.logical_or.reduce(member_masks))[0]
    if peers[root].rank == r:
        solved = peers[root].solve_payloads()
        gained: list[np.ndarray] = []
        for k, buf in enumerate(solved):
            if not np.array_equal(buf, padded[k]):
                raise StructuralError(
                    "decoded contribution differs from the retained original"
                )
            gained.append(_decode_contribution(buf, payloads, fld, id_width, count_width))
        gain_ids = np.unique(np.concatenate(gained)) if gained else np.array([], dtype=np.int64)
        return _UnitResult(root, gain_ids, False, retries, width,
                           round_txs, round_ranks)
    # decode failure: fall back to the plain union for this unit
    return _UnitResult(root, union_ids, True, retries, width,
                       round_txs, round_ranks)


# ---------------------------------------------------------------------------
# Run driver
# ---------------------------------------------------------------------------

class _MetricsBuilder:
    def __init__(self, n: int):
        self.N = n ** 4
        self.records: list[RoundRecord] = []
        self._step_seen: set = set()
        self._step = 0
        self._round_no = 0

    def begin_step(self, step: int):
        self._step = step
        self._step_seen = set()
        self._round_no = 0

    def add_round(self, transmissions: int, symbols: int, endpoints: set,
                  failures: int, retry: bool) -> int:
        self._round_no += 1
        self._step_seen |= endpoints
        self.records.append(RoundRecord(
            step=self._step,
            round=self._round_no,
            transmissions=transmissions,
            symbols=symbols,
            active_count=len(endpoints),
            active_pct=100.0 * len(endpoints) / self.N,
            failures=failures,
            cumulative_count=len(self._step_seen),
            retry=retry,
        ))
        return self._round_no


def run(g: MmtGraph, cfg: RunConfig) -> RunResult:
    """Execute the full ten-step broadcast; deterministic in (g, cfg)."""
    if cfg.n != g.n:
        raise StructuralError(f"config n={cfg.n} does not match graph n={g.n}")
    return run_schedules(g, cfg, aab.full_aab(cfg.n, cfg.mode))


def run_schedules(g: MmtGraph, cfg: RunConfig,
                  schedules: list[aab.StepSchedule]) -> RunResult:
    n = cfg.n
    N = n ** 4
    fld = cfg.field
    L = cfg.payload_len

    payload_rng = np.random.default_rng(derive_seed(cfg.seed, "payloads"))
    payloads = payload_rng.integers(0, fld.q, size=(N, L), dtype=np.int64).astype(fld.dtype)

    holdings = np.zeros((N, N), dtype=bool)
    np.fill_diagonal(holdings, True)

    id_width = _digit_width(N - 1, fld.u)
    count_width = _digit_width(N, fld.u)

    def index(p: ProcessorId) -> int:
        return (((p.block_row - 1) * n + (p.block_col - 1)) * n + (p.row - 1)) * n + (p.col - 1)

    metrics = Metrics(
        n=n, mode=cfg.mode, seed=cfg.seed, field_config=fld.to_config(),
        payload_len=L, coeff_mode=cfg.coeff_mode, policy=cfg.policy,
        scheduled_rounds=aab.scheduled_round_counts(schedules),
    )
    builder = _MetricsBuilder(n)
    trace: list[str] = []
    histories: list[UnitHistory] = []

    for sched in schedules:
        builder.begin_step(sched.step_id)
        for phase_idx, phase in enumerate(sched.phases):
            if cfg.mode == aab.CODED and phase.gather:
                _exec_coded_gather(g, cfg, sched.step_id, phase_idx, phase,
                                   holdings, payloads, index, builder, trace,
                                   histories, id_width, count_width)
            else:
                _exec_plain_phase(sched.step_id, phase, holdings, L, index,
                                  builder, trace)

    metrics.records = builder.records
    metrics.decode_failures = sum(r.failures for r in metrics.records)
    metrics.retry_rounds = sum(1 for r in metrics.records if r.retry)
    return RunResult(cfg, g, holdings, payloads, metrics, trace, histories)


def _exec_plain_phase(step: int, phase: aab.Phase, holdings: np.ndarray,
                      L: int, index, builder: _MetricsBuilder, trace: list[str]):
    for rnd in phase.rounds:
        senders = {tx.sender for tx in rnd.transmissions}
        receivers = {tx.receiver for tx in rnd.transmissions}
        if senders & receivers:
            raise StructuralError(
                f"step {step}: a plain round mixes senders and receivers"
            )
        symbols = 0
        round_no = builder._round_no + 1
        for tx in rnd.transmissions:
            s, r = index(tx.sender), index(tx.receiver)
            symbols += int(np.count_nonzero(holdings[s])) * L
            holdings[r] |= holdings[s]
            trace.append(f"{step} {round_no} {tx.sender} {tx.receiver} {tx.kind} plain -")
        builder.add_round(len(rnd.transmissions), symbols,
                          senders | receivers, failures=0, retry=False)


def _exec_coded_gather(g, cfg: RunConfig, step: int, phase_idx: int,
                       phase: aab.Phase, holdings: np.ndarray, payloads,
                       index, builder: _MetricsBuilder, trace: list[str],
                       histories: list[UnitHistory], id_width: int,
                       count_width: int):
    units = phase.units

    def run_unit(unit: aab.Unit) -> _UnitResult:
        member_masks = [holdings[index(m)] for m in unit.members]
        seed = derive_seed(cfg.seed, step, phase_idx, unit.root)
        return _run_coded_unit(unit, member_masks, payloads, cfg, seed,
                               id_width, count_width)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_unit, units))
    else:
        results = [run_unit(u) for u in units]

    scheduled = len(phase.rounds)
    max_rounds = max(len(res.round_txs) for res in results)
    for t in range(max_rounds):
        transmissions = 0
        symbols = 0
        endpoints: set[ProcessorId] = set()
        failures = 0
        round_no = builder._round_no + 1
        for unit, res in zip(units, results):
            if t >= len(res.round_txs):
                continue
            kind_tag = "coded" if t < scheduled else "retry"
            link_kind = (LinkKind.HORIZONTAL_INTRABLOCK if unit.axis == "row"
                         else LinkKind.VERTICAL_INTRABLOCK)
            for sender, receiver, batch, digest in res.round_txs[t]:
                transmissions += 1
                symbols += batch * res.width
                endpoints.add(sender)
                endpoints.add(receiver)
                trace.append(
                    f"{step} {round_no} {sender} {receiver} "
                    f"{link_kind} {kind_tag} {digest}"
                )
            if t == len(res.round_txs) - 1 and res.failed:
                failures += 1
        builder.add_round(transmissions, symbols, endpoints,
                          failures=failures, retry=t >= scheduled)

    for unit, res in zip(units, results):
        holdings[index(res.root), res.root_gain_ids] = True
        if cfg.keep_history:
            histories.append(UnitHistory(
                step=step, phase=phase.name, root=unit.root,
                members=unit.members, round_events=[
                    [(s, r, b) for s, r, b, _ in evts] for evts in res.round_txs
                ],
                round_ranks=res.round_ranks,
            ))


# ---------------------------------------------------------------------------
# Verification and reporting
# ---------------------------------------------------------------------------

def trace_text(result: RunResult) -> str:
    """Full trace file body: header comments plus one line per transmission
    (step, round, sender, receiver, kind, packet kind, coefficient digest)."""
    cfg = result.config
    header = [
        "# mmt-trace v1",
        f"# n {cfg.n}",
        f"# mode {cfg.mode}",
        f"# seed {cfg.seed}",
        f"# field u={cfg.field.u} poly={cfg.field.reduction_poly:#x}",
        f"# coeff_mode {cfg.coeff_mode}",
        "# block_root P(a,b,1,1)",
    ]
    return "\n".join(header + result.trace_lines) + "\n"


def verify_all_to_all(result: RunResult) -> list[tuple[ProcessorId, list[int]]]:
    """Empty list when every processor holds every source message; otherwise
    one (processor, missing source indices) entry per deficient processor."""
    missing = []
    incomplete = np.nonzero(~result.holdings.all(axis=1))[0]
    for p_idx in incomplete:
        absent = np.nonzero(~result.holdings[p_idx])[0]
        missing.append((result.pid_of(int(p_idx)), [int(x) for x in absent]))
    return missing


def utilization_report(metrics: Metrics) -> dict[int, list[tuple[int, float, float]]]:
    """Per step: (round, active %, cumulative %) series."""
    N = metrics.n ** 4
    out: dict[int, list[tuple[int, float, float]]] = {}
    for rec in metrics.records:
        out.setdefault(rec.step, []).append(
            (rec.round, rec.active_pct, 100.0 * rec.cumulative_count / N)
        )
    return out


def rank_bound_audit(result: RunResult) -> list[dict]:
    """Check every decoder rank against the max-flow bound.

    For each coded gather unit and each round, a member's decoder rank must
    not exceed the max-flow from the unit's sources (one unit of capacity per
    contribution held at round zero) through the links used so far, where a
    transmission of b packets adds b units of capacity to its link.
    """
    if not result.config.keep_history:
        raise InvalidParameterError("run with keep_history=True to audit ranks")
    violations = []
    for hist in result.unit_histories:
        edges: dict[tuple, int] = {}
        for rnd_idx, events in enumerate(hist.round_events):
            for sender, receiver, batch in events:
                key = (sender, receiver)
                edges[key] = edges.get(key, 0) + batch
            ranks = hist.round_ranks[rnd_idx]
            for member, rank in ranks.items():
                sources = {m for m in hist.members if m != member}
                bound = max_flow(
                    dict(edges), sources, member,
                    source_caps={s: 1 for s in sources},
                )
                bound += 1  # the member's own contribution
                if rank > bound:
                    violations.append({
                        "step": hist.step, "phase": hist.phase,
                        "root": hist.root, "member": member,
                        "round": rnd_idx + 1, "rank": rank, "bound": bound,
                    })
    return violations
