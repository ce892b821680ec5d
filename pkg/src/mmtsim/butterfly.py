"""Built-in demo: coded multicast of two messages on a small fixed network.

Seven nodes P1..P7 and eight directed edges:

    P1->P2  P1->P4  P2->P5  P4->P5  P2->P3  P5->P6  P6->P3  P6->P7

P1 holds two source messages (d1, d2) and multicasts them toward the sink
nodes P3 and P7.  Coefficients are drawn at three points per network use:
the two injection edges out of P1 (two coefficients each) and the merge P5
performs before forwarding to P6; every other edge forwards its single input
verbatim.  The merged vector at P5 is therefore exactly

    (c5*c1 + c6*c3,  c5*c2 + c6*c4)

for the six drawn coefficients c1..c6.

The cut from P1 to P7 is a single edge, so one use of the network cannot
deliver both degrees of freedom to P7; a trial runs the network ``uses``
times (default 2) with fresh draws and the sinks accumulate rank across
uses.  A sink decodes iff its accumulated coefficient matrix reaches rank 2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .codec import CodedPacket, DecoderState, Generation, encode_source, recode
from .engine import derive_seed
from .errors import InvalidParameterError
from .gf import Field
from .topology import max_flow

DEMO_NODES = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
DEMO_EDGES = (
    ("P1", "P2"), ("P1", "P4"), ("P2", "P5"), ("P4", "P5"),
    ("P2", "P3"), ("P5", "P6"), ("P6", "P3"), ("P6", "P7"),
)
DEMO_SOURCE = "P1"
DEMO_SINKS = ("P3", "P7")

COEFF_MODES = ("uniform", "nonzero", "ones")


def _draw(fld: Field, rng: random.Random, mode: str) -> int:
    if mode == "ones":
        return 1
    return fld.sample(rng, nonzero=(mode == "nonzero"))


@dataclass
class UseRecord:
    """Coefficient draws and resulting vectors for one use of the network."""

    injection_left: tuple[int, int]      # P1->P2
    injection_right: tuple[int, int]     # P1->P4
    merge: tuple[int, int]               # P5's combination of (P2, P4) inputs
    merged_vector: tuple[int, int]       # encoding vector sent P5->P6 onward
    sink_vectors: dict[str, list[tuple[int, ...]]]


@dataclass
class TrialResult:
    trial: int
    uses: list[UseRecord]
    rank_history: list[dict[str, int]]   # sink ranks after each use
    sink_rank: dict[str, int]
    sink_decoded: dict[str, bool]
    sink_messages: dict[str, list[tuple[int, ...]] | None]
    success: bool


@dataclass
class DemoReport:
    field_config: dict
    seed: int
    trials: int
    uses_per_trial: int
    coeff_mode: str
    results: list[TrialResult] = dc_field(default_factory=list)
    failure_count: int = 0

    @property
    def failure_rate(self) -> float:
        return self.failure_count / self.trials if self.trials else 0.0


def run_use(gen: Generation, messages, fld: Field, rng: random.Random,
            mode: str) -> tuple[UseRecord, dict[str, list[CodedPacket]]]:
    """Propagate one use of the network; returns the draw record and the
    packets arriving at each sink."""
    c1, c2 = _draw(fld, rng, mode), _draw(fld, rng, mode)
    c3, c4 = _draw(fld, rng, mode), _draw(fld, rng, mode)
    pkt_12 = encode_source(gen, messages, (c1, c2))      # P1->P2
    pkt_14 = encode_source(gen, messages, (c3, c4))      # P1->P4
    pkt_25 = pkt_12                                       # verbatim forwards
    pkt_45 = pkt_14
    pkt_23 = pkt_12
    c5, c6 = _draw(fld, rng, mode), _draw(fld, rng, mode)
    pkt_56 = recode(gen, (pkt_25, pkt_45), (c5, c6))      # merge at P5
    pkt_63 = pkt_56
    pkt_67 = pkt_56
    return UseRecord(
        injection_left=(c1, c2),
        injection_right=(c3, c4),
        merge=(c5, c6),
        merged_vector=pkt_56.coeffs,
        sink_vectors={"P3": [pkt_23.coeffs, pkt_63.coeffs],
                      "P7": [pkt_67.coeffs]},
    ), {"P3": [pkt_23, pkt_63], "P7": [pkt_67]}


def run_trials(fld: Field, seed: int = 42, trials: int = 1,
               uses_per_trial: int = 2, coeff_mode: str = "uniform") -> DemoReport:
    """Monte-Carlo over fresh coefficient draws; per-trial decode outcomes."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if uses_per_trial < 1:
        raise InvalidParameterError("uses_per_trial must be >= 1")
    if coeff_mode not in COEFF_MODES:
        raise InvalidParameterError(f"coeff_mode must be one of {COEFF_MODES}")

    report = DemoReport(
        field_config=fld.to_config(), seed=seed, trials=trials,
        uses_per_trial=uses_per_trial, coeff_mode=coeff_mode,
    )
    L = 4
    gen = Generation(2, L, fld)
    for trial in range(trials):
        rng = random.Random(derive_seed(seed, "demo", trial))
        messages = [
            tuple(fld.sample(rng) for _ in range(L)),
            tuple(fld.sample(rng) for _ in range(L)),
        ]
        decoders = {sink: DecoderState(gen) for sink in DEMO_SINKS}
        uses = []
        rank_history = []
        for _ in range(uses_per_trial):
            record, packets = run_use(gen, messages, fld, rng, coeff_mode)
            uses.append(record)
            for sink, pkts in packets.items():
                for pkt in pkts:
                    decoders[sink].insert(pkt)
            rank_history.append({s: decoders[s].rank for s in DEMO_SINKS})
        sink_rank = {s: decoders[s].rank for s in DEMO_SINKS}
        sink_decoded = {s: sink_rank[s] == 2 for s in DEMO_SINKS}
        sink_messages = {}
        for s in DEMO_SINKS:
            solved = decoders[s].solve()
            if isinstance(solved, list):
                if solved != [tuple(m) for m in messages]:
                    raise AssertionError("decoded messages differ from sources")
                sink_messages[s] = solved
            else:
                sink_messages[s] = None
        success = all(sink_decoded.values())
        if not success:
            report.failure_count += 1
        report.results.append(TrialResult(
            trial=trial, uses=uses, rank_history=rank_history,
            sink_rank=sink_rank, sink_decoded=sink_decoded,
            sink_messages=sink_messages, success=success,
        ))
    return report


def audit_rank_bounds(report: DemoReport) -> list[dict]:
    """Rank <= max-flow check over the demo runs.

    After u uses, every edge has carried u packets; a sink's accumulated rank
    must not exceed the max-flow from P1 (which injects two independent
    combinations per use) to that sink in the correspondingly scaled network.
    """
    violations = []
    for res in report.results:
        for u, ranks in enumerate(res.rank_history, start=1):
            edges = {e: u for e in DEMO_EDGES}
            for sink in DEMO_SINKS:
                bound = max_flow(edges, {DEMO_SOURCE}, sink,
                                 source_caps={DEMO_SOURCE: 2 * u})
                if ranks[sink] > bound:
                    violations.append({
                        "trial": res.trial, "use": u, "sink": sink,
                        "rank": ranks[sink], "bound": bound,
                    })
    return violations
