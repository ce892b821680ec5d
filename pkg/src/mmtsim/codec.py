"""Random linear network coding over GF(2^u).

A generation is a group of r source messages coded and decoded together.
Coded packets carry a global encoding vector (length r) alongside the payload,
so any node can form fresh random combinations of what it holds (recoding)
while receivers track rank with a progressively maintained reduced
row-echelon matrix and solve once rank reaches r.

The module also provides the algebraic view of an acyclic coded network:
the source-injection matrix A, the link-to-link matrix F (nilpotent for a
DAG) and per-receiver output matrices B, from which the end-to-end
source -> receiver map is A (I + F + F^2 + ...) B^T.  Packet-level
simulation of the same network must agree with it exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, NotAcyclicError
from .gf import Field


@dataclass(frozen=True)
class Generation:
    """r source messages of payload_len symbols each, over one field."""

    source_count: int
    payload_len: int
    field: Field

    def __post_init__(self):
        if self.source_count < 1 or self.payload_len < 1:
            raise InvalidParameterError(
                "generation needs source_count >= 1 and payload_len >= 1"
            )


@dataclass(frozen=True)
class CodedPacket:
    """Payload plus the global encoding vector expressing it in terms of the
    generation's source messages."""

    generation: Generation
    coeffs: tuple[int, ...]
    payload: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.generation.source_count:
            raise InvalidParameterError("coefficient vector length != source_count")
        if len(self.payload) != self.generation.payload_len:
            raise InvalidParameterError("payload length != payload_len")


@dataclass(frozen=True)
class NotYetDecodable:
    """Returned by solve() while the decoder still lacks full rank."""

    rank: int


def _as_payload(gen: Generation, data: Sequence[int]) -> tuple[int, ...]:
    payload = tuple(int(x) for x in data)
    if any(not 0 <= x < gen.field.q for x in payload):
        raise InvalidParameterError("payload symbol outside the field")
    return payload


def encode_source(gen: Generation, messages: Sequence[Sequence[int]],
                  coeffs: Sequence[int]) -> CodedPacket:
    """Combine the r source messages with the given coefficients.

    Messages shorter than payload_len are zero-padded on the right.
    """
    if len(messages) != gen.source_count or len(coeffs) != gen.source_count:
        raise InvalidParameterError(
            f"expected {gen.source_count} messages and coefficients"
        )
    f = gen.field
    payload = np.zeros(gen.payload_len, dtype=f.dtype)
    for c, msg in zip(coeffs, messages):
        if len(msg) > gen.payload_len:
            raise InvalidParameterError("message longer than payload_len")
        padded = np.zeros(gen.payload_len, dtype=f.dtype)
        padded[:len(msg)] = np.asarray(msg, dtype=f.dtype)
        f.addmul_vec(payload, int(c), padded)
    return CodedPacket(gen, tuple(int(c) for c in coeffs), tuple(int(x) for x in payload))


def recode(gen: Generation, inputs: Sequence[CodedPacket],
           local: Sequence[int]) -> CodedPacket:
    """Fresh combination of already-coded packets; the same local mapping is
    applied to payloads and to the encoding vectors."""
    if not inputs or len(inputs) != len(local):
        raise InvalidParameterError("need one local coefficient per input packet")
    for pkt in inputs:
        if pkt.generation != gen:
            raise InvalidParameterError("packets from mixed generations")
    f = gen.field
    coeffs = np.zeros(gen.source_count, dtype=f.dtype)
    payload = np.zeros(gen.payload_len, dtype=f.dtype)
    for c, pkt in zip(local, inputs):
        f.addmul_vec(coeffs, int(c), np.asarray(pkt.coeffs, dtype=f.dtype))
        f.addmul_vec(payload, int(c), np.asarray(pkt.payload, dtype=f.dtype))
    return CodedPacket(gen, tuple(int(x) for x in coeffs), tuple(int(x) for x in payload))


class DecoderState:
    """Progressive Gaussian elimination; rows kept in reduced row-echelon form.

    insert() reports whether the packet was innovative (rank grew by one).
    Rank never decreases, and rank <= source_count always.
    """

    def __init__(self, generation: Generation):
        self.generation = generation
        self._f = generation.field
        # parallel lists sorted by pivot column
        self._pivots: list[int] = []
        self._coeff_rows: list[np.ndarray] = []
        self._payload_rows: list[np.ndarray] = []

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def insert(self, pkt: CodedPacket) -> bool:
        if pkt.generation != self.generation:
            raise InvalidParameterError("packet from a different generation")
        f = self._f
        coeffs = np.array(pkt.coeffs, dtype=f.dtype)
        payload = np.array(pkt.payload, dtype=f.dtype)
        # reduce against existing pivots
        for pivot, crow, prow in zip(self._pivots, self._coeff_rows, self._payload_rows):
            c = int(coeffs[pivot])
            if c:
                f.addmul_vec(coeffs, c, crow)
                f.addmul_vec(payload, c, prow)
        lead = -1
        for idx in range(self.generation.source_count):
            if coeffs[idx]:
                lead = idx
                break
        if lead < 0:
            return False
        # normalise so the pivot entry is 1
        inv = f.inv(int(coeffs[lead]))
        coeffs = f.mul_vec(inv, coeffs)
        payload = f.mul_vec(inv, payload)
        # eliminate the new pivot from stored rows
        for k in range(len(self._pivots)):
            c = int(self._coeff_rows[k][lead])
            if c:
                f.addmul_vec(self._coeff_rows[k], c, coeffs)
                f.addmul_vec(self._payload_rows[k], c, payload)
        pos = 0
        while pos < len(self._pivots) and self._pivots[pos] < lead:
            pos += 1
        self._pivots.insert(pos, lead)
        self._coeff_rows.insert(pos, coeffs)
        self._payload_rows.insert(pos, payload)
        return True

    def contains(self, coeffs: Sequence[int]) -> bool:
        """True when the vector already lies in the decoder's row space."""
        f = self._f
        v = np.array(coeffs, dtype=f.dtype)
        for pivot, crow in zip(self._pivots, self._coeff_rows):
            c = int(v[pivot])
            if c:
                f.addmul_vec(v, c, crow)
        return not v.any()

    def solve(self):
        """The r source payloads once rank == r, else NotYetDecodable."""
        r = self.generation.source_count
        if self.rank < r:
            return NotYetDecodable(self.rank)
        # full-rank RREF of r vectors of length r is the identity
        return [tuple(int(x) for x in row) for row in self._payload_rows]


# ---------------------------------------------------------------------------
# Acyclic coded networks and their transfer matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodedNetwork:
    """A directed acyclic network with r source processes placed on nodes.

    ``edges`` are directed (origin, destination) pairs; ``source_nodes[i]``
    is where source process i enters.  ``receivers`` collect the symbols on
    their terminal links.
    """

    nodes: tuple
    edges: tuple[tuple, ...]
    source_nodes: tuple
    receivers: tuple

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise InvalidParameterError(f"self-loop {u}->{v}")
            if u not in self.nodes or v not in self.nodes:
                raise InvalidParameterError(f"edge {u}->{v} uses unknown node")
        for s in self.source_nodes:
            if s not in self.nodes:
                raise InvalidParameterError(f"unknown source node {s}")

    @property
    def source_count(self) -> int:
        return len(self.source_nodes)

    def in_edges(self, node) -> list[int]:
        return [i for i, (_, v) in enumerate(self.edges) if v == node]

    def out_edges(self, node) -> list[int]:
        return [i for i, (u, _) in enumerate(self.edges) if u == node]

    def topo_edge_order(self) -> list[int]:
        """Edge indices in an order compatible with data flow; raises
        NotAcyclicError when the node graph has a directed cycle."""
        indeg = {v: 0 for v in self.nodes}
        for _, v in self.edges:
            indeg[v] += 1
        queue = [v for v in self.nodes if indeg[v] == 0]
        node_order = []
        while queue:
            u = queue.pop()
            node_order.append(u)
            for i in self.out_edges(u):
                v = self.edges[i][1]
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        if len(node_order) != len(self.nodes):
            raise NotAcyclicError("network has a directed cycle")
        pos = {v: k for k, v in enumerate(node_order)}
        return sorted(range(len(self.edges)), key=lambda i: pos[self.edges[i][0]])


@dataclass
class LocalCoding:
    """Per-edge local coefficients for one use of a coded network.

    source_coeffs[j][i] scales source i injected on edge j (only for sources
    placed at the edge's origin); edge_coeffs[j][l] scales the symbol of
    in-edge l relayed onto edge j.  output_coeffs[beta] has one row per
    receiver output over that receiver's terminal links.
    """

    source_coeffs: dict[int, dict[int, int]] = dc_field(default_factory=dict)
    edge_coeffs: dict[int, dict[int, int]] = dc_field(default_factory=dict)
    output_coeffs: dict = dc_field(default_factory=dict)


def draw_local_coding(net: CodedNetwork, fld: Field, rng: random.Random,
                      nonzero: bool = False) -> LocalCoding:
    """Independent uniform draws for every admissible coefficient position.

    Receiver outputs default to the identity selection of terminal links
    (one output per incoming link, coefficient 1).
    """
    coding = LocalCoding()
    for j, (u, _) in enumerate(net.edges):
        src = {i for i, s in enumerate(net.source_nodes) if s == u}
        if src:
            coding.source_coeffs[j] = {i: fld.sample(rng, nonzero) for i in sorted(src)}
        ins = net.in_edges(u)
        if ins:
            coding.edge_coeffs[j] = {l: fld.sample(rng, nonzero) for l in ins}
    for beta in net.receivers:
        terminals = net.in_edges(beta)
        coding.output_coeffs[beta] = [
            {l: 1} for l in terminals
        ]
    return coding


@dataclass(frozen=True)
class TransferMatrices:
    """A (r x E), F (E x E, nilpotent), and per-receiver B matrices."""

    field: Field
    A: np.ndarray
    F: np.ndarray
    B: dict


def build_transfer_matrices(net: CodedNetwork, coding: LocalCoding,
                            fld: Field) -> TransferMatrices:
    """Populate A/F/B from the per-edge local coefficients.

    Sparsity follows the incidence rules: A[i, j] != 0 only when source i sits
    at edge j's origin, F[l, j] != 0 only when edge l ends where edge j starts,
    and B rows for receiver beta touch only links terminating at beta.
    """
    net.topo_edge_order()  # cycle check
    E = len(net.edges)
    r = net.source_count
    A = np.zeros((r, E), dtype=np.int64)
    F = np.zeros((E, E), dtype=np.int64)
    for j, cs in coding.source_coeffs.items():
        for i, c in cs.items():
            if net.source_nodes[i] != net.edges[j][0]:
                raise InvalidParameterError(
                    f"source {i} not at origin of edge {j}"
                )
            A[i, j] = c
    for j, cs in coding.edge_coeffs.items():
        for l, c in cs.items():
            if net.edges[l][1] != net.edges[j][0]:
                raise InvalidParameterError(
                    f"edge {l} does not feed edge {j}"
                )
            F[l, j] = c
    B = {}
    for beta, rows in coding.output_coeffs.items():
        mat = np.zeros((len(rows), E), dtype=np.int64)
        for i, row in enumerate(rows):
            for l, c in row.items():
                if net.edges[l][1] != beta:
                    raise InvalidParameterError(
                        f"edge {l} does not terminate at receiver {beta}"
                    )
                mat[i, l] = c
        B[beta] = mat
    return TransferMatrices(fld, A, F, B)


def _gf_matmul(fld: Field, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
    for i in range(X.shape[0]):
        for k in range(X.shape[1]):
            x = int(X[i, k])
            if x:
                for j in range(Y.shape[1]):
                    y = int(Y[k, j])
                    if y:
                        out[i, j] ^= fld.mul(x, y)
    return out


def receiver_observation(tm: TransferMatrices, beta) -> np.ndarray:
    """The r x outputs matrix taking source messages to receiver outputs.

    Uses the Neumann sum I + F + F^2 + ... which terminates because F is
    nilpotent for an acyclic network.
    """
    fld = tm.field
    E = tm.F.shape[0]
    total = np.eye(E, dtype=np.int64)   # field addition is XOR
    power = tm.F.copy()
    steps = 0
    while power.any():
        if steps > E:
            raise NotAcyclicError("F is not nilpotent (cyclic network)")
        total ^= power
        power = _gf_matmul(fld, power, tm.F)
        steps += 1
    Y = _gf_matmul(fld, tm.A, total)              # r x E edge symbols
    Bt = tm.B[beta].T                              # E x outputs
    return _gf_matmul(fld, Y, Bt)


def simulate_packets(net: CodedNetwork, coding: LocalCoding, fld: Field,
                     messages: Sequence[Sequence[int]]) -> dict:
    """One use of the network: propagate coded packets edge by edge in
    topological order and collect receiver outputs.

    Returns {"edges": [CodedPacket per edge], "received": {beta: [CodedPacket
    per output]}}; payload length is taken from the messages.
    """
    r = net.source_count
    if len(messages) != r:
        raise InvalidParameterError(f"expected {r} source messages")
    L = len(messages[0])
    gen = Generation(r, L, fld)
    basis = [
        CodedPacket(gen, tuple(1 if k == i else 0 for k in range(r)),
                    _as_payload(gen, messages[i]))
        for i in range(r)
    ]
    edge_pkts: list[CodedPacket | None] = [None] * len(net.edges)
    for j in net.topo_edge_order():
        inputs: list[CodedPacket] = []
        local: list[int] = []
        for i, c in sorted(coding.source_coeffs.get(j, {}).items()):
            inputs.append(basis[i])
            local.append(c)
        for l, c in sorted(coding.edge_coeffs.get(j, {}).items()):
            inputs.append(edge_pkts[l])
            local.append(c)
        if inputs:
            edge_pkts[j] = recode(gen, inputs, local)
        else:
            edge_pkts[j] = CodedPacket(gen, (0,) * r, (0,) * L)
    received = {}
    for beta, rows in coding.output_coeffs.items():
        outs = []
        for row in rows:
            inputs = [edge_pkts[l] for l in sorted(row)]
            local = [row[l] for l in sorted(row)]
            outs.append(recode(gen, inputs, local))
        received[beta] = outs
    return {"edges": edge_pkts, "received": received}
