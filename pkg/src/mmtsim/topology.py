"""Multi-mesh-of-trees (MMT) topology: construction, queries, metrics, max-flow.

An MMT with side parameter n has n^4 processors addressed as
P(block_row, block_col, row, col), all coordinates 1-based in [1, n].
Each block is an n x n grid whose rows and columns form binary trees
(rooted at column 1 / row 1 respectively); blocks are joined by boundary
links between corner/edge processors:

  horizontal intrablock : P(a,b,r,j)  --  P(a,b,r,2j), P(a,b,r,2j+1)
  vertical intrablock   : P(a,b,i,c)  --  P(a,b,2i,c), P(a,b,2i+1,c)
  horizontal interblock : P(a,b,i,1)  --  P(a,i,b,n)
  vertical interblock   : P(a,b,1,j)  --  P(j,b,n,a)

Links are stored bidirected; schedules impose a direction per round.
For n in {2, 3} an interblock link whose generator stays inside one block
can share its endpoint pair with a tree link; the two are kept as distinct
links of different kinds (link identity includes the kind).
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import InvalidParameterError, ParseError, StructuralError


class LinkKind(str, Enum):
    HORIZONTAL_INTRABLOCK = "horizontal_intrablock"
    VERTICAL_INTRABLOCK = "vertical_intrablock"
    HORIZONTAL_INTERBLOCK = "horizontal_interblock"
    VERTICAL_INTERBLOCK = "vertical_interblock"

    def __str__(self) -> str:
        return self.value


class ProcessorId(NamedTuple):
    block_row: int
    block_col: int
    row: int
    col: int

    def __str__(self) -> str:
        return f"{self.block_row}.{self.block_col}.{self.row}.{self.col}"

    @classmethod
    def parse(cls, text: str) -> "ProcessorId":
        parts = text.split(".")
        if len(parts) != 4:
            raise ValueError(f"bad processor id {text!r}")
        return cls(*(int(p) for p in parts))


class Link(NamedTuple):
    origin: ProcessorId
    destination: ProcessorId
    kind: LinkKind
    capacity: int = 1


def _pid_in_range(p: ProcessorId, n: int) -> bool:
    return all(1 <= c <= n for c in p)


class MmtGraph:
    """Immutable MMT(n) graph with per-node adjacency."""

    def __init__(self, n: int, links: Iterable[Link]):
        self.n = n
        self.links: tuple[Link, ...] = tuple(
            sorted(links, key=lambda l: (l.origin, l.destination, l.kind.value))
        )
        seen = set()
        adjacency: dict[ProcessorId, list[tuple[ProcessorId, LinkKind]]] = defaultdict(list)
        for link in self.links:
            if link.origin == link.destination:
                raise StructuralError(f"self-loop generated at {link.origin}")
            key = (frozenset((link.origin, link.destination)), link.kind)
            if key in seen:
                raise StructuralError(f"duplicate link {link}")
            seen.add(key)
            adjacency[link.origin].append((link.destination, link.kind))
            adjacency[link.destination].append((link.origin, link.kind))
        self._adjacency = {p: tuple(sorted(nbrs)) for p, nbrs in adjacency.items()}
        self._link_keys = seen

    @property
    def node_count(self) -> int:
        return self.n ** 4

    def nodes(self) -> Iterable[ProcessorId]:
        n = self.n
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                for i in range(1, n + 1):
                    for j in range(1, n + 1):
                        yield ProcessorId(a, b, i, j)

    def neighbors(self, p: ProcessorId) -> tuple[tuple[ProcessorId, LinkKind], ...]:
        if not _pid_in_range(p, self.n):
            raise InvalidParameterError(f"{p} outside MMT({self.n})")
        return self._adjacency.get(p, ())

    def has_link(self, u: ProcessorId, v: ProcessorId, kind: LinkKind | None = None) -> bool:
        if kind is not None:
            return (frozenset((u, v)), kind) in self._link_keys
        return any((frozenset((u, v)), k) in self._link_keys for k in LinkKind)

    def directed_edges(self) -> list[tuple[ProcessorId, ProcessorId]]:
        """Both directions of every link (unit capacity each way)."""
        out = []
        for link in self.links:
            out.append((link.origin, link.destination))
            out.append((link.destination, link.origin))
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MmtGraph)
            and self.n == other.n
            and self.links == other.links
        )

    def __hash__(self) -> int:
        return hash((self.n, self.links))


def build_mmt(n: int) -> MmtGraph:
    """Generate MMT(n) from the four link families."""
    if n < 2:
        raise InvalidParameterError(f"side parameter n must be >= 2, got {n}")
    links: list[Link] = []
    rng = range(1, n + 1)
    for a in rng:
        for b in rng:
            for i in rng:
                for j in range(1, n // 2 + 1):
                    for child in (2 * j, 2 * j + 1):
                        if child <= n:
                            links.append(Link(
                                ProcessorId(a, b, i, j),
                                ProcessorId(a, b, i, child),
                                LinkKind.HORIZONTAL_INTRABLOCK,
                            ))
            for j in rng:
                for i in range(1, n // 2 + 1):
                    for child in (2 * i, 2 * i + 1):
                        if child <= n:
                            links.append(Link(
                                ProcessorId(a, b, i, j),
                                ProcessorId(a, b, child, j),
                                LinkKind.VERTICAL_INTRABLOCK,
                            ))
            for i in rng:
                links.append(Link(
                    ProcessorId(a, b, i, 1),
                    ProcessorId(a, i, b, n),
                    LinkKind.HORIZONTAL_INTERBLOCK,
                ))
            for j in rng:
                links.append(Link(
                    ProcessorId(a, b, 1, j),
                    ProcessorId(j, b, n, a),
                    LinkKind.VERTICAL_INTERBLOCK,
                ))
    return MmtGraph(n, links)


# ---------------------------------------------------------------------------
# Structural metrics
# ---------------------------------------------------------------------------

def _bfs_eccentricity(adj: dict, start) -> tuple[int, object, int]:
    """Max distance from start; returns (eccentricity, farthest node, reached)."""
    dist = {start: 0}
    queue = deque([start])
    far_node, far_dist = start, 0
    while queue:
        u = queue.popleft()
        for v, _ in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                if dist[v] > far_dist:
                    far_dist, far_node = dist[v], v
                queue.append(v)
    return far_dist, far_node, len(dist)


def graph_metrics(g: MmtGraph) -> dict:
    """Node/edge counts, degree, and BFS diameter.

    The diameter is exact (all-pairs BFS) for n <= 4 and a double-sweep
    lower bound for larger n, flagged via ``diameter_exact``.  The closed-form
    diameter and bisection figures quoted for this family are reported for
    comparison but never asserted.
    """
    adj = g._adjacency
    start = ProcessorId(1, 1, 1, 1)
    ecc, _, reached = _bfs_eccentricity(adj, start)
    if reached != g.node_count:
        raise StructuralError(
            f"MMT({g.n}) not connected: reached {reached} of {g.node_count}"
        )

    counts = {kind.value: 0 for kind in LinkKind}
    for link in g.links:
        counts[link.kind.value] += 1

    if g.n <= 4:
        diameter = 0
        for node in g.nodes():
            e, _, _ = _bfs_eccentricity(adj, node)
            diameter = max(diameter, e)
        exact = True
    else:
        # double sweep: BFS to the farthest node, then BFS again from there
        diameter = ecc
        _, far, _ = _bfs_eccentricity(adj, start)
        for _ in range(4):
            e, nxt, _ = _bfs_eccentricity(adj, far)
            diameter = max(diameter, e)
            far = nxt
        exact = False

    metrics = {
        "n": g.n,
        "node_count": g.node_count,
        "edge_count_by_kind": counts,
        "edge_count_total": len(g.links),
        "max_degree": max(len(nbrs) for nbrs in adj.values()),
        "bfs_diameter": diameter,
        "diameter_exact": exact,
        "diameter_formula_4logk_plus_2": 4 * math.log2(g.n) + 2,
        "bisection_formula_2k_minus_2": 2 * (g.n - 1),
    }
    if g.n % 2 == 0:
        metrics["bisection_cut_upper_bound"] = _block_row_cut_size(g)
    return metrics


def _block_row_cut_size(g: MmtGraph) -> int:
    """Links crossing the balanced cut block_row <= n/2; an upper bound on
    the bisection width (it is one particular balanced cut)."""
    half = g.n // 2
    crossing = 0
    for link in g.links:
        if (link.origin.block_row <= half) != (link.destination.block_row <= half):
            crossing += 1
    return crossing


# ---------------------------------------------------------------------------
# Max-flow (unit capacities, BFS augmenting paths)
# ---------------------------------------------------------------------------

_SUPER_SOURCE = ("__source__",)


def max_flow(edges, sources, sink, source_caps=None) -> int:
    """Value of a maximum flow from ``sources`` to ``sink``.

    ``edges`` is an iterable of directed (u, v) pairs -- repeats accumulate
    capacity -- or a mapping {(u, v): capacity}.  A super-source is attached
    to every source (capacity from ``source_caps`` when given, else the total
    capacity out of that source, i.e. unconstrained).
    """
    sources = set(sources)
    if sink in sources:
        raise InvalidParameterError("sink must not be one of the sources")

    cap: dict[tuple, int] = defaultdict(int)
    adj: dict[object, set] = defaultdict(set)

    def add_edge(u, v, c):
        cap[(u, v)] += c
        adj[u].add(v)
        adj[v].add(u)  # residual

    if hasattr(edges, "items"):
        edge_iter = edges.items()
    else:
        edge_iter = ((e, 1) for e in edges)
    total = 0
    for (u, v), c in edge_iter:
        add_edge(u, v, c)
        total += c
    for s in sources:
        c = total + 1 if source_caps is None else source_caps[s]
        add_edge(_SUPER_SOURCE, s, c)

    flow = 0
    while True:
        parent = {_SUPER_SOURCE: None}
        queue = deque([_SUPER_SOURCE])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return flow
        # bottleneck along the path
        path = []
        v = sink
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[e] for e in path)
        for u, v in path:
            cap[(u, v)] -= push
            cap[(v, u)] += push
        flow += push


# ---------------------------------------------------------------------------
# Canonical text export
# ---------------------------------------------------------------------------

_HEADER = "mmt-topology v1"


def export_topology(g: MmtGraph) -> str:
    """Canonical text form; byte-identical across runs for the same graph."""
    counts = {kind.value: 0 for kind in LinkKind}
    for link in g.links:
        counts[link.kind.value] += 1
    lines = [
        _HEADER,
        f"n {g.n}",
        f"nodes {g.node_count}",
    ]
    for kind in LinkKind:
        lines.append(f"links {kind.value} {counts[kind.value]}")
    for node in sorted(g.nodes()):
        lines.append(f"node {node.block_row} {node.block_col} {node.row} {node.col}")
    records = sorted(
        (link.origin, link.destination, link.kind.value) for link in g.links
    )
    for o, d, kind in records:
        lines.append(f"link {o.block_row} {o.block_col} {o.row} {o.col} "
                     f"{d.block_row} {d.block_col} {d.row} {d.col} {kind}")
    return "\n".join(lines) + "\n"


def parse_topology(text: str) -> MmtGraph:
    """Inverse of :func:`export_topology`; validates header counts."""
    lines = text.splitlines()
    if not lines or lines[0] != _HEADER:
        raise ParseError(f"expected header {_HEADER!r}", 1)
    n = None
    node_count = None
    declared: dict[str, int] = {}
    links: list[Link] = []
    nodes_seen = 0
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        tag = fields[0]
        try:
            if tag == "n":
                n = int(fields[1])
            elif tag == "nodes":
                node_count = int(fields[1])
            elif tag == "links":
                declared[fields[1]] = int(fields[2])
            elif tag == "node":
                nodes_seen += 1
            elif tag == "link":
                coords = [int(x) for x in fields[1:9]]
                kind = LinkKind(fields[9])
                links.append(Link(
                    ProcessorId(*coords[:4]), ProcessorId(*coords[4:]), kind,
                ))
            else:
                raise ParseError(f"unknown record {tag!r}", idx)
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed {tag!r} record: {exc}", idx) from exc
    if n is None or node_count is None:
        raise ParseError("missing n/nodes header records", len(lines))
    if node_count != n ** 4 or nodes_seen != node_count:
        raise ParseError(
            f"node records ({nodes_seen}) disagree with header ({node_count})",
            len(lines),
        )
    got = defaultdict(int)
    for link in links:
        got[link.kind.value] += 1
    for kind, cnt in declared.items():
        if got[kind] != cnt:
            raise ParseError(
                f"{kind} count {got[kind]} disagrees with header {cnt}",
                len(lines),
            )
    return MmtGraph(n, links)
