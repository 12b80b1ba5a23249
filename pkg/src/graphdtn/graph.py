"""Immutable metric graphs and the structural operations used to compose them.

A metric graph is a finite multigraph whose edges carry positive lengths and
which designates an ordered list of boundary vertices. Parallel edges are
allowed, self-loops are not. Edge orientation is stored (it fixes the
arc-length coordinate on the edge) but nothing derived from a graph may
depend on it.

Operations (glue, attach, concatenate, scale_lengths, subdivide_edge) are
pure functions returning new graphs. Combining operations renumber vertices
and edges to consecutive ids starting at 0, keeping the lowest merged id as
the survivor of each identification, so results are deterministic and
serialize byte-for-byte reproducibly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

__all__ = [
    "Edge",
    "GraphError",
    "GraphFormatError",
    "MetricGraph",
    "attach",
    "concatenate",
    "deserialize",
    "export_dot",
    "flip_edge",
    "glue",
    "metric_graph",
    "require_valid",
    "scale_lengths",
    "segment",
    "serialize",
    "subdivide_edge",
    "validate",
]

FORMAT_VERSION = 1


class GraphError(ValueError):
    """A structural precondition failed (invalid graph or operation arguments)."""


class GraphFormatError(ValueError):
    """A graph file was rejected; the message names the offending field."""


@dataclass(frozen=True)
class Edge:
    """One edge: stored orientation u -> v, positive length (arc length)."""

    id: int
    u: int
    v: int
    length: float


@dataclass(frozen=True)
class MetricGraph:
    """Vertices, edges with lengths, and an ordered boundary vertex list.

    ``boundary`` fixes the row/column order of every boundary matrix derived
    from the graph. Instances are values: all operations return new graphs.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    boundary: tuple[int, ...]

    @property
    def boundary_size(self) -> int:
        return len(self.boundary)

    @property
    def interior_vertices(self) -> tuple[int, ...]:
        bset = set(self.boundary)
        return tuple(v for v in self.vertices if v not in bset)

    def edge_by_id(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise GraphError(f"unknown edge id {edge_id!r}")

    def incident_edges(self, vertex: int) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if vertex in (e.u, e.v))

    def total_length(self) -> float:
        return sum(e.length for e in self.edges)


def metric_graph(
    edges: Iterable[tuple[int, int, float]],
    boundary: Sequence[int],
    vertices: Iterable[int] | None = None,
) -> MetricGraph:
    """Build a graph from ``(u, v, length)`` triples; edge ids follow list order.

    The vertex set defaults to every id mentioned by an edge or the boundary.
    No validation happens here; use :func:`validate` or :func:`require_valid`.
    """
    edge_list = tuple(
        Edge(i, int(u), int(v), float(length)) for i, (u, v, length) in enumerate(edges)
    )
    if vertices is None:
        seen: dict[int, None] = {}
        for e in edge_list:
            seen.setdefault(e.u)
            seen.setdefault(e.v)
        for v in boundary:
            seen.setdefault(int(v))
        vertex_tuple = tuple(sorted(seen))
    else:
        vertex_tuple = tuple(int(v) for v in vertices)
    return MetricGraph(vertex_tuple, edge_list, tuple(int(v) for v in boundary))


def segment(length: float) -> MetricGraph:
    """A single edge of the given length with both endpoints on the boundary."""
    return metric_graph([(0, 1, length)], boundary=(0, 1))


def validate(g: MetricGraph) -> list[str]:
    """Return every violated invariant; an empty list means the graph is valid."""
    violations: list[str] = []
    if not g.vertices:
        violations.append("graph has no vertices")
        return violations
    if len(set(g.vertices)) != len(g.vertices):
        violations.append("duplicate vertex ids")
    vset = set(g.vertices)
    if len({e.id for e in g.edges}) != len(g.edges):
        violations.append("duplicate edge ids")
    for e in g.edges:
        if not (math.isfinite(e.length) and e.length > 0):
            violations.append(f"edge {e.id}: length must be finite and > 0, got {e.length!r}")
        if e.u == e.v:
            violations.append(f"edge {e.id}: self-loop at vertex {e.u}")
        for endpoint in (e.u, e.v):
            if endpoint not in vset:
                violations.append(f"edge {e.id}: unknown vertex {endpoint}")
    if not g.boundary:
        violations.append("boundary is empty (need at least one boundary vertex)")
    if len(set(g.boundary)) != len(g.boundary):
        violations.append("boundary vertices are not distinct")
    for v in g.boundary:
        if v not in vset:
            violations.append(f"boundary vertex {v} is not in the vertex set")
    if not _connected(g):
        violations.append("graph is not connected")
    return violations


def require_valid(g: MetricGraph) -> MetricGraph:
    violations = validate(g)
    if violations:
        raise GraphError("invalid graph: " + "; ".join(violations))
    return g


def _connected(g: MetricGraph) -> bool:
    if len(g.vertices) <= 1:
        return True
    adjacency: dict[int, list[int]] = {v: [] for v in g.vertices}
    for e in g.edges:
        if e.u in adjacency and e.v in adjacency:
            adjacency[e.u].append(e.v)
            adjacency[e.v].append(e.u)
    start = g.vertices[0]
    seen = {start}
    stack = [start]
    while stack:
        for w in adjacency[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(g.vertices)


class _UnionFind:
    def __init__(self, items: Iterable[int]):
        self.parent = {i: i for i in items}

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # lowest id survives the identification
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb


def _quotient(
    vertices: Sequence[int],
    edges: Sequence[tuple[int, int, float]],
    boundary: Sequence[int],
    pairs: Sequence[tuple[int, int]],
) -> MetricGraph:
    """Identify vertex pairs, then renumber vertices and edges canonically."""
    uf = _UnionFind(vertices)
    for a, b in pairs:
        uf.union(a, b)
    survivors = sorted({uf.find(v) for v in vertices})
    relabel = {rep: i for i, rep in enumerate(survivors)}
    new_edges = [(relabel[uf.find(u)], relabel[uf.find(v)], length) for u, v, length in edges]
    new_boundary = [relabel[uf.find(v)] for v in boundary]
    return metric_graph(new_edges, new_boundary, vertices=range(len(survivors)))


def _offset_map(g: MetricGraph, start: int) -> dict[int, int]:
    return {v: start + i for i, v in enumerate(sorted(g.vertices))}


def glue(
    g1: MetricGraph, g2: MetricGraph, pairing: Sequence[int] | None = None
) -> MetricGraph:
    """Identify the boundaries of two graphs pairwise.

    ``pairing[i]`` gives the position in ``g2.boundary`` matched with
    ``g1.boundary[i]``; it defaults to positional order. The result keeps
    g1's boundary order. Boundary response matrices add under this
    operation, which is what the synthesis construction exploits.
    """
    require_valid(g1)
    require_valid(g2)
    k = g1.boundary_size
    if g2.boundary_size != k:
        raise GraphError(
            f"boundary size mismatch: {k} vs {g2.boundary_size}; gluing needs equal boundaries"
        )
    if pairing is None:
        pairing = tuple(range(k))
    if sorted(pairing) != list(range(k)):
        raise GraphError(f"pairing must be a permutation of 0..{k - 1}, got {list(pairing)!r}")
    shift = _offset_map(g2, max(g1.vertices) + 1)
    vertices = list(g1.vertices) + [shift[v] for v in sorted(g2.vertices)]
    edges = [(e.u, e.v, e.length) for e in g1.edges]
    edges += [(shift[e.u], shift[e.v], e.length) for e in g2.edges]
    pairs = [(g1.boundary[i], shift[g2.boundary[pairing[i]]]) for i in range(k)]
    return _quotient(vertices, edges, g1.boundary, pairs)


def attach(
    frame: Sequence[Hashable],
    blocks: Sequence[tuple[MetricGraph, Hashable, Hashable]],
) -> MetricGraph:
    """Mount two-boundary blocks onto an ordered frame of k vertices.

    Each block is ``(graph, label_a, label_b)``: the block's first boundary
    vertex is identified with the frame vertex named ``label_a``, the second
    with ``label_b``. The result's boundary is the frame, in order. The
    incidence structure of blocks over frame labels must connect every label.
    """
    frame = list(frame)
    k = len(frame)
    if k < 1:
        raise GraphError("frame must name at least one vertex")
    if len(set(frame)) != k:
        raise GraphError("frame labels must be distinct")
    position = {label: i for i, label in enumerate(frame)}
    if not blocks:
        raise GraphError("attach needs at least one block")

    label_uf = _UnionFind(range(k))
    vertices = list(range(k))
    edges: list[tuple[int, int, float]] = []
    pairs: list[tuple[int, int]] = []
    cursor = k
    for n, (block, label_a, label_b) in enumerate(blocks):
        require_valid(block)
        if block.boundary_size != 2:
            raise GraphError(f"block {n}: needs a 2-point boundary, has {block.boundary_size}")
        for label in (label_a, label_b):
            if label not in position:
                raise GraphError(f"block {n}: unknown frame label {label!r}")
        if label_a == label_b:
            raise GraphError(f"block {n}: endpoints must be distinct frame labels")
        shift = _offset_map(block, cursor)
        cursor += len(block.vertices)
        vertices.extend(shift[v] for v in sorted(block.vertices))
        edges.extend((shift[e.u], shift[e.v], e.length) for e in block.edges)
        pairs.append((position[label_a], shift[block.boundary[0]]))
        pairs.append((position[label_b], shift[block.boundary[1]]))
        label_uf.union(position[label_a], position[label_b])

    root = label_uf.find(0)
    for label, i in position.items():
        if label_uf.find(i) != root:
            raise GraphError(f"frame label {label!r} is not connected to the rest by any block")
    return _quotient(vertices, edges, list(range(k)), pairs)


def concatenate(g: MetricGraph, h: MetricGraph) -> MetricGraph:
    """Join two 2-boundary graphs end to end.

    The second boundary vertex of ``g`` is identified with the first of
    ``h`` and becomes interior; the result's boundary is (first of g,
    second of h).
    """
    require_valid(g)
    require_valid(h)
    if g.boundary_size != 2 or h.boundary_size != 2:
        raise GraphError(
            "concatenation needs 2-point boundaries, got "
            f"{g.boundary_size} and {h.boundary_size}"
        )
    shift = _offset_map(h, max(g.vertices) + 1)
    vertices = list(g.vertices) + [shift[v] for v in sorted(h.vertices)]
    edges = [(e.u, e.v, e.length) for e in g.edges]
    edges += [(shift[e.u], shift[e.v], e.length) for e in h.edges]
    pairs = [(g.boundary[1], shift[h.boundary[0]])]
    return _quotient(vertices, edges, (g.boundary[0], shift[h.boundary[1]]), pairs)


def scale_lengths(g: MetricGraph, c: float) -> MetricGraph:
    """Multiply every edge length by c > 0; combinatorics unchanged."""
    if not (c > 0 and math.isfinite(c)):
        raise GraphError(f"scale factor must be a positive finite number, got {c!r}")
    edges = tuple(Edge(e.id, e.u, e.v, e.length * c) for e in g.edges)
    return MetricGraph(g.vertices, edges, g.boundary)


def subdivide_edge(g: MetricGraph, edge_id: int, t: float) -> MetricGraph:
    """Split one edge at fraction t into two edges through a new degree-2 vertex.

    The first part (length ``t * l``) takes the split edge's position in the
    edge list, the second part is appended at the end; edge ids are then
    renumbered consecutively. The new vertex gets the next free id and is
    interior, so derived boundary matrices are unchanged.
    """
    if not (0.0 < t < 1.0):
        raise GraphError(f"split fraction must lie strictly between 0 and 1, got {t!r}")
    target = g.edge_by_id(edge_id)
    w = max(g.vertices) + 1
    head = [(e.u, e.v, e.length) if e.id != edge_id else (target.u, w, t * target.length) for e in g.edges]
    head.append((w, target.v, (1.0 - t) * target.length))
    return metric_graph(head, g.boundary, vertices=tuple(g.vertices) + (w,))


def flip_edge(g: MetricGraph, edge_id: int) -> MetricGraph:
    """Reverse one edge's stored orientation. Derived quantities must not change."""
    target = g.edge_by_id(edge_id)
    edges = tuple(
        e if e.id != edge_id else Edge(e.id, target.v, target.u, target.length) for e in g.edges
    )
    return MetricGraph(g.vertices, edges, g.boundary)


def serialize(g: MetricGraph) -> str:
    """Render the graph file format (single-line JSON object).

    Lengths are written with full round-trip precision (at most 17
    significant digits), so deserialize(serialize(g)) reproduces g exactly.
    """
    doc = {
        "version": FORMAT_VERSION,
        "vertices": [{"id": v} for v in g.vertices],
        "edges": [
            {"id": e.id, "from": e.u, "to": e.v, "length": e.length} for e in g.edges
        ],
        "boundary": list(g.boundary),
    }
    return json.dumps(doc, separators=(",", ":"))


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def deserialize(text: str) -> MetricGraph:
    """Parse the graph file format, rejecting schema or invariant violations.

    Error messages name the offending field (for example ``edges[2].length``).
    """
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise GraphFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError("top level: expected an object")
    if doc.get("version") != FORMAT_VERSION:
        raise GraphFormatError(f"version: expected {FORMAT_VERSION}, got {doc.get('version')!r}")
    for field in ("vertices", "edges", "boundary"):
        if not isinstance(doc.get(field), list):
            raise GraphFormatError(f"{field}: expected a list")

    vertex_ids = []
    for i, item in enumerate(doc["vertices"]):
        if not isinstance(item, dict) or "id" not in item:
            raise GraphFormatError(f"vertices[{i}]: expected an object with an 'id' field")
        vertex_ids.append(_as_int(item["id"], f"vertices[{i}].id"))

    edges = []
    edge_ids = []
    for i, item in enumerate(doc["edges"]):
        if not isinstance(item, dict):
            raise GraphFormatError(f"edges[{i}]: expected an object")
        for field in ("id", "from", "to", "length"):
            if field not in item:
                raise GraphFormatError(f"edges[{i}].{field}: missing")
        edge_ids.append(_as_int(item["id"], f"edges[{i}].id"))
        u = _as_int(item["from"], f"edges[{i}].from")
        v = _as_int(item["to"], f"edges[{i}].to")
        raw = item["length"]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise GraphFormatError(f"edges[{i}].length: expected a number, got {raw!r}")
        length = float(raw)
        if not (math.isfinite(length) and length > 0):
            raise GraphFormatError(
                f"edges[{i}].length: expected a positive finite number, got {raw!r}"
            )
        edges.append((u, v, length))

    boundary = [_as_int(v, f"boundary[{i}]") for i, v in enumerate(doc["boundary"])]

    g = MetricGraph(
        tuple(vertex_ids),
        tuple(Edge(eid, u, v, length) for eid, (u, v, length) in zip(edge_ids, edges)),
        tuple(boundary),
    )
    violations = validate(g)
    if violations:
        raise GraphFormatError("invariant violation: " + "; ".join(violations))
    return g


def export_dot(g: MetricGraph) -> str:
    """Render an undirected DOT graph; edge labels carry lengths (6 digits)."""
    bset = set(g.boundary)
    lines = ["graph metric_graph {"]
    for v in g.vertices:
        shape = "doublecircle" if v in bset else "circle"
        lines.append(f"  {v} [shape={shape}];")
    for e in g.edges:
        lines.append(f'  {e.u} -- {e.v} [label="{e.length:.6g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
