"""Weighted graphs as length spaces, and exact distances between points on edges.

A finite graph with positive edge lengths carries the shortest-path (length)
metric.  Points are addressed either by vertex id or as an offset along an
edge.  Everything here is pure and deterministic; graphs are validated and
frozen at construction time so distance queries can be cached safely.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

__all__ = [
    "AmbientGraph",
    "GraphPoint",
    "DistanceField",
    "vertex_distances",
    "point_distance",
    "dist_to_vertex_set",
    "graph_to_json",
    "graph_from_json",
]


@dataclass(frozen=True)
class GraphPoint:
    """A point on an edge: ``offset`` is measured from the edge's u endpoint.

    offset 0 and offset == edge length coincide with the endpoint vertices.
    """

    edge: int
    offset: float


@dataclass(frozen=True)
class DistanceField:
    """Single-source shortest-path distances, keyed by vertex id."""

    source: str
    dist: Dict[str, float]


class AmbientGraph:
    """Undirected weighted graph realizing a length metric.

    Self-loops are rejected; parallel edges are kept as distinct records
    (the three-petal rose needs them).  The graph must be connected.
    """

    def __init__(self, vertices: Sequence[str], edges: Sequence[Tuple[str, str, float]]):
        self.vertices: Tuple[str, ...] = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        self._index = {v: i for i, v in enumerate(self.vertices)}
        parsed = []
        for u, v, length in edges:
            u, v = str(u), str(v)
            if u not in self._index or v not in self._index:
                raise ValueError(f"edge ({u},{v}) references unknown vertex")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            length = float(length)
            if not length > 0.0:
                raise ValueError(f"edge ({u},{v}) has nonpositive length {length}")
            parsed.append((u, v, length))
        self.edges: Tuple[Tuple[str, str, float], ...] = tuple(parsed)

        self._adj: List[List[Tuple[int, float]]] = [[] for _ in self.vertices]
        for ei, (u, v, length) in enumerate(self.edges):
            self._adj[self._index[u]].append((self._index[v], length))
            self._adj[self._index[v]].append((self._index[u], length))

        if self.vertices and not self._connected():
            raise ValueError("graph is not connected")
        self._vmatrix: np.ndarray | None = None  # lazy all-pairs vertex distances

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    def vertex_index(self, vid: str) -> int:
        try:
            return self._index[vid]
        except KeyError:
            raise KeyError(f"unknown vertex id {vid!r}") from None

    def edge_length(self, edge: int) -> float:
        return self.edges[edge][2]

    def edge_endpoints(self, edge: int) -> Tuple[str, str]:
        u, v, _ = self.edges[edge]
        return u, v

    def total_length(self) -> float:
        return float(sum(e[2] for e in self.edges))

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w, _ in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    # ------------------------------------------------------------------
    # shortest paths
    # ------------------------------------------------------------------
    def _dijkstra(self, source_idx: int) -> np.ndarray:
        n = len(self.vertices)
        dist = np.full(n, math.inf)
        dist[source_idx] = 0.0
        heap = [(0.0, source_idx)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for w, length in self._adj[u]:
                nd = d + length
                if nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        return dist

    def vertex_matrix(self) -> np.ndarray:
        """All-pairs vertex distance matrix (cached, exactly symmetric)."""
        if self._vmatrix is None:
            n = len(self.vertices)
            mat = np.empty((n, n))
            for i in range(n):
                mat[i] = self._dijkstra(i)
            # forward/backward path sums can differ by an ulp; symmetrize
            self._vmatrix = np.minimum(mat, mat.T)
        return self._vmatrix

    def point_endpoints(self, p: GraphPoint) -> Tuple[Tuple[int, float], Tuple[int, float]]:
        """The two (vertex index, offset-to-vertex) routings out of a point."""
        u, v, length = self.edges[p.edge]
        if not (-1e-12 <= p.offset <= length + 1e-12):
            raise ValueError(f"offset {p.offset} outside [0, {length}] on edge {p.edge}")
        off = min(max(p.offset, 0.0), length)
        return (self._index[u], off), (self._index[v], length - off)


def vertex_distances(g: AmbientGraph, source: str) -> DistanceField:
    """Exact single-source shortest-path distances from a vertex."""
    si = g.vertex_index(source)
    dist = g._dijkstra(si)
    return DistanceField(source=source, dist={v: float(dist[i]) for i, v in enumerate(g.vertices)})


def point_distance(g: AmbientGraph, a: GraphPoint, b: GraphPoint) -> float:
    """Length-metric distance between two points on edges of ``g``.

    Any path between distinct edges must pass through an endpoint of each,
    so the distance is the minimum over the four endpoint routings, plus the
    direct in-edge path when both points share an edge record.
    """
    (ua, da), (va, ea) = g.point_endpoints(a)
    (ub, db), (vb, eb) = g.point_endpoints(b)
    mat = g.vertex_matrix()
    # offsets are summed first so the result is exactly symmetric in a, b
    best = min(
        mat[ua, ub] + (da + db),
        mat[ua, vb] + (da + eb),
        mat[va, ub] + (ea + db),
        mat[va, vb] + (ea + eb),
    )
    if a.edge == b.edge:
        best = min(best, abs(a.offset - b.offset))
    return float(best)


def dist_to_vertex_set(g: AmbientGraph, x: GraphPoint, vertex_ids: Iterable[str]) -> float:
    """Distance from a point to a nonempty set of vertices."""
    ids = list(vertex_ids)
    if not ids:
        raise ValueError("vertex set is empty")
    (u, du), (v, dv) = g.point_endpoints(x)
    mat = g.vertex_matrix()
    idx = [g.vertex_index(w) for w in ids]
    return float(min(min(du + mat[u, w], dv + mat[v, w]) for w in idx))


# ----------------------------------------------------------------------
# JSON wire format: {"vertices": [...], "edges": [{"u":..,"v":..,"len":..}]}
# ----------------------------------------------------------------------
def graph_to_json(g: AmbientGraph) -> str:
    doc = {
        "vertices": list(g.vertices),
        "edges": [{"u": u, "v": v, "len": length} for u, v, length in g.edges],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def graph_from_json(text: str) -> AmbientGraph:
    doc = json.loads(text)
    edges = [(e["u"], e["v"], e["len"]) for e in doc["edges"]]
    return AmbientGraph(doc["vertices"], edges)
