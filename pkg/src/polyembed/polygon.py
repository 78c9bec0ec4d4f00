"""Metric polygons over ambient graphs: builders, validation, and sampling.

A metric n-gon is a cyclic chain of sides, each isometric to a closed
interval.  Sides are realized as edge paths in an :class:`AmbientGraph`;
the ambient graph may carry extra edges (chords) that the sides do not
cover but that shape the metric, as in the twisted heart.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .metric_core import AmbientGraph, GraphPoint, graph_from_json, graph_to_json, point_distance

__all__ = [
    "PolygonSide",
    "MetricPolygon",
    "SampledPolygon",
    "FiniteMetricTriangle",
    "PolygonReport",
    "make_side",
    "validate",
    "build_example",
    "sample_polygon",
    "sample_triangle",
    "random_metric_triangle",
    "diameter",
    "polygon_to_json",
    "polygon_from_json",
    "triangle_to_csv",
    "triangle_from_csv",
    "EXAMPLE_NAMES",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PolygonSide:
    """An edge path realizing one side, traversed start -> end.

    ``path`` lists (edge index, orientation); orientation +1 walks the edge
    from its u endpoint to v, -1 the reverse.
    """

    start: str
    end: str
    path: Tuple[Tuple[int, int], ...]
    length: float


def make_side(g: AmbientGraph, path: Sequence[Tuple[int, int]]) -> PolygonSide:
    """Assemble a side from an oriented edge path, checking contiguity."""
    if not path:
        raise ValueError("empty side path")
    walk: List[str] = []
    for edge, orient in path:
        u, v = g.edge_endpoints(edge)
        a, b = (u, v) if orient == +1 else (v, u)
        if not walk:
            walk.append(a)
        elif walk[-1] != a:
            raise ValueError(f"side path breaks at edge {edge}: {walk[-1]} != {a}")
        walk.append(b)
    length = float(sum(g.edge_length(e) for e, _ in path))
    return PolygonSide(start=walk[0], end=walk[-1], path=tuple((e, o) for e, o in path), length=length)


class MetricPolygon:
    """An ambient graph plus n cyclically glued sides."""

    def __init__(self, ambient: AmbientGraph, sides: Sequence[PolygonSide]):
        if len(sides) < 2:
            raise ValueError("a metric polygon needs at least 2 sides")
        for j, side in enumerate(sides):
            nxt = sides[(j + 1) % len(sides)]
            if side.end != nxt.start:
                raise ValueError(f"side {j} ends at {side.end} but side {(j+1)%len(sides)} starts at {nxt.start}")
        self.ambient = ambient
        self.sides: Tuple[PolygonSide, ...] = tuple(sides)
        self.vertices: Tuple[str, ...] = tuple(s.start for s in sides)

    @property
    def n_sides(self) -> int:
        return len(self.sides)

    def side_vertex_arcs(self, j: int) -> List[Tuple[float, str]]:
        """(arc, vertex id) for every graph vertex along side j, in order."""
        side = self.sides[j]
        out = [(0.0, side.start)]
        arc = 0.0
        for edge, orient in side.path:
            u, v = self.ambient.edge_endpoints(edge)
            arc += self.ambient.edge_length(edge)
            out.append((arc, v if orient == +1 else u))
        return out

    def point_on_side(self, j: int, arc: float) -> GraphPoint:
        """Resolve an arc coordinate on side j to a point on a graph edge."""
        side = self.sides[j]
        if not (-1e-9 <= arc <= side.length + 1e-9):
            raise ValueError(f"arc {arc} outside side {j} of length {side.length}")
        arc = min(max(arc, 0.0), side.length)
        acc = 0.0
        for edge, orient in side.path:
            ell = self.ambient.edge_length(edge)
            if arc <= acc + ell or (edge, orient) == side.path[-1]:
                local = min(max(arc - acc, 0.0), ell)
                off = local if orient == +1 else ell - local
                return GraphPoint(edge=edge, offset=off)
            acc += ell
        raise AssertionError("unreachable")

    def side_edge_sets(self) -> List[frozenset]:
        return [frozenset(e for e, _ in s.path) for s in self.sides]


# ----------------------------------------------------------------------
# Sampling
# ----------------------------------------------------------------------
class SampledPolygon:
    """A finite sample of a polygon: per-side arc grids plus graph vertices.

    Distances are evaluated lazily in row blocks against the ambient graph's
    vertex matrix, so large samples never materialize an n x n matrix unless
    asked to.
    """

    def __init__(self, polygon: MetricPolygon, m: int):
        if m < 2:
            raise ValueError("need at least 2 samples per side")
        self.polygon = polygon
        self.m = m
        g = polygon.ambient

        side_index: List[int] = []
        arcs: List[float] = []
        vertex_names: List[str] = []
        self.side_arcs: List[np.ndarray] = []
        grid_step = 0.0
        for j, side in enumerate(polygon.sides):
            tol = 1e-9 * (1.0 + side.length)
            varcs = polygon.side_vertex_arcs(j)
            merged: List[float] = []
            names: List[str] = []
            for a in np.linspace(0.0, side.length, m):
                merged.append(float(a))
                names.append("")
            for a, vid in varcs:
                hit = [k for k, b in enumerate(merged) if abs(b - a) <= tol]
                if hit:
                    names[hit[0]] = vid
                else:
                    merged.append(float(a))
                    names.append(vid)
            order = np.argsort(merged, kind="stable")
            merged_a = np.asarray(merged)[order]
            names = [names[k] for k in order]
            self.side_arcs.append(merged_a)
            grid_step = max(grid_step, float(np.max(np.diff(merged_a))))
            side_index.extend([j] * len(merged_a))
            arcs.extend(merged_a.tolist())
            vertex_names.extend(names)

        self.side_index = np.asarray(side_index, dtype=np.int64)
        self.arc = np.asarray(arcs)
        self.vertex_names = vertex_names
        self.grid_step = grid_step

        # per-sample routing data for vectorized distance blocks
        n = len(self.arc)
        self.points: List[GraphPoint] = [
            polygon.point_on_side(int(self.side_index[i]), float(self.arc[i])) for i in range(n)
        ]
        self.edge_of = np.asarray([p.edge for p in self.points], dtype=np.int64)
        end_vtx = np.empty((n, 2), dtype=np.int64)
        end_off = np.empty((n, 2))
        for i, p in enumerate(self.points):
            (u, du), (v, dv) = g.point_endpoints(p)
            end_vtx[i] = (u, v)
            end_off[i] = (du, dv)
        self._end_vtx = end_vtx
        self._end_off = end_off
        self._offset_from_u = np.asarray([p.offset for p in self.points])
        self._matrix: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.arc)

    @property
    def labels(self) -> List[str]:
        return [f"{int(s) + 1}:{a:.12g}" for s, a in zip(self.side_index, self.arc)]

    def index_of_vertex(self, vid: str) -> int:
        for i, name in enumerate(self.vertex_names):
            if name == vid:
                return i
        raise KeyError(f"vertex {vid!r} not among samples")

    def distance_block(self, lo: int, hi: int) -> np.ndarray:
        """Exact distances from samples[lo:hi] to all samples, shape (hi-lo, n).

        Offsets are summed before adding the vertex distance so the result is
        exactly symmetric in floating point.
        """
        mat = self.polygon.ambient.vertex_matrix()
        ev, eo = self._end_vtx, self._end_off
        block = None
        for a in (0, 1):
            for b in (0, 1):
                off = eo[lo:hi, a, None] + eo[None, :, b]
                cand = mat[ev[lo:hi, a][:, None], ev[None, :, b][0]] + off
                block = cand if block is None else np.minimum(block, cand)
        same = self.edge_of[lo:hi, None] == self.edge_of[None, :]
        if same.any():
            direct = np.abs(self._offset_from_u[lo:hi, None] - self._offset_from_u[None, :])
            block = np.where(same, np.minimum(block, direct), block)
        return block

    def distance_matrix(self) -> np.ndarray:
        if self._matrix is None:
            if self.n > 6000:
                raise ValueError(f"refusing to materialize {self.n}x{self.n} distance matrix")
            self._matrix = self.distance_block(0, self.n)
        return self._matrix

    def vertex_distance_block(self, lo: int, hi: int) -> np.ndarray:
        """Distances from samples[lo:hi] to every graph vertex."""
        mat = self.polygon.ambient.vertex_matrix()
        d0 = mat[self._end_vtx[lo:hi, 0]] + self._end_off[lo:hi, 0, None]
        d1 = mat[self._end_vtx[lo:hi, 1]] + self._end_off[lo:hi, 1, None]
        return np.minimum(d0, d1)


class FiniteMetricTriangle:
    """A sampled metric triangle: arc coordinates per side plus the full
    distance matrix.  ``source`` keeps the graph backing when available so
    downstream operations (distance to opposite sides) can stay exact."""

    def __init__(
        self,
        side_arcs: Sequence[np.ndarray],
        side_lengths: Sequence[float],
        matrix: np.ndarray,
        source: Optional[SampledPolygon] = None,
    ):
        if len(side_arcs) != 3:
            raise ValueError("a triangle has three sides")
        self.side_arcs = [np.asarray(a, dtype=float) for a in side_arcs]
        self.side_lengths = tuple(float(x) for x in side_lengths)
        self.matrix = np.asarray(matrix, dtype=float)
        self.source = source
        self.side_index = np.concatenate(
            [np.full(len(a), j, dtype=np.int64) for j, a in enumerate(self.side_arcs)]
        )
        self.arc = np.concatenate(self.side_arcs)
        if self.matrix.shape != (self.n, self.n):
            raise ValueError("matrix shape does not match sample count")
        steps = [float(np.max(np.diff(a))) for a in self.side_arcs if len(a) > 1]
        self.grid_step = max(steps) if steps else 0.0

    @property
    def n(self) -> int:
        return len(self.arc)

    @property
    def labels(self) -> List[str]:
        return [f"{int(s) + 1}:{a:.12g}" for s, a in zip(self.side_index, self.arc)]

    def distance_block(self, lo: int, hi: int) -> np.ndarray:
        return self.matrix[lo:hi]

    def distance_matrix(self) -> np.ndarray:
        return self.matrix

    def index_of_vertex(self, vid: str) -> int:
        if self.source is None:
            raise KeyError("matrix-backed triangle has no vertex names")
        return self.source.index_of_vertex(vid)

    def check_invariants(self, tol: float = 1e-9) -> None:
        """Raise if the stored matrix is not a sampled metric triangle."""
        m = self.matrix
        if not np.allclose(m, m.T, atol=0, rtol=0):
            raise AssertionError("matrix not exactly symmetric")
        if np.any(np.diag(m) != 0.0):
            raise AssertionError("nonzero diagonal")
        slack = _worst_triangle_slack(m)
        if slack < -1e-12:
            raise AssertionError(f"triangle inequality violated by {slack}")
        for j in range(3):
            idx = np.flatnonzero(self.side_index == j)
            arcs = self.arc[idx]
            gap = np.abs(m[np.ix_(idx, idx)] - np.abs(arcs[:, None] - arcs[None, :]))
            if gap.max() > tol:
                raise AssertionError(f"side {j} not isometric: off by {gap.max()}")


def _worst_triangle_slack(m: np.ndarray, cap: int = 64) -> float:
    """min over sampled triples of d(i,k)+d(k,j)-d(i,j); negative = violation."""
    n = m.shape[0]
    if n > cap:
        sel = np.unique(np.linspace(0, n - 1, cap).astype(int))
        m = m[np.ix_(sel, sel)]
        n = m.shape[0]
    worst = math.inf
    for k in range(n):
        worst = min(worst, float((m[:, k][:, None] + m[k, :][None, :] - m).min()))
    return worst


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------
@dataclass
class PolygonReport:
    valid: bool
    cyclic_ok: bool
    side_violations: List[float]
    worst_triangle_slack: float
    diameter: float


def validate(p: MetricPolygon, samples_per_side: int = 8) -> PolygonReport:
    """Check side isometries by sampling and report worst violations.

    A side is isometric iff the ambient distance between any two of its
    points equals their arc difference; we test all sampled pairs per side
    (uniform grid merged with graph vertices) against 1e-9.
    """
    if samples_per_side < 2:
        raise ValueError("samples_per_side must be >= 2")
    sp = SampledPolygon(p, samples_per_side)
    full = sp.distance_matrix() if sp.n <= 3000 else None

    violations = []
    for j in range(p.n_sides):
        idx = np.flatnonzero(sp.side_index == j)  # contiguous by construction
        arcs = sp.arc[idx]
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        worst = 0.0
        for blo in range(lo, hi, 256):
            bhi = min(blo + 256, hi)
            d = (full[blo:bhi] if full is not None else sp.distance_block(blo, bhi))[:, lo:hi]
            gap = np.abs(d - np.abs(sp.arc[blo:bhi, None] - arcs[None, :]))
            worst = max(worst, float(gap.max()))
        violations.append(worst)

    if full is not None:
        diam = float(full.max())
        slack = _worst_triangle_slack(full)
    else:
        diam = 0.0
        for lo in range(0, sp.n, 512):
            diam = max(diam, float(sp.distance_block(lo, min(lo + 512, sp.n)).max()))
        slack = 0.0
    valid = all(v <= 1e-9 for v in violations)
    return PolygonReport(
        valid=valid,
        cyclic_ok=True,  # enforced by the MetricPolygon constructor
        side_violations=violations,
        worst_triangle_slack=slack,
        diameter=diam,
    )


# ----------------------------------------------------------------------
# Example builders
# ----------------------------------------------------------------------
EXAMPLE_NAMES = ("circle", "rose", "tripod", "heart", "quad_q", "pentagon_k5", "pentagon_k33")


def build_example(name: str, *, legs: Sequence[float] = (1.0, 1.0, 1.0), eps: float = 0.25) -> MetricPolygon:
    """Construct one of the named spaces.

    circle        unit circle with arc metric, three arcs of length 2*pi/3
    rose          wedge of three unit circles; sides pair up semicircles
    tripod        star with the given leg lengths; sides are leg unions
    heart         the 14-unit-edge twisted heart (two chords in the ambient)
    quad_q        length-4 circle split at quarter points and midpoints,
                  plus three chords of length eps
    pentagon_k5   K5 with unit edges, pentagon on the cycle midpoints
    pentagon_k33  K3,3 with unit edges and a pentagon of five length-2
                  mid-to-mid sides (K3,3 cannot be covered by five such
                  sides, so one edge stays outside the side union)
    """
    if name == "circle":
        arc = _TWO_PI / 3.0
        g = AmbientGraph(["p", "q", "r"], [("p", "q", arc), ("q", "r", arc), ("r", "p", arc)])
        sides = [make_side(g, [(0, +1)]), make_side(g, [(1, +1)]), make_side(g, [(2, +1)])]
        return MetricPolygon(g, sides)

    if name == "rose":
        edges = [
            ("o", "p", math.pi), ("o", "p", math.pi),  # S1 semicircles
            ("o", "q", math.pi), ("o", "q", math.pi),  # S2
            ("o", "r", math.pi), ("o", "r", math.pi),  # S3
        ]
        g = AmbientGraph(["o", "p", "q", "r"], edges)
        sides = [
            make_side(g, [(1, -1), (2, +1)]),  # [pq] = S1_2 + S2_1
            make_side(g, [(3, -1), (4, +1)]),  # [qr] = S2_2 + S3_1
            make_side(g, [(5, -1), (0, +1)]),  # [rp] = S3_2 + S1_1
        ]
        return MetricPolygon(g, sides)

    if name == "tripod":
        l1, l2, l3 = (float(x) for x in legs)
        if min(l1, l2, l3) <= 0:
            raise ValueError("tripod legs must be positive")
        g = AmbientGraph(["c", "p", "q", "r"], [("c", "p", l1), ("c", "q", l2), ("c", "r", l3)])
        sides = [
            make_side(g, [(0, -1), (1, +1)]),
            make_side(g, [(1, -1), (2, +1)]),
            make_side(g, [(2, -1), (0, +1)]),
        ]
        return MetricPolygon(g, sides)

    if name == "heart":
        verts = ["p", "q", "r", "pq1", "a", "pq3", "e", "qr2", "c", "rp1", "b", "rp3"]
        unit = [
            ("p", "pq1"), ("pq1", "a"), ("a", "pq3"), ("pq3", "q"),   # side pq
            ("q", "e"), ("e", "qr2"), ("qr2", "c"), ("c", "r"),       # side qr
            ("r", "rp1"), ("rp1", "b"), ("b", "rp3"), ("rp3", "p"),   # side rp
            ("a", "c"), ("b", "e"),                                   # chords
        ]
        g = AmbientGraph(verts, [(u, v, 1.0) for u, v in unit])
        sides = [
            make_side(g, [(0, 1), (1, 1), (2, 1), (3, 1)]),
            make_side(g, [(4, 1), (5, 1), (6, 1), (7, 1)]),
            make_side(g, [(8, 1), (9, 1), (10, 1), (11, 1)]),
        ]
        return MetricPolygon(g, sides)

    if name == "quad_q":
        if eps <= 0:
            raise ValueError("eps must be positive")
        ring = ["p1", "m1", "p2", "m2", "p3", "m3", "p4", "m4"]
        edges = [(ring[i], ring[(i + 1) % 8], 0.5) for i in range(8)]
        edges += [("p1", "p3", float(eps)), ("p2", "p4", float(eps)), ("m1", "m3", float(eps))]
        g = AmbientGraph(ring, edges)
        sides = [make_side(g, [(2 * j, 1), (2 * j + 1, 1)]) for j in range(4)]
        return MetricPolygon(g, sides)

    if name == "pentagon_k5":
        ps = [f"p{i}" for i in range(1, 6)]
        ms = [f"m{i}" for i in range(1, 6)]
        edges = []
        for i in range(5):  # cycle edge I_{i,i+1} split at its midpoint m_i
            edges.append((ps[i], ms[i], 0.5))
            edges.append((ms[i], ps[(i + 1) % 5], 0.5))
        diag = [(0, 3), (0, 2), (2, 4), (1, 4), (1, 3)]  # I14, I13, I35, I25, I24
        for i, j in diag:
            edges.append((ps[i], ps[j], 1.0))
        g = AmbientGraph(ps + ms, edges)
        sides = [
            make_side(g, [(0, -1), (10, +1), (5, -1)]),   # m1 p1 p4 m3
            make_side(g, [(4, -1), (11, -1), (9, -1)]),   # m3 p3 p1 m5
            make_side(g, [(8, -1), (12, -1), (3, -1)]),   # m5 p5 p3 m2
            make_side(g, [(2, -1), (13, +1), (7, -1)]),   # m2 p2 p5 m4
            make_side(g, [(6, -1), (14, -1), (1, -1)]),   # m4 p4 p2 m1
        ]
        return MetricPolygon(g, sides)

    if name == "pentagon_k33":
        ps = [f"p{i}" for i in range(1, 4)]
        qs = [f"q{j}" for j in range(1, 4)]
        mids = {(i, j): f"m{i}{j}" for i in range(1, 4) for j in range(1, 4)}
        verts = ps + qs + [mids[k] for k in sorted(mids)]
        edges = []
        eidx = {}
        for i in range(1, 4):
            for j in range(1, 4):
                eidx[("p", i, j)] = len(edges)
                edges.append((f"p{i}", mids[(i, j)], 0.5))
                eidx[("q", i, j)] = len(edges)
                edges.append((mids[(i, j)], f"q{j}", 0.5))
        g = AmbientGraph(verts, edges)

        def seg(i, j, enter_p: bool):
            # full crossing of edge p_i q_j, oriented from the p side or the q side
            if enter_p:
                return [(eidx[("p", i, j)], +1), (eidx[("q", i, j)], +1)]
            return [(eidx[("q", i, j)], -1), (eidx[("p", i, j)], -1)]

        sides = [
            make_side(g, [(eidx[("p", 1, 1)], -1)] + seg(1, 2, True) + [(eidx[("q", 2, 2)], -1)]),
            make_side(g, [(eidx[("p", 2, 2)], -1)] + seg(2, 1, True) + [(eidx[("q", 3, 1)], -1)]),
            make_side(g, [(eidx[("p", 3, 1)], -1)] + seg(3, 2, True) + [(eidx[("q", 1, 2)], -1)]),
            make_side(g, [(eidx[("p", 1, 2)], -1)] + seg(1, 3, True) + [(eidx[("q", 2, 3)], -1)]),
            make_side(g, [(eidx[("p", 2, 3)], -1)] + seg(2, 1, True) + [(eidx[("q", 1, 1)], -1)]),
        ]
        return MetricPolygon(g, sides)

    raise ValueError(f"unknown example {name!r}; choose from {EXAMPLE_NAMES}")


def sample_polygon(p: MetricPolygon, m: int) -> SampledPolygon:
    return SampledPolygon(p, m)


def sample_triangle(p: MetricPolygon, m: int) -> FiniteMetricTriangle:
    """Sample a 3-gon and materialize its full distance matrix."""
    if p.n_sides != 3:
        raise ValueError("sample_triangle needs a metric triangle")
    sp = SampledPolygon(p, m)
    return FiniteMetricTriangle(
        side_arcs=[sp.side_arcs[j] for j in range(3)],
        side_lengths=[s.length for s in p.sides],
        matrix=sp.distance_matrix(),
        source=sp,
    )


def diameter(space) -> float:
    """Largest sampled distance; accepts anything with distance blocks."""
    n = space.n
    if n == 0:
        raise ValueError("empty sample")
    best = 0.0
    for lo in range(0, n, 1024):
        best = max(best, float(space.distance_block(lo, min(lo + 1024, n)).max()))
    return best


# ----------------------------------------------------------------------
# Random metric triangles
# ----------------------------------------------------------------------
def random_metric_triangle(
    l1: float,
    l2: float,
    l3: float,
    chords: int = 0,
    m: int = 8,
    seed: int = 0,
) -> FiniteMetricTriangle:
    """Boundary 3-cycle with the given side lengths plus random chords.

    Chord endpoints are uniform on the boundary; each chord length is drawn
    uniformly between the largest value still compatible with every side
    isometry (see below) and the current through distance of its endpoints.
    Adding edge (u,v,c) keeps all sides isometric iff no corner pair gets
    shortcut below its side length, which pins the lower bound to

        c >= max_k [ len_k - min(d(A_k,u)+d(v,B_k), d(A_k,v)+d(u,B_k)) ].

    Candidates are validated and resampled anyway (100 retries per chord).
    Deterministic for a fixed seed.
    """
    lengths = (float(l1), float(l2), float(l3))
    if min(lengths) <= 0:
        raise ValueError("side lengths must be positive")
    prods = (
        0.5 * (lengths[0] + lengths[2] - lengths[1]),
        0.5 * (lengths[0] + lengths[1] - lengths[2]),
        0.5 * (lengths[1] + lengths[2] - lengths[0]),
    )
    if min(prods) < -1e-12:
        raise ValueError(f"side lengths {lengths} violate the triangle inequality")
    if chords < 0:
        raise ValueError("chords must be >= 0")

    perim = sum(lengths)
    delta = 1e-3 * perim
    rng = np.random.default_rng(seed)

    verts: List[str] = ["P", "Q", "R"]
    edges: List[Tuple[str, str, float]] = [("P", "Q", lengths[0]), ("Q", "R", lengths[1]), ("R", "P", lengths[2])]
    side_paths: List[List[Tuple[int, int]]] = [[(0, +1)], [(1, +1)], [(2, +1)]]

    def freeze(v, e, sp) -> MetricPolygon:
        g = AmbientGraph(v, e)
        return MetricPolygon(g, [make_side(g, path) for path in sp])

    def locate(pos: float) -> Tuple[int, float]:
        # boundary position in [0, perim) -> (side, arc)
        acc = 0.0
        for j, ell in enumerate(lengths):
            if pos < acc + ell or j == 2:
                return j, min(max(pos - acc, 0.0), ell)
            acc += ell
        raise AssertionError("unreachable")

    def insert(v, e, sp, side: int, arc: float, name: str) -> str:
        # returns the vertex id at (side, arc), splitting an edge if needed
        poly = freeze(v, e, sp)
        for a, vid in poly.side_vertex_arcs(side):
            if abs(a - arc) <= 1e-9 * (1.0 + perim):
                return vid
        acc = 0.0
        for k, (edge, orient) in enumerate(sp[side]):
            ell = e[edge][2]
            if arc <= acc + ell or k == len(sp[side]) - 1:
                local = min(max(arc - acc, 0.0), ell)
                along = local if orient == +1 else ell - local
                u, w, _ = e[edge]
                v.append(name)
                e[edge] = (u, name, along)
                e.append((name, w, ell - along))
                new_seg = [(edge, +1), (len(e) - 1, +1)] if orient == +1 else [(len(e) - 1, -1), (edge, -1)]
                sp[side][k : k + 1] = new_seg
                return name
            acc += ell
        raise AssertionError("unreachable")

    counter = 0
    for _ in range(chords):
        accepted = False
        for _attempt in range(100):
            pos = rng.uniform(0.0, perim, size=2)
            poly = freeze(verts, edges, side_paths)
            g = poly.ambient
            su, au = locate(float(pos[0]))
            sv, av = locate(float(pos[1]))
            pu = poly.point_on_side(su, au)
            pv = poly.point_on_side(sv, av)
            thru = point_distance(g, pu, pv)
            if thru <= delta:
                continue
            lb = 0.0
            for k in range(3):
                a_pt = poly.point_on_side(k, 0.0)
                b_pt = poly.point_on_side(k, lengths[k])
                route = min(
                    point_distance(g, a_pt, pu) + point_distance(g, pv, b_pt),
                    point_distance(g, a_pt, pv) + point_distance(g, pu, b_pt),
                )
                lb = max(lb, lengths[k] - route)
            lo = max(lb, delta)
            if lo >= thru - 1e-12:
                continue
            c = float(rng.uniform(lo, thru))

            cand_v, cand_e = list(verts), list(edges)
            cand_sp = [list(path) for path in side_paths]
            uid = insert(cand_v, cand_e, cand_sp, su, au, f"w{counter}")
            vid = insert(cand_v, cand_e, cand_sp, sv, av, f"w{counter + 1}")
            if uid == vid:
                continue
            cand_e.append((uid, vid, c))
            report = validate(freeze(cand_v, cand_e, cand_sp), samples_per_side=4)
            if not report.valid:
                continue
            verts, edges, side_paths = cand_v, cand_e, cand_sp
            counter += 2
            accepted = True
            break
        if not accepted:
            raise RuntimeError("chord resampling budget exhausted; parameters look infeasible")

    return sample_triangle(freeze(verts, edges, side_paths), m)


# ----------------------------------------------------------------------
# Wire formats
# ----------------------------------------------------------------------
def polygon_to_json(p: MetricPolygon) -> str:
    doc = json.loads(graph_to_json(p.ambient))
    doc["sides"] = [
        {"from": s.start, "to": s.end, "path": [[e, o] for e, o in s.path]} for s in p.sides
    ]
    return json.dumps(doc, indent=2, sort_keys=True)


def polygon_from_json(text: str) -> MetricPolygon:
    doc = json.loads(text)
    g = graph_from_json(json.dumps({"vertices": doc["vertices"], "edges": doc["edges"]}))
    sides = [make_side(g, [(int(e), int(o)) for e, o in s["path"]]) for s in doc["sides"]]
    poly = MetricPolygon(g, sides)
    for s, spec_side in zip(poly.sides, doc["sides"]):
        if s.start != spec_side["from"] or s.end != spec_side["to"]:
            raise ValueError("side endpoints disagree with declared from/to")
    return poly


def triangle_to_csv(t: FiniteMetricTriangle) -> str:
    buf = io.StringIO()
    buf.write(",".join(t.labels) + "\n")
    for row in t.matrix:
        buf.write(",".join(format(x, ".17g") for x in row) + "\n")
    return buf.getvalue()


def triangle_from_csv(text: str) -> FiniteMetricTriangle:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    labels = lines[0].split(",")
    side_index = []
    arcs = []
    for lab in labels:
        s, a = lab.split(":")
        side_index.append(int(s) - 1)
        arcs.append(float(a))
    mat = np.asarray([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    if mat.shape != (len(labels), len(labels)):
        raise ValueError("matrix shape does not match header")
    # group columns by side (stable within a side) to match the flat layout
    order = np.argsort(np.asarray(side_index), kind="stable")
    side_index = [side_index[k] for k in order]
    arcs = [arcs[k] for k in order]
    mat = mat[np.ix_(order, order)]
    side_arcs = [np.asarray([a for s, a in zip(side_index, arcs) if s == j]) for j in range(3)]
    if any(len(a) == 0 for a in side_arcs):
        raise ValueError("every side needs at least one sample")
    lengths = [float(a.max()) for a in side_arcs]
    return FiniteMetricTriangle(side_arcs, lengths, mat, source=None)
