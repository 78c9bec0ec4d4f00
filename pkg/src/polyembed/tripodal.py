"""Comparison tripods and the tripodal embedding of metric triangles.

A metric triangle with side lengths (L1, L2, L3) determines a tripod whose
leg lengths are the Gromov products at the three vertices.  Each side maps
onto the two legs at its endpoints by arc length; the tripod embeds in the
plane along three rays at mutual angle 2*pi/3; and the tripodal embedding
displaces each point by its distance to the union of the other two sides,
in a direction bisecting the two rays of its side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .polygon import FiniteMetricTriangle, SampledPolygon

__all__ = [
    "GromovProducts",
    "Tripod",
    "TripodPoint",
    "gromov_products",
    "comparison_tripod",
    "project_to_tripod",
    "embed_tripod",
    "dist_to_opposite",
    "opposite_distances",
    "tripodal_embed",
    "tripodal_images",
    "LEG_DIRECTIONS",
    "DISPLACEMENT_DIRECTIONS",
]

TriangleLike = Union[FiniteMetricTriangle, SampledPolygon]

# unit rays of the embedded tripod (legs of p, q, r)
LEG_DIRECTIONS = np.array([
    [1.0, 0.0],
    [-0.5, math.sqrt(3.0) / 2.0],
    [-0.5, -math.sqrt(3.0) / 2.0],
])
# displacement direction for points of side j; bisects the side's two rays
DISPLACEMENT_DIRECTIONS = np.array([
    [0.5, math.sqrt(3.0) / 2.0],
    [-1.0, 0.0],
    [0.5, -math.sqrt(3.0) / 2.0],
])

# side j runs from vertex _SIDE_START[j] to _SIDE_END[j] (0=p, 1=q, 2=r)
_SIDE_START = (0, 1, 2)
_SIDE_END = (1, 2, 0)


@dataclass(frozen=True)
class GromovProducts:
    """Leg lengths of the comparison tripod: l1 at p, l2 at q, l3 at r."""

    l1: float
    l2: float
    l3: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)


@dataclass(frozen=True)
class Tripod:
    legs: Tuple[float, float, float]


@dataclass(frozen=True)
class TripodPoint:
    """A point of a tripod: radius 0 on any leg is the center."""

    leg: int
    radius: float


def _side_lengths(t: TriangleLike) -> Tuple[float, float, float]:
    if isinstance(t, SampledPolygon):
        if t.polygon.n_sides != 3:
            raise ValueError("tripodal embedding needs a metric triangle")
        return tuple(s.length for s in t.polygon.sides)
    return t.side_lengths


def gromov_products(t: TriangleLike) -> GromovProducts:
    """The three Gromov products, from the side lengths.

    Side isometry makes each side length equal the distance between its
    endpoint vertices, so the products follow from the linear identities
    l1+l2 = d(p,q), l2+l3 = d(q,r), l3+l1 = d(r,p).
    """
    e1, e2, e3 = _side_lengths(t)
    l1 = 0.5 * (e1 + e3 - e2)
    l2 = 0.5 * (e1 + e2 - e3)
    l3 = 0.5 * (e2 + e3 - e1)
    worst = min(l1, l2, l3)
    if worst < -1e-12:
        raise ValueError(f"negative Gromov product {worst}: not a metric triangle")
    return GromovProducts(max(l1, 0.0), max(l2, 0.0), max(l3, 0.0))


def comparison_tripod(t: TriangleLike) -> Tripod:
    return Tripod(legs=gromov_products(t).as_tuple())


def project_to_tripod(t: TriangleLike, side: int, arc: float) -> TripodPoint:
    """Map a point given by (side, arc) onto the comparison tripod.

    The side from vertex A to vertex B covers A's leg tip-to-center over
    arc in [0, leg(A)] and then B's leg center-to-tip.
    """
    legs = gromov_products(t).as_tuple()
    lengths = _side_lengths(t)
    if not (-1e-9 <= arc <= lengths[side] + 1e-9):
        raise ValueError(f"arc {arc} outside side {side}")
    leg_a = _SIDE_START[side]
    leg_b = _SIDE_END[side]
    la = legs[leg_a]
    if arc <= la:
        return TripodPoint(leg=leg_a, radius=la - arc)
    return TripodPoint(leg=leg_b, radius=min(arc - la, legs[leg_b]))


def embed_tripod(tp: TripodPoint, tripod: Tripod) -> np.ndarray:
    """Planar image of a tripod point: leg i at radius r maps to r*ray[i]."""
    if tp.radius < -1e-12 or tp.radius > tripod.legs[tp.leg] + 1e-9:
        raise ValueError(f"radius {tp.radius} exceeds leg {tp.leg} of length {tripod.legs[tp.leg]}")
    return max(tp.radius, 0.0) * LEG_DIRECTIONS[tp.leg]


def opposite_distances(t: TriangleLike) -> np.ndarray:
    """dist(x, union of the other two sides) for every sample.

    Graph-backed spaces are exact: paths enter an edge through an endpoint,
    so the distance to a side's point set is a minimum over the vertices on
    it, except that points lying on a shared edge are at distance 0.
    Matrix-backed triangles fall back to the sampled minimum; the grid step
    of the sample bounds the discretization error.
    """
    sp = t if isinstance(t, SampledPolygon) else t.source
    if sp is not None:
        poly = sp.polygon
        g = poly.ambient
        edge_sets = poly.side_edge_sets()
        out = np.empty(sp.n)
        vtx_arcs = [poly.side_vertex_arcs(j) for j in range(3)]
        for j in range(3):
            rows = np.flatnonzero(sp.side_index == j)
            if len(rows) == 0:
                continue
            opp_edges = frozenset().union(*(edge_sets[k] for k in range(3) if k != j))
            opp_vids = sorted({vid for k in range(3) if k != j for _, vid in vtx_arcs[k]})
            opp_idx = np.asarray([g.vertex_index(v) for v in opp_vids])
            lo, hi = int(rows[0]), int(rows[-1]) + 1
            dv = sp.vertex_distance_block(lo, hi)[:, opp_idx].min(axis=1)
            on_opp = np.asarray([e in opp_edges for e in sp.edge_of[lo:hi]])
            out[lo:hi] = np.where(on_opp, 0.0, dv)
        return out

    # matrix-backed: nearest sampled point of the other two sides
    mat = t.matrix
    out = np.empty(t.n)
    for j in range(3):
        rows = t.side_index == j
        cols = ~rows
        out[rows] = mat[np.ix_(rows, cols)].min(axis=1)
    return out


def dist_to_opposite(t: TriangleLike, index: int) -> float:
    """Distance from sample ``index`` to the union of the other two sides."""
    return float(opposite_distances(t)[index])


def tripodal_images(t: TriangleLike) -> np.ndarray:
    """Tripodal embedding of every sample, shape (n, 2).

    F(x) = xbar + dist(x, opposite sides) * v_j for x on side j, where xbar
    is the embedded comparison-tripod image of x.  At a polygon vertex the
    displacement vanishes, so the carrier side is immaterial.
    """
    legs = np.asarray(gromov_products(t).as_tuple())
    side = np.asarray(t.side_index)
    arc = np.asarray(t.arc)
    leg_a = np.asarray(_SIDE_START)[side]
    leg_b = np.asarray(_SIDE_END)[side]
    la = legs[leg_a]
    on_first = arc <= la
    leg = np.where(on_first, leg_a, leg_b)
    radius = np.where(on_first, la - arc, arc - la)
    radius = np.clip(radius, 0.0, legs[leg])
    bar = radius[:, None] * LEG_DIRECTIONS[leg]
    disp = opposite_distances(t)
    return bar + disp[:, None] * DISPLACEMENT_DIRECTIONS[side]


def tripodal_embed(t: TriangleLike, index: int) -> np.ndarray:
    """Tripodal image of a single sample (see :func:`tripodal_images`)."""
    tp = project_to_tripod(t, int(t.side_index[index]), float(t.arc[index]))
    bar = embed_tripod(tp, comparison_tripod(t))
    disp = dist_to_opposite(t, index)
    return bar + disp * DISPLACEMENT_DIRECTIONS[int(t.side_index[index])]
