"""Distortion measurement, five-case certification, and four-point lower bounds.

The distortion of an embedding is lip = L0 * L1 with L1 the worst expansion
ratio and L0 the worst contraction factor over sampled pairs.  For the
tripodal embedding, every pair of points falls into one of five cases by
half-side membership, each with a certified interval for the squared ratio
||F(x)-F(y)||^2 / d(x,y)^2:

    cases 1-2 (same side):                [3/4, 3]
    case 3 (adjacent halves at a vertex): [3/16, 4]
    cases 4-5 (the remaining positions):  [3/16, 7]

Checking every sampled pair against its case interval is a strictly
stronger, localized form of the global bound 4*sqrt(7/3).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .tripodal import gromov_products

__all__ = [
    "DistortionReport",
    "CaseLabel",
    "CaseCheck",
    "CertificationSummary",
    "TRIPODAL_BOUND",
    "CASE_INTERVALS",
    "distortion_of_map",
    "classify_pair",
    "case_bound_check",
    "certify_cases",
    "four_point_lower_bound",
    "best_four_point_bound",
]

TRIPODAL_BOUND = 4.0 * math.sqrt(7.0 / 3.0)

CASE_INTERVALS: Dict[int, Tuple[float, float]] = {
    1: (0.75, 3.0),
    2: (0.75, 3.0),
    3: (3.0 / 16.0, 4.0),
    4: (3.0 / 16.0, 7.0),
    5: (3.0 / 16.0, 7.0),
}

# side j runs from vertex _START[j] to _END[j] (0=p, 1=q, 2=r);
# two distinct sides of a triangle share exactly one vertex
_START = (0, 1, 2)
_END = (1, 2, 0)
_SHARED = {(0, 1): 1, (1, 0): 1, (1, 2): 2, (2, 1): 2, (0, 2): 0, (2, 0): 0}


@dataclass
class DistortionReport:
    L1: float
    L0: float
    lip: float
    argmax_expand: Tuple[int, int]
    argmax_contract: Tuple[int, int]
    grid_step: float

    def to_dict(self) -> dict:
        return {
            "L1": self.L1,
            "L0": self.L0,
            "lip": self.lip,
            "argmaxExpand": list(self.argmax_expand),
            "argmaxContract": list(self.argmax_contract),
            "gridStep": self.grid_step,
        }


def distortion_of_map(space, images: np.ndarray) -> DistortionReport:
    """Exhaustive pairwise scan of expansion and contraction ratios.

    ``space`` supplies exact distances in row blocks; pairs at distance zero
    (duplicate sample points) are skipped unless their images differ, which
    signals an invalid sampling.  Ties are broken by the lowest pair index.
    """
    imgs = np.asarray(images, dtype=float)
    n = space.n
    if n < 2:
        raise ValueError("need at least two samples")
    if imgs.shape != (n, 2):
        raise ValueError(f"expected {n} planar images, got shape {imgs.shape}")
    scale = 1.0 + float(np.abs(imgs).max(initial=0.0))

    L1 = -math.inf
    L0 = -math.inf
    arg1 = (0, 0)
    arg0 = (0, 0)
    for lo in range(0, n, 512):
        hi = min(lo + 512, n)
        D = np.asarray(space.distance_block(lo, hi), dtype=float)
        E = np.sqrt(((imgs[lo:hi, None, :] - imgs[None, :, :]) ** 2).sum(-1))
        cols = np.arange(n)[None, :]
        rows = np.arange(lo, hi)[:, None]
        upper = cols > rows
        dup = upper & (D == 0.0)
        if np.any(dup & (E > 1e-12 * scale)):
            i, j = np.argwhere(dup & (E > 1e-12 * scale))[0]
            raise ValueError(f"samples {lo + int(i)} and {int(j)} coincide but their images differ")
        ok = upper & (D > 0.0)
        if not ok.any():
            continue
        expand = np.where(ok, E / np.where(D > 0, D, 1.0), -math.inf)
        with np.errstate(divide="ignore"):
            contract = np.where(ok, np.where(E > 0, D / np.where(E > 0, E, 1.0), math.inf), -math.inf)
        k = int(np.argmax(expand))
        if expand.flat[k] > L1:
            L1 = float(expand.flat[k])
            arg1 = (lo + k // n, k % n)
        k = int(np.argmax(contract))
        if contract.flat[k] > L0:
            L0 = float(contract.flat[k])
            arg0 = (lo + k // n, k % n)
    if not math.isfinite(L1):
        if L1 < 0:
            raise ValueError("no pair of samples at positive distance")
    return DistortionReport(
        L1=L1,
        L0=L0,
        lip=L0 * L1,
        argmax_expand=arg1,
        argmax_contract=arg0,
        grid_step=float(getattr(space, "grid_step", 0.0)),
    )


# ----------------------------------------------------------------------
# Five-case classification
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CaseLabel:
    """Case index plus the half-side memberships that realize it.

    Each membership is (side, vertex) with vertex in {0,1,2} naming whose
    half the point was counted in.  A point exactly at a half-side split
    belongs to both halves; the classification then picks the case with the
    widest admissible interval so certification never fails on boundaries.
    """

    case: int
    halves: Tuple[Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class CaseCheck:
    passed: bool
    squared_ratio: float
    lo: float
    hi: float
    margin: float


def _near_flags(t) -> Tuple[np.ndarray, np.ndarray]:
    legs = np.asarray(gromov_products(t).as_tuple())
    side = np.asarray(t.side_index)
    arc = np.asarray(t.arc)
    la = legs[np.asarray(_START)[side]]
    lengths = np.asarray([legs[_START[j]] + legs[_END[j]] for j in range(3)])
    tol = 1e-9 * (1.0 + lengths[side])
    near_a = arc <= la + tol
    near_b = arc >= la - tol
    return near_a, near_b


def classify_pair(t, i: int, j: int) -> CaseLabel:
    """Assign the unordered sample pair (i, j) to one of the five cases."""
    near_a, near_b = _near_flags(t)
    si, sj = int(t.side_index[i]), int(t.side_index[j])
    if si == sj:
        if near_a[i] and near_a[j]:
            return CaseLabel(1, ((si, _START[si]), (sj, _START[sj])))
        if near_b[i] and near_b[j]:
            return CaseLabel(1, ((si, _END[si]), (sj, _END[sj])))
        if near_a[i]:
            return CaseLabel(2, ((si, _START[si]), (sj, _END[sj])))
        return CaseLabel(2, ((si, _END[si]), (sj, _START[sj])))

    w = _SHARED[(si, sj)]

    def memberships(k: int, s: int) -> List[int]:
        out = []
        if near_a[k]:
            out.append(_START[s])
        if near_b[k]:
            out.append(_END[s])
        return out

    mi = memberships(i, si)
    mj = memberships(j, sj)
    # widest interval first: cases 5 and 4 share [3/16, 7], then case 3
    for vi in mi:
        for vj in mj:
            if vi != w and vj != w:
                return CaseLabel(5, ((si, vi), (sj, vj)))
    for vi in mi:
        for vj in mj:
            if (vi == w) != (vj == w):
                return CaseLabel(4, ((si, vi), (sj, vj)))
    return CaseLabel(3, ((si, w), (sj, w)))


def case_bound_check(label: CaseLabel, d: float, image_dist: float, tol: float = 1e-9) -> CaseCheck:
    """Check a pair's squared ratio against its case interval."""
    if d <= 0:
        raise ValueError("case bounds apply to pairs at positive distance")
    lo, hi = CASE_INTERVALS[label.case]
    sq = (image_dist / d) ** 2
    margin = min(sq - lo, hi - sq)
    return CaseCheck(passed=margin >= -tol, squared_ratio=sq, lo=lo, hi=hi, margin=margin)


@dataclass
class CertificationSummary:
    all_pass: bool
    pairs_checked: int
    case_counts: Dict[int, int]
    min_margin: float
    worst_pair: Tuple[int, int]
    worst_case: int
    failures: List[Tuple[int, int, int, float]] = field(default_factory=list)


def certify_cases(t, images: np.ndarray, tol: float = 1e-9) -> CertificationSummary:
    """Classify and bound-check every sampled pair at positive distance.

    This is the localized certificate behind the global tripodal bound:
    when it passes, no pair distorts beyond its case interval.
    """
    imgs = np.asarray(images, dtype=float)
    n = t.n
    D = t.distance_matrix()
    E = np.sqrt(((imgs[:, None, :] - imgs[None, :, :]) ** 2).sum(-1))
    near_a, near_b = _near_flags(t)
    side = np.asarray(t.side_index)
    start = np.asarray(_START)[side]
    end = np.asarray(_END)[side]

    shared = np.empty((3, 3), dtype=np.int64)
    for (a, b), wv in _SHARED.items():
        shared[a, b] = wv
    np.fill_diagonal(shared, -1)

    si = side[:, None]
    sj = side[None, :]
    same = si == sj
    common_half = (near_a[:, None] & near_a[None, :]) | (near_b[:, None] & near_b[None, :])
    case_same = np.where(common_half, 1, 2)

    w = shared[si, sj]
    cx_w = ((start[:, None] == w) & near_a[:, None]) | ((end[:, None] == w) & near_b[:, None])
    cx_o = ((start[:, None] != w) & near_a[:, None]) | ((end[:, None] != w) & near_b[:, None])
    cy_w = ((start[None, :] == w) & near_a[None, :]) | ((end[None, :] == w) & near_b[None, :])
    cy_o = ((start[None, :] != w) & near_a[None, :]) | ((end[None, :] != w) & near_b[None, :])
    case_diff = np.where(cx_o & cy_o, 5, np.where((cx_w & cy_o) | (cx_o & cy_w), 4, 3))

    case = np.where(same, case_same, case_diff)
    lo_b = np.asarray([0.0] + [CASE_INTERVALS[c][0] for c in (1, 2, 3, 4, 5)])[case]
    hi_b = np.asarray([0.0] + [CASE_INTERVALS[c][1] for c in (1, 2, 3, 4, 5)])[case]

    iu, ju = np.triu_indices(n, 1)
    pos = D[iu, ju] > 0
    iu, ju = iu[pos], ju[pos]
    sq = (E[iu, ju] / D[iu, ju]) ** 2
    margins = np.minimum(sq - lo_b[iu, ju], hi_b[iu, ju] - sq)
    cases = case[iu, ju]

    counts = {c: int((cases == c).sum()) for c in (1, 2, 3, 4, 5)}
    k = int(np.argmin(margins)) if len(margins) else 0
    failures = [
        (int(iu[z]), int(ju[z]), int(cases[z]), float(sq[z]))
        for z in np.flatnonzero(margins < -tol)
    ]
    return CertificationSummary(
        all_pass=len(failures) == 0,
        pairs_checked=int(len(margins)),
        case_counts=counts,
        min_margin=float(margins[k]) if len(margins) else math.inf,
        worst_pair=(int(iu[k]), int(ju[k])) if len(margins) else (0, 0),
        worst_case=int(cases[k]) if len(margins) else 0,
        failures=failures,
    )


# ----------------------------------------------------------------------
# Four-point (Euler quadrilateral) lower bound
# ----------------------------------------------------------------------
def four_point_lower_bound(
    d12: float, d23: float, d34: float, d41: float, d13: float, d24: float
) -> float:
    """Lower bound on the distortion of any planar embedding of 4 points.

    Planar images of a 1-Lipschitz map satisfy Euler's quadrilateral
    inequality: the diagonal squares are at most the side squares, so some
    diagonal contracts by at least sqrt((d13^2+d24^2)/sum of side squares).
    Returns 1 when the expression does not exceed 1.
    """
    ds = {"12": d12, "23": d23, "34": d34, "41": d41, "13": d13, "24": d24}
    for k, v in ds.items():
        if v < 0:
            raise ValueError(f"negative distance d{k}")
    full = {
        (1, 2): d12, (2, 3): d23, (3, 4): d34, (1, 4): d41, (1, 3): d13, (2, 4): d24,
    }

    def dist(a, b):
        return full[(a, b)] if (a, b) in full else full[(b, a)]

    for a, b, c in itertools.permutations((1, 2, 3, 4), 3):
        if dist(a, c) > dist(a, b) + dist(b, c) + 1e-9:
            raise ValueError(f"triangle inequality fails on points {a},{b},{c}")
    num = d13 * d13 + d24 * d24
    den = d12 * d12 + d23 * d23 + d34 * d34 + d41 * d41
    if den == 0:
        return 1.0
    val = math.sqrt(num / den)
    return val if val > 1.0 else 1.0


def best_four_point_bound(
    space,
    seed: int = 0,
    max_quadruples: int = 2_000_000,
    sample_quadruples: int = 100_000,
) -> Tuple[float, Tuple[int, int, int, int]]:
    """Maximize the four-point bound over sampled quadruples.

    Exhaustive when the quadruple count fits the budget, otherwise a seeded
    uniform subsample of at least ``sample_quadruples`` quadruples.  All
    three diagonal pairings of each quadruple are tried; the witness is
    returned in cycle order (its last two index pairs are the diagonals).
    Quadruples containing duplicate sample points are skipped.
    """
    n = space.n
    if n < 4:
        raise ValueError("need at least 4 samples")
    D = space.distance_matrix()
    total = math.comb(n, 4)
    if total <= max_quadruples:
        quads = np.fromiter(
            itertools.chain.from_iterable(itertools.combinations(range(n), 4)),
            dtype=np.int64,
        ).reshape(-1, 4)
    else:
        rng = np.random.default_rng(seed)
        draws = rng.integers(0, n, size=(int(sample_quadruples * 1.3), 4))
        keep = (
            (draws[:, 0] < draws[:, 1])
            & (draws[:, 1] < draws[:, 2])
            & (draws[:, 2] < draws[:, 3])
        )
        quads = draws[keep][:sample_quadruples]
        if len(quads) < sample_quadruples // 2:
            raise RuntimeError("quadruple subsampling starved; raise the draw budget")

    a, b, c, d = (quads[:, k] for k in range(4))
    dab, dac, dad = D[a, b], D[a, c], D[a, d]
    dbc, dbd, dcd = D[b, c], D[b, d], D[c, d]
    nz = (dab > 0) & (dac > 0) & (dad > 0) & (dbc > 0) & (dbd > 0) & (dcd > 0)

    # three cyclic orders: (a,b,c,d), (a,b,d,c), (a,c,b,d)
    sq_bounds = np.empty((len(quads), 3))
    sq_bounds[:, 0] = (dac**2 + dbd**2) / (dab**2 + dbc**2 + dcd**2 + dad**2)
    sq_bounds[:, 1] = (dad**2 + dbc**2) / (dab**2 + dbd**2 + dcd**2 + dac**2)
    sq_bounds[:, 2] = (dab**2 + dcd**2) / (dac**2 + dbc**2 + dbd**2 + dad**2)
    sq_bounds[~nz] = -math.inf

    flat = int(np.argmax(sq_bounds))
    row, pairing = flat // 3, flat % 3
    best = float(math.sqrt(max(sq_bounds[row, pairing], 1.0)))
    qa, qb, qc, qd = (int(x) for x in quads[row])
    cycles = {0: (qa, qb, qc, qd), 1: (qa, qb, qd, qc), 2: (qa, qc, qb, qd)}
    return best, cycles[pairing]
