"""Distortion and dimension probes.

line_distortion finds the cheapest monotone embedding of a small point set
into the reals, measured as the least c with d <= |h(x)-h(y)| <= c d; the
search runs over orderings with chain-sum pruning, solving each surviving
ordering exactly as a small rational LP.  map_distortion measures two-sided
bilipschitz constants after optimal rescaling.  The dimension helpers cover
the closed-form similarity dimension of middle-interval constructions and a
box-counting estimate on the generating line positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .dyadic import DyadicMetric
from .errors import InternalCheckError, InvalidParameterError, SizeLimitError
from .numerics import as_fraction, max_ratio, min_ratio
from .simplex import OPTIMAL, solve_lp

MAX_LINE_POINTS = 10


@dataclass(frozen=True)
class DistortionReport:
    """Optimal distortion with its witness.

    `witness_map` lists the embedded positions aligned with the input point
    order; `ordering` is the point sequence realized left to right on the
    line.  Distortion 1 means the witness is a scaled isometry.
    """

    distortion: object
    witness_map: tuple
    ordering: tuple


def _pair_matrix(d: DyadicMetric, points):
    pts = [int(p) for p in points]
    if len(set(pts)) != len(pts):
        raise InvalidParameterError("points must be distinct")
    if any(not 0 <= p < d.n_points for p in pts):
        raise InvalidParameterError("point index out of range")
    k = len(pts)
    mat = [[as_fraction(d.entry(pts[i], pts[j])) if i != j else Fraction(0)
            for j in range(k)] for i in range(k)]
    return pts, mat


def _chain_bound(dist, order) -> Fraction:
    """Lower bound on the stretch of any completion of this prefix order:
    forced gap sums over increasing chains divided by the direct distance."""
    k = len(order)
    if k < 2:
        return Fraction(1)
    lb = {}
    for span in range(1, k):
        for i in range(k - span):
            j = i + span
            best = dist[order[i]][order[j]]
            for t in range(i + 1, j):
                cand = lb[(i, t)] + dist[order[t]][order[j]]
                if cand > best:
                    best = cand
            lb[(i, j)] = best
    bound = Fraction(1)
    for (i, j), v in lb.items():
        ratio = v / dist[order[i]][order[j]]
        if ratio > bound:
            bound = ratio
    return bound


def _greedy_positions(dist, order):
    """Pointwise-minimal positions meeting every lower bound, and their
    stretch.  The stretch is an upper bound on the optimum."""
    k = len(order)
    s = [Fraction(0)]
    for j in range(1, k):
        s.append(max(s[i] + dist[order[i]][order[j]] for i in range(j)))
    stretch = Fraction(1)
    for i in range(k):
        for j in range(i + 1, k):
            ratio = (s[j] - s[i]) / dist[order[i]][order[j]]
            if ratio > stretch:
                stretch = ratio
    return stretch, s


def _positions_for_stretch(dist, order, c):
    """A position vector realizing stretch c, by difference-constraint
    shortest paths (virtual root at 0 to every node)."""
    k = len(order)
    s = [Fraction(0)] * k
    for _ in range(k):
        changed = False
        for i in range(k):
            for j in range(i + 1, k):
                dij = dist[order[i]][order[j]]
                if s[j] > s[i] + c * dij:       # s_j - s_i <= c d_ij
                    s[j] = s[i] + c * dij
                    changed = True
                if s[i] > s[j] - dij:           # s_j - s_i >= d_ij
                    s[i] = s[j] - dij
                    changed = True
        if not changed:
            break
    else:
        raise InternalCheckError("stretch certificate is infeasible")
    base = s[0]
    return [v - base for v in s]


def _order_min_stretch(dist, order):
    """Exact minimum c for a fixed left-to-right order, with positions.

    The pointwise-minimal (greedy) positions give an upper bound; forced
    chain sums give a lower bound.  When the two agree the value is exact
    without any LP, which covers line-isometric inputs.  Otherwise the gap
    LP (minimize c with d_ij <= gap sums <= c d_ij, gaps >= 0) is solved
    through its dual, which needs no phase-1 artificials, and positions are
    recovered from the exact optimal c.
    """
    upper, greedy = _greedy_positions(dist, order)
    lower = _chain_bound(dist, order)
    if upper == lower:
        return upper, greedy

    k = len(order)
    n_gaps = k - 1
    nvars = n_gaps + 1  # gaps then c
    A, b = [], []
    for i in range(k):
        for j in range(i + 1, k):
            dij = dist[order[i]][order[j]]
            low = [Fraction(0)] * nvars
            up = [Fraction(0)] * nvars
            for t in range(i, j):
                low[t] = Fraction(-1)
                up[t] = Fraction(1)
            up[n_gaps] = -dij
            A.append(low)
            b.append(-dij)
            A.append(up)
            b.append(Fraction(0))
    c_vec = [Fraction(0)] * n_gaps + [Fraction(1)]
    # dual: min b.z subject to -A^T z <= c, z >= 0; primal value = -dual value
    AT = [[-A[r][v] for r in range(len(A))] for v in range(nvars)]
    status, _, dual_value = solve_lp(b, AT, c_vec)
    if status != OPTIMAL:
        raise InternalCheckError(f"embedding LP unexpectedly {status}")
    value = -dual_value
    if not lower <= value <= upper:
        raise InternalCheckError("embedding LP value escaped its sandwich")
    return value, _positions_for_stretch(dist, order, value)


def line_distortion(points, d: DyadicMetric) -> DistortionReport:
    """Least two-sided stretch of an embedding of the points into the line.

    Exhausts orderings (up to reversal) with chain-sum pruning, seeded by a
    farthest-pair heuristic so isometric point sets finish after one LP.
    Point sets larger than 10 are rejected: the search is factorial.
    """
    pts, dist = _pair_matrix(d, points)
    k = len(pts)
    if k < 2:
        raise InvalidParameterError("need at least two points")
    if k > MAX_LINE_POINTS:
        raise SizeLimitError(f"line embedding search is limited to "
                             f"{MAX_LINE_POINTS} points")

    far = max(combinations(range(k), 2), key=lambda ij: dist[ij[0]][ij[1]])
    heuristic = sorted(range(k), key=lambda t: (dist[far[0]][t], t))
    best_c, best_pos = _order_min_stretch(dist, heuristic)
    best_order = list(heuristic)

    def search(prefix, remaining):
        nonlocal best_c, best_pos, best_order
        if _chain_bound(dist, prefix) >= best_c:
            return
        if not remaining:
            if prefix[0] > prefix[-1]:
                return  # the reversal is evaluated elsewhere
            c, pos = _order_min_stretch(dist, prefix)
            if c < best_c:
                best_c, best_pos, best_order = c, pos, list(prefix)
            return
        for t in sorted(remaining):
            search(prefix + [t], remaining - {t})

    for start in range(k):
        search([start], set(range(k)) - {start})

    witness = [None] * k
    for slot, t in enumerate(best_order):
        witness[t] = best_pos[slot]
    if not d.rational:
        best_c = float(best_c)
        witness = [float(w) for w in witness]
    return DistortionReport(distortion=best_c, witness_map=tuple(witness),
                            ordering=tuple(pts[t] for t in best_order))


def map_distortion(d1: DyadicMetric, d2: DyadicMetric, bijection=None):
    """Two-sided constant of a point bijection after optimal rescaling.

    With R and r the largest and smallest ratio d2(h(x), h(y))/d1(x, y), the
    best single constant achievable by rescaling is sqrt(R/r).  Proportional
    spaces (R = r) report exactly 1.
    """
    if d1.n_points != d2.n_points:
        raise InvalidParameterError("point counts differ")
    n = d1.n_points
    if bijection is None:
        h = np.arange(n, dtype=np.int64)
    else:
        h = np.asarray([int(v) for v in bijection], dtype=np.int64)
        if sorted(h.tolist()) != list(range(n)):
            raise InvalidParameterError("bijection must be a permutation")
    mask = np.triu(np.ones((n, n), dtype=bool), 1)
    if d1.rational and d2.rational:
        num2 = d2.data.num[np.ix_(h, h)]
        R = max_ratio(num2, d2.data.den, d1.data.num, d1.data.den, mask)
        r = min_ratio(num2, d2.data.den, d1.data.num, d1.data.den, mask)
        if R == r:
            return Fraction(1)
        return math.sqrt(R / r)
    a = d1.as_float()
    b = d2.as_float()[np.ix_(h, h)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(mask, b / a, np.nan)
    R, r = np.nanmax(ratios), np.nanmin(ratios)
    if R == r:
        return 1.0
    return float(math.sqrt(R / r))


def dim_formula(lam) -> float:
    """Similarity dimension of the middle-lam construction: log 2 over
    log(2/(1-lam))."""
    lam = as_fraction(lam)
    if not 0 < lam < 1:
        raise InvalidParameterError("lam must lie strictly between 0 and 1")
    return math.log(2.0) / math.log(2.0 / (1.0 - float(lam)))


def box_dim_estimate(d: DyadicMetric, scales) -> float:
    """Box-counting slope of the metric's generating line positions.

    Counts occupied grid boxes of each scale s and fits log N(s) against
    log(1/s) by least squares.  Requires a line-realizable metric (one built
    from interval constructions) and at least three scales.
    """
    if d.line_points is None:
        raise InvalidParameterError(
            "metric carries no line realization; box counting needs one")
    scales = list(scales)
    if len(scales) < 3:
        raise InvalidParameterError("need at least three scales")
    counts = []
    for s in scales:
        if d.rational:
            sq = as_fraction(s)
            if sq <= 0:
                raise InvalidParameterError("scales must be positive")
            boxes = {int(p / sq) for p in d.line_points}
        else:
            sf = float(s)
            if sf <= 0:
                raise InvalidParameterError("scales must be positive")
            boxes = {int(float(p) / sf) for p in d.line_points}
        counts.append(len(boxes))
    xs = np.log(1.0 / np.array([float(s) for s in scales]))
    ys = np.log(np.array(counts, dtype=np.float64))
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


def construction_scales(d: DyadicMetric, levels):
    """Interval lengths of the generator at the given levels; natural scales
    for box counting a middle-interval metric."""
    ratios = d.meta.get("ratios")
    if ratios is None:
        raise InvalidParameterError("metric has no interval construction data")
    lengths = []
    cur = Fraction(1)
    for r in ratios:
        cur *= as_fraction(r)
        lengths.append(cur)
    out = []
    for lv in levels:
        if not 1 <= lv <= len(lengths):
            raise InvalidParameterError("level out of range")
        out.append(lengths[lv - 1])
    return out


def default_box_levels(depth: int):
    """Construction levels whose interval lengths make good box scales."""
    levels = list(range(2, min(depth - 2, 8)))
    if len(levels) < 3:
        levels = list(range(1, depth))
    if len(levels) < 3:
        raise InvalidParameterError("depth too small for box counting")
    return levels


def fat_measure(removal_fractions, depth: int):
    """Total interval length remaining after `depth` removal rounds.

    Missing fractions beyond the list's length count as removing nothing, so
    an empty list yields 1 at any depth.
    """
    if depth < 0:
        raise InvalidParameterError("depth must be nonnegative")
    fracs = [as_fraction(v) for v in removal_fractions]
    if any(not 0 < v < 1 for v in fracs):
        raise InvalidParameterError("removal fractions must lie in (0, 1)")
    out = Fraction(1)
    for v in fracs[:depth]:
        out *= 1 - v
    return out
