"""Independent brute-force reference implementations used only by tests.

Everything here deliberately avoids the library's vectorized code paths:
plain Python loops, exhaustive enumeration, or a different closure algorithm,
so that agreement is meaningful.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np


def brute_cylinder_minmax(d, level):
    """Per-cylinder-pair min/max cross distances by scanning every pair."""
    blocks = 1 << level
    size = d.n_points >> level
    inf = [[None] * blocks for _ in range(blocks)]
    sup = [[None] * blocks for _ in range(blocks)]
    for i in range(d.n_points):
        for j in range(d.n_points):
            a, b = i // size, j // size
            v = d.entry(i, j)
            if inf[a][b] is None or v < inf[a][b]:
                inf[a][b] = v
            if sup[a][b] is None or v > sup[a][b]:
                sup[a][b] = v
    return inf, sup


def brute_spread(d, level):
    """Max over distinct cylinder pairs of sup/inf, by full pair scan."""
    inf, sup = brute_cylinder_minmax(d, level)
    blocks = 1 << level
    best = None
    for a in range(blocks):
        for b in range(blocks):
            if a == b:
                continue
            ratio = sup[a][b] / inf[a][b]
            if best is None or ratio > best:
                best = ratio
    return best


def scatter_spread_float(dist, depth, level):
    """Spread of a float matrix via scatter-accumulation over all pairs."""
    n = 1 << depth
    blk = np.arange(n) >> (depth - level)
    B = 1 << level
    inf = np.full((B, B), np.inf)
    sup = np.full((B, B), -np.inf)
    ia = np.repeat(blk, n)
    ib = np.tile(blk, n)
    np.minimum.at(inf, (ia, ib), dist.ravel())
    np.maximum.at(sup, (ia, ib), dist.ravel())
    mask = ~np.eye(B, dtype=bool)
    return float((sup[mask] / inf[mask]).max())


def brute_lip(f, d, subset=None):
    idx = list(range(d.n_points)) if subset is None else sorted(subset)
    best = None
    for i, j in combinations(idx, 2):
        r = abs(f.values[i] - f.values[j]) / d.entry(i, j)
        if best is None or r > best:
            best = r
    return best if best is not None else 0


def minimax_closure(mat):
    """All-pairs minimax edge values by repeated max-relaxation; independent
    of the spanning-tree method used in the library."""
    n = mat.shape[0]
    out = np.array(mat, dtype=object)
    for k in range(n):
        through = np.maximum.outer(out[:, k], out[k, :])
        out = np.minimum(out, through)
    return out


def enumerate_transport(weights, dist):
    """Exact min transport cost by enumerating forest-supported plans.

    Extreme plans of the transportation polytope are supported on forests;
    flows on a forest are forced by leaf stripping.  Only practical for a
    handful of support points.
    """
    pos = [(i, w) for i, w in weights.items() if w > 0]
    neg = [(j, -w) for j, w in weights.items() if w < 0]
    if not pos:
        return Fraction(0)
    edges = [(i, j) for i in range(len(pos)) for j in range(len(neg))]
    best = None
    for size in range(max(len(pos), len(neg)), len(pos) + len(neg)):
        for subset in combinations(edges, size):
            flows = _solve_forest(subset, pos, neg)
            if flows is None:
                continue
            cost = sum(f * dist[pos[i][0]][neg[j][0]]
                       for (i, j), f in flows.items())
            if best is None or cost < best:
                best = cost
    return best


def _solve_forest(edge_set, pos, neg):
    deg = {}
    for i, j in edge_set:
        deg[("p", i)] = deg.get(("p", i), 0) + 1
        deg[("n", j)] = deg.get(("n", j), 0) + 1
    for i in range(len(pos)):
        if ("p", i) not in deg:
            return None
    for j in range(len(neg)):
        if ("n", j) not in deg:
            return None
    residual = {("p", i): w for i, w in enumerate(w for _, w in pos)}
    residual.update({("n", j): w for j, w in enumerate(w for _, w in neg)})
    remaining = set(edge_set)
    flows = {}
    while remaining:
        leaf_edge = None
        for e in remaining:
            pnode, nnode = ("p", e[0]), ("n", e[1])
            if deg[pnode] == 1 or deg[nnode] == 1:
                leaf_edge = e
                break
        if leaf_edge is None:
            return None  # a cycle: not a forest
        i, j = leaf_edge
        pnode, nnode = ("p", i), ("n", j)
        if deg[pnode] == 1:
            f = residual[pnode]
        else:
            f = residual[nnode]
        if f < 0:
            return None
        flows[leaf_edge] = f
        residual[pnode] -= f
        residual[nnode] -= f
        deg[pnode] -= 1
        deg[nnode] -= 1
        remaining.discard(leaf_edge)
    if any(v != 0 for v in residual.values()):
        return None
    return flows
