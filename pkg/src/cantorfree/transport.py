"""Exact minimum-cost transportation between weighted point sets.

Successive shortest augmenting paths on the bipartite supply/demand graph;
all arithmetic follows the inputs (Fractions stay exact, floats stay floats).
The solver also exposes the final node prices, from which a globally
1-Lipschitz dual potential is assembled by taking lower envelopes of shifted
distance cones over the demand points.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalCheckError, InvalidParameterError


@dataclass
class _Edge:
    dst: int
    cap: object
    cost: object
    flow: object


class _FlowGraph:
    def __init__(self, n_nodes, zero):
        self.adj = [[] for _ in range(n_nodes)]
        self.edges = []
        self.zero = zero

    def add(self, src, dst, cap, cost):
        self.adj[src].append(len(self.edges))
        self.edges.append(_Edge(dst, cap, cost, self.zero))
        self.adj[dst].append(len(self.edges))
        self.edges.append(_Edge(src, self.zero, -cost, self.zero))

    def residual(self, eid):
        return self.edges[eid].cap - self.edges[eid].flow

    def shortest_path(self, src, dst):
        """Bellman-Ford over residual arcs; returns edge list or None."""
        n = len(self.adj)
        dist = [None] * n
        dist[src] = self.zero
        pred = [None] * n
        for _ in range(n - 1):
            changed = False
            for u in range(n):
                if dist[u] is None:
                    continue
                for eid in self.adj[u]:
                    e = self.edges[eid]
                    if e.cap - e.flow <= 0:
                        continue
                    nd = dist[u] + e.cost
                    if dist[e.dst] is None or nd < dist[e.dst]:
                        dist[e.dst] = nd
                        pred[e.dst] = (u, eid)
                        changed = True
            if not changed:
                break
        if dist[dst] is None:
            return None
        path, cur = [], dst
        while cur != src:
            u, eid = pred[cur]
            path.append(eid)
            cur = u
        path.reverse()
        return path

    def node_prices(self):
        """Feasible potentials of the optimal residual graph.

        Bellman-Ford from a virtual root tied to every node with zero cost;
        well-defined because an optimal residual graph has no negative cycle.
        """
        n = len(self.adj)
        phi = [self.zero] * n
        for _ in range(n):
            changed = False
            for u in range(n):
                for eid in self.adj[u]:
                    e = self.edges[eid]
                    if e.cap - e.flow <= 0:
                        continue
                    nd = phi[u] + e.cost
                    if nd < phi[e.dst]:
                        phi[e.dst] = nd
                        changed = True
            if not changed:
                return phi
        raise InternalCheckError("negative cycle in optimal residual graph")


@dataclass(frozen=True)
class TransportSolution:
    """Optimal plan: value, shipments (src, dst, amount), demand-side prices."""

    value: object
    shipments: tuple
    sink_prices: dict


def min_cost_transport(supplies, demands, cost_fn) -> TransportSolution:
    """Cheapest way to move `supplies` onto `demands`.

    supplies / demands: lists of (point, positive amount) with equal totals;
    cost_fn(p, q) gives the unit cost of shipping p -> q.
    """
    if not supplies and not demands:
        zero = 0
        return TransportSolution(zero, (), {})
    total_sup = sum(a for _, a in supplies)
    total_dem = sum(a for _, a in demands)
    if total_sup != total_dem:
        raise InvalidParameterError("supply and demand totals differ")
    if any(a <= 0 for _, a in supplies) or any(a <= 0 for _, a in demands):
        raise InvalidParameterError("amounts must be positive")
    zero = total_sup - total_sup  # additive zero of the value type
    P, N = len(supplies), len(demands)
    src, dst = P + N, P + N + 1
    g = _FlowGraph(P + N + 2, zero)
    for i, (_, a) in enumerate(supplies):
        g.add(src, i, a, zero)
    for j, (_, b) in enumerate(demands):
        g.add(P + j, dst, b, zero)
    for i, (p, _) in enumerate(supplies):
        for j, (q, _) in enumerate(demands):
            g.add(i, P + j, total_sup, cost_fn(p, q))

    remaining = total_sup
    while remaining > 0:
        path = g.shortest_path(src, dst)
        if path is None:
            raise InternalCheckError("balanced transport ran out of paths")
        push = min(g.residual(eid) for eid in path)
        push = min(push, remaining)
        for eid in path:
            g.edges[eid].flow += push
            g.edges[eid ^ 1].flow -= push
        remaining -= push

    value = zero
    shipments = []
    for i, (p, _) in enumerate(supplies):
        for eid in g.adj[i]:
            e = g.edges[eid]
            if e.cap > zero and P <= e.dst < P + N and e.flow > zero:
                q = demands[e.dst - P][0]
                shipments.append((p, q, e.flow))
                value += e.flow * e.cost
    phi = g.node_prices()
    sink_prices = {demands[j][0]: phi[P + j] for j in range(N)}
    return TransportSolution(value, tuple(shipments), sink_prices)
