"""Maximum-weight b-matching for one batch, with an optimal dual.

Requests have capacity 1, resource ``k`` has capacity ``q[k]``, and only
pairs with a strictly positive residual reward carry an edge.  The problem is
solved as a min-cost circulation by successive shortest paths (Bellman-Ford,
costs are negated rewards).  Node potentials of the final residual graph give
the dual ``u[n] + h[k] >= r[n][k]``, ``u, h >= 0`` with equal objective.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

# float slack for "strictly shorter" in relaxations
_EPS = 1e-12


class BatchAssignment(NamedTuple):
    x: list[list[int]]
    u: list[float]
    h: list[float]

    def assigned(self) -> dict[int, int]:
        return {n: row.index(1) for n, row in enumerate(self.x) if 1 in row}


def _edge_weight(value) -> float | None:
    if value is None:
        return None
    value = float(value)
    if math.isnan(value) or value <= 0:
        return None
    return value


class _Graph:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        # edge: [tail, head, cap, cost, flow]; edges 2i and 2i+1 are a forward/reverse pair
        self.edges: list[list] = []

    def add(self, u: int, v: int, cap: float, cost: float) -> int:
        self.edges.append([u, v, cap, cost, 0])
        self.edges.append([v, u, 0, -cost, 0])
        return len(self.edges) - 2

    def residual(self, i: int) -> float:
        e = self.edges[i]
        return e[2] - e[4]

    def push(self, i: int, amount) -> None:
        self.edges[i][4] += amount
        self.edges[i ^ 1][4] -= amount

    def bellman_ford(self, dist: list[float], skip: frozenset = frozenset()) -> list[int | None]:
        """Relax in place; returns predecessor edges.  Raises on a negative cycle."""
        pred: list[int | None] = [None] * self.n
        for _ in range(self.n + 1):
            changed = False
            for i, (a, b, _, cost, _) in enumerate(self.edges):
                if i in skip or dist[a] == math.inf or self.residual(i) <= 0:
                    continue
                cand = dist[a] + cost
                if cand < dist[b] - _EPS * max(1.0, abs(cand)):
                    dist[b] = cand
                    pred[b] = i
                    changed = True
            if not changed:
                return pred
        raise RuntimeError("negative cycle in residual graph")


def solve_batch_assignment(r: Sequence[Sequence[float | None]], q: Sequence[int]) -> BatchAssignment:
    """Optimal integral ``x`` for the batch LP and an optimal dual ``(u, h)``.

    ``r[n][k]`` is the residual reward; ``None``, NaN or any value ``<= 0``
    means the pair cannot be assigned.  ``q[k] >= 1`` caps admissions per
    resource.
    """
    n_req, n_res = len(r), len(q)
    if any(int(c) != c or c < 1 for c in q):
        raise ValueError(f"batch caps must be positive integers, got {list(q)}")
    src, sink = 0, n_req + n_res + 1
    g = _Graph(n_req + n_res + 2)

    def res_node(k):
        return n_req + 1 + k

    for n in range(n_req):
        g.add(src, 1 + n, 1, 0.0)
    pair_edges = {}
    for n in range(n_req):
        row = r[n]
        if len(row) != n_res:
            raise ValueError(f"row {n} has {len(row)} entries, expected {n_res}")
        for k in range(n_res):
            weight = _edge_weight(row[k])
            if weight is not None:
                # capacity 2 keeps the forward arc residual, so potentials bound r from below
                pair_edges[(n, k)] = g.add(1 + n, res_node(k), 2, -weight)
    for k in range(n_res):
        g.add(res_node(k), sink, int(q[k]), 0.0)
    back = g.add(sink, src, math.inf, 0.0)
    skip = frozenset({back, back ^ 1})

    while True:
        dist = [math.inf] * g.n
        dist[src] = 0.0
        pred = g.bellman_ford(dist, skip)
        if not dist[sink] < -_EPS:
            break
        path, v = [], sink
        while v != src:
            i = pred[v]
            path.append(i)
            v = g.edges[i][0]
        amount = min(g.residual(i) for i in path)
        for i in path:
            g.push(i, amount)
        g.push(back, amount)

    x = [[0] * n_res for _ in range(n_req)]
    for (n, k), i in pair_edges.items():
        if g.edges[i][4] > 0:
            x[n][k] = 1

    phi = [0.0] * g.n
    g.bellman_ford(phi)
    u = [max(0.0, phi[1 + n] - phi[src]) for n in range(n_req)]
    h = [max(0.0, phi[sink] - phi[res_node(k)]) for k in range(n_res)]
    return BatchAssignment(x, u, h)


def assignment_value(r, x) -> float:
    return math.fsum(
        r[n][k] for n, row in enumerate(x) for k, xv in enumerate(row) if xv
    )


def dual_value(u, h, q) -> float:
    return math.fsum(u) + math.fsum(qk * hk for qk, hk in zip(q, h))
