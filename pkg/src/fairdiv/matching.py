"""Exact agent-perfect bipartite assignment.

Weights are Fractions, ints or floats; ``POS_INF`` / ``NEG_INF``
(``math.inf`` / ``-math.inf``) mark the degenerate edges produced by the
seeding transforms (``0 ** negative`` and ``log 0``).  Finite floats are
converted to Fractions exactly, so every solver below is exact on the
numbers it is given.

Each solver returns the lexicographically smallest assignment vector among
its optima.  This is done in a single Hungarian run by encoding the key
``(sentinel count, finite sum, assignment vector)`` into one integer cost
per edge.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

POS_INF = math.inf
NEG_INF = -math.inf

Weight = Fraction | int | float
WeightMatrix = Sequence[Sequence[Weight]]


@dataclass(frozen=True)
class AgentPerfectMatching:
    """``assignment[i]`` is the good given to agent ``i``."""

    assignment: tuple[int, ...]
    objective: Weight

    def as_pairs(self):
        return list(enumerate(self.assignment))


def _shape(W: WeightMatrix) -> tuple[int, int]:
    n = len(W)
    if n == 0:
        raise ValueError("empty weight matrix")
    m = len(W[0])
    if any(len(row) != m for row in W):
        raise ValueError("ragged weight matrix")
    if m < n:
        raise ValueError(f"need n <= m, got {n}x{m}")
    return n, m


def _exact(w: Weight) -> Fraction:
    return w if isinstance(w, Fraction) else Fraction(w)


def _hungarian(cost: list[list[int]], n: int, m: int) -> list[int]:
    """Min-cost assignment of ``n`` rows into ``m >= n`` columns (integer costs)."""
    u = [0] * (n + 1)
    v = [0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [math.inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            ui = u[i0]
            delta = math.inf
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = row[j - 1] - ui - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    out = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            out[p[j] - 1] = j - 1
    return out


def _lex_min_assignment(levels, finite, n: int, m: int) -> list[int]:
    """Minimize ``(sum of levels, sum of finite parts, assignment vector)``.

    ``levels[i][g]`` is a small nonnegative int (sentinel count);
    ``finite[i][g]`` an exact Fraction (ignored where the level is nonzero).
    """
    fin = [finite[i][g] for i in range(n) for g in range(m) if levels[i][g] == 0]
    if fin:
        lo = min(fin)
        denom = math.lcm(*(f.denominator for f in fin))
        scaled = [[int((finite[i][g] - lo) * denom) if levels[i][g] == 0 else 0
                   for g in range(m)] for i in range(n)]
        top = max(max(r) for r in scaled)
    else:
        scaled = [[0] * m for _ in range(n)]
        top = 0
    lex_base = m ** n
    level_base = (n * top + 1) * lex_base
    place = [m ** (n - 1 - i) for i in range(n)]
    cost = [[levels[i][g] * level_base + scaled[i][g] * lex_base + g * place[i]
             for g in range(m)] for i in range(n)]
    return _hungarian(cost, n, m)


def _sum_objective(W, assignment, sentinel) -> Weight:
    used = [W[i][g] for i, g in enumerate(assignment)]
    if any(w == sentinel for w in used):
        return sentinel
    total = sum((_exact(w) for w in used), Fraction(0))
    if any(isinstance(w, float) for w in used):
        return float(total)
    return total


def max_weight_assignment(W: WeightMatrix) -> AgentPerfectMatching:
    """Agent-perfect matching maximizing the weight sum.

    ``NEG_INF`` edges are used only when unavoidable (fewest first);
    ``POS_INF`` entries are not allowed.
    """
    n, m = _shape(W)
    levels = [[0] * m for _ in range(n)]
    finite = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        for g in range(m):
            w = W[i][g]
            if w == NEG_INF:
                levels[i][g] = 1
            elif w == POS_INF or (isinstance(w, float) and math.isnan(w)):
                raise ValueError(f"max_weight_assignment: invalid weight {w!r}")
            else:
                finite[i][g] = -_exact(w)
    assignment = _lex_min_assignment(levels, finite, n, m)
    return AgentPerfectMatching(tuple(assignment), _sum_objective(W, assignment, NEG_INF))


def min_weight_perfect_assignment(W: WeightMatrix) -> AgentPerfectMatching:
    """Agent-perfect matching minimizing the weight sum.

    ``POS_INF`` edges are used only when unavoidable (fewest first);
    ``NEG_INF`` entries are not allowed.
    """
    n, m = _shape(W)
    levels = [[0] * m for _ in range(n)]
    finite = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        for g in range(m):
            w = W[i][g]
            if w == POS_INF:
                levels[i][g] = 1
            elif w == NEG_INF or (isinstance(w, float) and math.isnan(w)):
                raise ValueError(f"min_weight_perfect_assignment: invalid weight {w!r}")
            else:
                finite[i][g] = _exact(w)
    assignment = _lex_min_assignment(levels, finite, n, m)
    return AgentPerfectMatching(tuple(assignment), _sum_objective(W, assignment, POS_INF))


def _hopcroft_karp(adj: list[list[int]], n: int, m: int) -> tuple[int, list[int]]:
    match_l = [-1] * n
    match_r = [-1] * m
    size = 0
    while True:
        dist = [-1] * n
        queue = deque()
        for u in range(n):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for g in adj[u]:
                w = match_r[g]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return size, match_l
        it = [0] * n
        for root in range(n):
            if match_l[root] != -1:
                continue
            stack = [root]
            edges: list[int] = []
            while stack:
                u = stack[-1]
                if it[u] < len(adj[u]):
                    g = adj[u][it[u]]
                    it[u] += 1
                    w = match_r[g]
                    if w == -1:
                        edges.append(g)
                        for x, e in zip(stack, edges):
                            match_l[x] = e
                            match_r[e] = x
                        size += 1
                        break
                    if dist[w] == dist[u] + 1:
                        stack.append(w)
                        edges.append(g)
                else:
                    dist[u] = -2
                    stack.pop()
                    if edges:
                        edges.pop()


def bottleneck_assignment(W: WeightMatrix) -> AgentPerfectMatching:
    """Agent-perfect matching maximizing its smallest edge weight.

    Threshold search over the sorted distinct weights, with Hopcroft-Karp
    as the feasibility test.  Among matchings achieving the bottleneck the
    lexicographically smallest assignment vector is returned.
    """
    n, m = _shape(W)
    distinct = sorted({W[i][g] for i in range(n) for g in range(m)})

    def feasible(t):
        adj = [[g for g in range(m) if W[i][g] >= t] for i in range(n)]
        size, _ = _hopcroft_karp(adj, n, m)
        return size == n

    lo, hi = 0, len(distinct) - 1  # distinct[0] is always feasible
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(distinct[mid]):
            lo = mid
        else:
            hi = mid - 1
    t = distinct[lo]
    levels = [[0 if W[i][g] >= t else 1 for g in range(m)] for i in range(n)]
    zero = [[Fraction(0)] * m for _ in range(n)]
    assignment = _lex_min_assignment(levels, zero, n, m)
    return AgentPerfectMatching(tuple(assignment), t)


def assignment_key(W: WeightMatrix, assignment: Sequence[int], kind: str):
    """Comparable objective of ``assignment`` under ``kind``; larger is better.

    ``kind`` is ``"max"``, ``"min"`` or ``"bottleneck"``.  Sum objectives
    compare sentinel counts first, then the exact finite sum.
    """
    used = [W[i][g] for i, g in enumerate(assignment)]
    if kind == "bottleneck":
        return min(used)
    if kind == "max":
        bad = sum(1 for w in used if w == NEG_INF)
        return (-bad, sum((_exact(w) for w in used if w != NEG_INF), Fraction(0)))
    if kind == "min":
        bad = sum(1 for w in used if w == POS_INF)
        return (-bad, -sum((_exact(w) for w in used if w != POS_INF), Fraction(0)))
    raise ValueError(f"unknown matching kind {kind!r}")


def objective_value(W: WeightMatrix, assignment: Sequence[int], kind: str) -> Weight:
    """The objective a solver of ``kind`` reports for ``assignment``."""
    if kind == "bottleneck":
        return min(W[i][g] for i, g in enumerate(assignment))
    return _sum_objective(W, assignment, NEG_INF if kind == "max" else POS_INF)


SOLVERS = {
    "max": max_weight_assignment,
    "min": min_weight_perfect_assignment,
    "bottleneck": bottleneck_assignment,
}
