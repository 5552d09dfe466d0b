"""Seed allocation of high-valued goods.

Every agent ranks the goods by singleton value (ties by index), keeps its
top ``n`` as ``top[i]`` and values the rest at ``tail[i] = v_i(M \\ top[i])``.
Edge ``(i, g)`` of the agent/good graph gets argument
``a = n * v_i(g) + tail[i]``, transformed according to ``p``; a matching of
the kind ``p`` calls for yields one good per agent, and a rank-improvement
loop then swaps agents onto better unmatched goods until none is left.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ContractViolation
from .matching import (
    NEG_INF,
    POS_INF,
    AgentPerfectMatching,
    SOLVERS,
    assignment_key,
    objective_value,
)
from .model import Allocation, Instance
from .welfare import is_neg_inf, parse_p


@dataclass(frozen=True)
class TopGoodsIndex:
    order: tuple[tuple[int, ...], ...]  # per agent, goods by descending singleton value
    rank: tuple[tuple[int, ...], ...]  # rank[i][g], 1-based
    top: tuple[frozenset[int], ...]
    tail: tuple[Fraction, ...]
    singles: tuple[tuple[Fraction, ...], ...]


def build_top_goods(instance: Instance) -> TopGoodsIndex:
    n, m = instance.n, instance.m
    order, rank, top, tail, singles = [], [], [], [], []
    for i, val in enumerate(instance.valuations):
        sv = tuple(val.value((g,)) for g in range(m))
        ordered = tuple(sorted(range(m), key=lambda g: (-sv[g], g)))
        r = [0] * m
        for k, g in enumerate(ordered, start=1):
            r[g] = k
        high = frozenset(ordered[:n])
        order.append(ordered)
        rank.append(tuple(r))
        top.append(high)
        tail.append(val.value(frozenset(range(m)) - high))
        singles.append(sv)
    return TopGoodsIndex(tuple(order), tuple(rank), tuple(top), tuple(tail), tuple(singles))


def matching_kind(p) -> str:
    p = parse_p(p)
    if is_neg_inf(p):
        return "bottleneck"
    if p < 0:
        return "min"
    return "max"


def _transform(a: Fraction, p):
    if is_neg_inf(p):
        return a
    if p == 0:
        return NEG_INF if a == 0 else math.log(a)
    if a == 0:
        return POS_INF if p < 0 else Fraction(0)
    if p.denominator == 1:
        return a ** int(p)
    return float(a) ** float(p)


def build_weights(instance: Instance, idx: TopGoodsIndex, p, weights: Sequence | None = None):
    """The ``n x m`` edge-weight matrix for ``p``.

    With welfare ``weights`` (eta) the transformed entries are scaled by
    ``eta_i`` for finite ``p``; the bottleneck case is left unscaled since
    the weighted mean at ``p = -inf`` is the plain minimum.
    """
    p = parse_p(p)
    n, m = instance.n, instance.m
    W = []
    for i in range(n):
        row = []
        eta = None if weights is None or is_neg_inf(p) else Fraction(weights[i])
        for g in range(m):
            w = _transform(n * idx.singles[i][g] + idx.tail[i], p)
            if eta is not None and not math.isinf(w):
                w = eta * w if isinstance(w, Fraction) else float(eta) * w
            row.append(w)
        W.append(row)
    return W


def select_matching(W, p) -> AgentPerfectMatching:
    return SOLVERS[matching_kind(p)](W)


@dataclass
class Seed:
    allocation: Allocation
    matching: AgentPerfectMatching
    iterations: int
    rank_sums: list[int] = field(default_factory=list)
    objective_before: object = None
    objective_after: object = None


def rank_fix(instance: Instance, idx: TopGoodsIndex, start: AgentPerfectMatching, p,
             W=None) -> Seed:
    """Swap agents onto strictly better-ranked unmatched goods until none remain.

    Each sweep scans agents ascending, then unmatched goods ascending, and
    applies the first improving swap.  A swap only moves agent ``i`` to a good
    of smaller rank, so ``v_i`` of the new good is at least the old one and
    the matching objective never worsens.
    """
    p = parse_p(p)
    n, m = instance.n, instance.m
    kind = matching_kind(p)
    if W is None:
        W = build_weights(instance, idx, p)
    assign = list(start.assignment)
    if len(set(assign)) != n:
        raise ContractViolation("seed matching is not agent-perfect", {"assignment": assign})
    key0 = assignment_key(W, assign, kind)
    sums = [sum(idx.rank[i][g] for i, g in enumerate(assign))]
    iterations = 0
    while True:
        matched = set(assign)
        hit = None
        for i in range(n):
            ri = idx.rank[i]
            for g in range(m):
                if g not in matched and ri[g] < ri[assign[i]]:
                    hit = (i, g)
                    break
            if hit:
                break
        if hit is None:
            break
        i, g = hit
        assign[i] = g
        iterations += 1
        sums.append(sum(idx.rank[k][h] for k, h in enumerate(assign)))
        if sums[-1] >= sums[-2]:
            raise ContractViolation("rank sum did not decrease", {"rank_sums": sums})

    key1 = assignment_key(W, assign, kind)
    y = frozenset(assign)
    problems = {}
    if iterations > n * m:
        problems["iterations"] = iterations
    if key1 < key0:
        problems["objective"] = (key0, key1)
    for i, g in enumerate(assign):
        if g not in idx.top[i]:
            problems.setdefault("outside_top", []).append((i, g))
        vy = idx.singles[i][g]
        for h in range(m):
            if (h not in y or h not in idx.top[i]) and idx.singles[i][h] > vy:
                problems.setdefault("pool_dominance", []).append((i, h))
    if problems:
        raise ContractViolation("rank_fix postcondition failed", problems)

    bundles = tuple(frozenset((g,)) for g in assign)
    alloc = Allocation(bundles, frozenset(range(m)) - y)
    matching = AgentPerfectMatching(tuple(assign), objective_value(W, assign, kind))
    return Seed(alloc, matching, iterations, sums, key0, key1)


def seed(instance: Instance, p, weights: Sequence | None = None) -> Seed:
    """Build the top-goods index, weights and matching, then rank-fix."""
    idx = build_top_goods(instance)
    W = build_weights(instance, idx, p, weights)
    start = select_matching(W, p)
    return rank_fix(instance, idx, start, p, W)
