"""Fairness checkers, the engine contract report, and brute-force oracles.

Every comparison in the checkers is exact (Fraction arithmetic).  The
oracle enumerates all ``n**m`` complete allocations in lexicographic order
of the owner vector ``(owner(g0), owner(g1), ...)``; ties are resolved by
the first optimum in that order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import TooLarge
from .model import Allocation, Instance
from .seeding import build_top_goods
from .welfare import is_neg_inf, nash_product, p_mean, parse_p, weighted_p_mean

ORACLE_LIMIT = 10**7
ORACLE_TOL = 1e-12
BOUND_TOL = 1e-9


def _removals(instance: Instance, i: int, bundle: frozenset[int]):
    """``[(g, v_i(bundle - g)) for g in bundle]`` in ascending good order."""
    return [(g, instance.value(i, bundle - {g})) for g in sorted(bundle)]


def check_ef1(instance: Instance, X: Allocation):
    """EF1: every envied bundle loses the envy after removing some good.

    Returns ``(ok, witnesses)``; a witness ``(i, j, g)`` names the best
    removal ``g``, which still leaves ``i`` envious of ``j``.
    """
    witnesses = []
    own = X.values(instance)
    for i in range(X.n):
        for j, bundle in enumerate(X.bundles):
            if i == j or not bundle:
                continue
            if own[i] >= instance.value(i, bundle):
                continue
            g, rest = min(_removals(instance, i, bundle), key=lambda t: (t[1], t[0]))
            if own[i] < rest:
                witnesses.append((i, j, g))
    return not witnesses, witnesses


def check_alpha_efx(instance: Instance, X: Allocation, alpha=1):
    """``v_i(X_i) >= alpha * v_i(X_j - g)`` for all ``i != j`` and ``g in X_j``."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha={alpha} outside (0, 1]")
    witnesses = []
    own = X.values(instance)
    for i in range(X.n):
        for j, bundle in enumerate(X.bundles):
            if i == j or len(bundle) < 2:
                continue
            if own[i] >= alpha * instance.value(i, bundle):
                continue  # monotonicity covers every removal
            for g, rest in _removals(instance, i, bundle):
                if own[i] < alpha * rest:
                    witnesses.append((i, j, g))
    return not witnesses, witnesses


def charity_violations(instance: Instance, X: Allocation) -> list[int]:
    """Agents that strictly prefer the pool to their own bundle."""
    own = X.values(instance)
    return [i for i in range(X.n) if own[i] < instance.value(i, X.pool)]


@dataclass
class FairnessReport:
    alpha: Fraction
    ef1: bool
    alpha_efx: bool
    exact_efx: bool
    charity_ok: bool
    singleton_goods: frozenset[int]
    witnesses: dict[str, list] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "ef1": self.ef1,
            "alpha_efx": self.alpha_efx,
            "exact_efx": self.exact_efx,
            "charity_ok": self.charity_ok,
            "singleton_goods": sorted(self.singleton_goods),
            "witnesses": {k: [list(w) for w in v] for k, v in self.witnesses.items()},
        }


def fairness_report(instance: Instance, X: Allocation, alpha=1) -> FairnessReport:
    alpha = Fraction(alpha)
    ef1, w_ef1 = check_ef1(instance, X)
    exact, w_exact = check_alpha_efx(instance, X, 1)
    if alpha == 1:
        approx, w_approx = exact, w_exact
    else:
        approx, w_approx = check_alpha_efx(instance, X, alpha)
    envious = charity_violations(instance, X)
    small = len(X.pool) < X.n
    witnesses = {}
    if not ef1:
        witnesses["ef1"] = w_ef1
    if not approx:
        witnesses["alpha_efx"] = w_approx
    if not exact:
        witnesses["exact_efx"] = w_exact
    if envious or not small:
        witnesses["charity"] = [(i, "pool", None) for i in envious]
        if not small:
            witnesses["charity"].append((None, "pool_size", len(X.pool)))
    singles = frozenset(g for b in X.bundles if len(b) == 1 for g in b)
    return FairnessReport(alpha, ef1, approx, exact, small and not envious, singles, witnesses)


@dataclass
class ContractReport:
    checks: dict[str, bool] = field(default_factory=dict)
    witnesses: dict[str, list] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def record(self, name: str, problems: list):
        self.checks[name] = not problems
        if problems:
            self.witnesses[name] = problems

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "checks": dict(self.checks),
            "witnesses": {k: [repr(w) for w in v] for k, v in self.witnesses.items()},
        }


def check_contract(instance: Instance, Y: Allocation, Z: Allocation, cfg, top=None) -> ContractReport:
    """Verify the engine contract for seed ``Y`` and output ``Z``.

    ``cfg`` needs ``alpha`` and ``complete`` (True for the complete mode).
    Besides the contract bullets, the seed invariants and the two per-agent
    lower bounds are checked exactly.
    """
    n, m = instance.n, instance.m
    alpha = Fraction(cfg.alpha)
    rep = ContractReport()
    zv = Z.values(instance)
    yv = Y.values(instance)
    everything = frozenset(range(m))

    parts = Z.allocated() | Z.pool
    rep.record("partition", [] if parts == everything and Z.covers_within(m) else [sorted(everything - parts)])
    rep.record("alpha_efx", check_alpha_efx(instance, Z, alpha)[1])
    rep.record("ef1", check_ef1(instance, Z)[1])
    rep.record("floor", [(i, zv[i], yv[i]) for i in range(n) if zv[i] < yv[i]])
    rep.record("singleton_strict", [
        i for i in range(n)
        if len(Z.bundles[i]) == 1 and Z.bundles[i] != Y.bundles[i] and not zv[i] > yv[i]
    ])
    if cfg.complete:
        rep.record("complete", sorted(Z.pool))
    else:
        rep.record("no_pool_envy", charity_violations(instance, Z))
        rep.record("pool_small", [] if len(Z.pool) < n else [len(Z.pool)])

    if top is None:
        top = build_top_goods(instance)
    seed_goods = Y.allocated()
    rep.record("seed_in_top", [i for i in range(n) if not Y.bundles[i] <= top.top[i]])
    dominance = []
    for i in range(n):
        for g in range(m):
            if (g not in seed_goods or g not in top.top[i]) and instance.value(i, (g,)) > yv[i]:
                dominance.append((i, g))
    rep.record("pool_dominance", dominance)
    rep.record("final_singletons", [
        i for i, b in enumerate(Z.bundles) if len(b) == 1 and not b <= seed_goods
    ])
    small_goods, lower = [], []
    for i in range(n):
        low = alpha * instance.value(i, everything - seed_goods) / (2 * (n + 1))
        if zv[i] < low:
            small_goods.append((i, zv[i], low))
        bound = alpha / (4 * (n + 1)) * (n * yv[i] + top.tail[i])
        if zv[i] < bound:
            lower.append((i, zv[i], bound))
    rep.record("small_goods_bound", small_goods)
    rep.record("lower_bound_final", lower)
    return rep


# --------------------------------------------------------------------------
# brute-force oracle


@dataclass
class OracleResult:
    p: object
    best_allocation: Allocation
    best_values: list[Fraction]
    best_welfare: object
    top_single_goods: list[int | None]
    assignment: tuple[int, ...]


def _lcm_scale(tables: list[list[Fraction]]) -> tuple[int, list[list[int]]]:
    denom = math.lcm(*(v.denominator for t in tables for v in t))
    return denom, [[int(v * denom) for v in t] for t in tables]


class BruteForceOracle:
    """Exhaustive search over all complete allocations of one instance.

    Value tables over all ``2**m`` bundles are built once; the owner
    vectors are enumerated in chunks so memory stays bounded.
    """

    def __init__(self, instance: Instance, limit: int = ORACLE_LIMIT, chunk: int = 1 << 16):
        n, m = instance.n, instance.m
        if n ** m > limit:
            raise TooLarge(f"n**m = {n}**{m} exceeds {limit}")
        self.instance = instance
        self.n, self.m = n, m
        self.total = n ** m
        self.chunk = chunk
        tables = [v.table() for v in instance.valuations]
        self.scale, int_tables = _lcm_scale(tables)
        top = max(max(t) for t in int_tables)
        self._exact_ok = top == 0 or (top + 1) ** n < 2**62
        dtype = np.int64 if self._exact_ok else object
        self.tables = [np.array(t, dtype=dtype) for t in int_tables]
        self._pows = [n ** (m - 1 - g) for g in range(m)]
        self._cache: dict = {}
        # owner vector index k = sum owner(g) * n**(m-1-g); the last ``low``
        # goods are the fast digits and are enumerated in one vector
        low = 0
        while low < m and n ** (low + 1) <= max(chunk, n):
            low += 1
        self._low = low
        self._lo_masks = self._digit_masks(m - low, low)
        self._hi_masks = self._digit_masks(0, m - low)

    def _digit_masks(self, first: int, count: int) -> np.ndarray:
        """``out[i, k]``: bitmask of goods ``first..first+count-1`` owned by
        agent ``i`` in the ``k``-th owner vector of that block."""
        n = self.n
        ks = np.arange(n ** count, dtype=np.int64)
        out = np.zeros((n, len(ks)), dtype=np.int64)
        for j in range(count):
            digit = (ks // n ** (count - 1 - j)) % n
            bit = np.int64(1 << (first + j))
            for i in range(n):
                out[i] |= np.where(digit == i, bit, 0)
        return out

    def _chunks(self):
        size = self.n ** self._low
        for h in range(self._hi_masks.shape[1]):
            vals = np.empty((size, self.n), dtype=self.tables[0].dtype)
            for i in range(self.n):
                vals[:, i] = self.tables[i][self._hi_masks[i, h] | self._lo_masks[i]]
            yield h * size, vals

    def _key(self, vals, p, weights):
        """Per-row comparison key (larger is better) and whether it is exact."""
        if is_neg_inf(p):
            return vals.min(axis=1), True
        if weights is None and p == 1:
            return vals.sum(axis=1), True
        if weights is None and p == 0 and self._exact_ok:
            return np.prod(vals, axis=1), True
        fv = vals.astype(float)
        zero = (fv == 0).any(axis=1)
        if weights is None:
            eta = np.full(self.n, 1.0 / self.n)
        else:
            eta = np.array([float(w) for w in weights])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if p == 0:
                eta = eta / eta.sum()
                key = np.exp((np.log(fv) * eta).sum(axis=1))
                key[zero] = 0.0
            else:
                fp = float(p)
                key = ((fv ** fp) * eta).sum(axis=1) ** (1.0 / fp)
                if fp < 0:
                    key[zero] = 0.0
        return key, False

    def _assignment(self, k: int) -> tuple[int, ...]:
        return tuple((k // self._pows[g]) % self.n for g in range(self.m))

    def _allocation(self, assignment) -> Allocation:
        bundles = [set() for _ in range(self.n)]
        for g, i in enumerate(assignment):
            bundles[i].add(g)
        return Allocation(tuple(frozenset(b) for b in bundles))

    def best(self, p, weights: Sequence | None = None) -> OracleResult:
        p = parse_p(p)
        memo = (p, None if weights is None else tuple(Fraction(w) for w in weights))
        if memo not in self._cache:
            self._cache[memo] = self._best(p, weights)
        return self._cache[memo]

    def _best(self, p, weights) -> OracleResult:
        best_key, best_k, exact = None, 0, True
        for start, vals in self._chunks():
            key, exact = self._key(vals, p, weights)
            top = key.max()
            if exact:
                if best_key is None or top > best_key:
                    best_key, best_k = top, start + int(np.argmax(key == top))
            else:
                if best_key is None or top > best_key + ORACLE_TOL * max(1.0, abs(best_key)):
                    thr = top - ORACLE_TOL * max(1.0, abs(top))
                    best_key, best_k = top, start + int(np.argmax(key >= thr))
        assignment = self._assignment(best_k)
        alloc = self._allocation(assignment)
        values = alloc.values(self.instance)
        if weights is None:
            welfare = p_mean(values, p)
        else:
            welfare = weighted_p_mean(values, p, weights)
        tops = []
        for i, b in enumerate(alloc.bundles):
            if b:
                tops.append(min(b, key=lambda g: (-self.instance.value(i, (g,)), g)))
            else:
                tops.append(None)
        return OracleResult(p, alloc, values, welfare, tops, assignment)

    def argmax_assignments(self, p) -> list[tuple[int, ...]]:
        """All optimal owner vectors; exact objectives only (p in {-inf, 0, 1})."""
        p = parse_p(p)
        keys, starts = [], []
        for start, vals in self._chunks():
            key, exact = self._key(vals, p, None)
            if not exact:
                raise ValueError("argmax_assignments needs an exact objective")
            keys.append(key)
            starts.append(start)
        top = max(k.max() for k in keys)
        out = []
        for start, key in zip(starts, keys):
            out.extend(self._assignment(start + int(k)) for k in np.flatnonzero(key == top))
        return out


def brute_force_best(instance: Instance, p, weights: Sequence | None = None,
                     limit: int = ORACLE_LIMIT) -> OracleResult:
    return BruteForceOracle(instance, limit).best(p, weights)


def _ratio(a, b) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    if isinstance(a, float) or isinstance(b, float):
        return float(a) / float(b)
    return float(Fraction(a) / Fraction(b))


def welfare_of(instance: Instance, X: Allocation, p, weights: Sequence | None = None):
    values = X.values(instance)
    if weights is None:
        return p_mean(values, p)
    return weighted_p_mean(values, p, weights)


def welfare_ratio(instance: Instance, Z: Allocation, p, oracle: BruteForceOracle | None = None,
                  weights: Sequence | None = None) -> float:
    """``M_p(Z) / M_p(X*)`` with ``0/0 = 1``."""
    oracle = oracle or BruteForceOracle(instance)
    best = oracle.best(p, weights)
    return _ratio(welfare_of(instance, Z, p, weights), best.best_welfare)


def welfare_bound_holds(values: Sequence, optimum: Sequence, p, factor, weights=None,
                        tol: float = BOUND_TOL) -> bool:
    """``M_p(values) >= factor * M_p(optimum)``.

    Exact for unweighted ``p`` in ``{-inf, 0, 1}``; within ``tol`` otherwise.
    """
    p = parse_p(p)
    factor = Fraction(factor)
    n = len(values)
    if weights is None:
        if is_neg_inf(p):
            return min(values) >= factor * min(optimum)
        if p == 0:
            return nash_product(values) >= factor ** n * nash_product(optimum)
        if p == 1:
            return sum(values) >= factor * sum(optimum)
        lhs, rhs = p_mean(values, p), p_mean(optimum, p)
    else:
        lhs, rhs = weighted_p_mean(values, p, weights), weighted_p_mean(optimum, p, weights)
    return float(lhs) >= float(factor) * float(rhs) - tol
