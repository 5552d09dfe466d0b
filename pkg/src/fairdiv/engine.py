"""Approximate-EFX completion of a seed allocation.

Two modes:

``A`` (``half-efx``)
    Complete allocation that is (1/2 - eps)-EFX and EF1.  Plain envy-cycle
    elimination: rotate away envy cycles, then give a pool good to an
    unenvied agent.  The seed guarantees ``v_k(X_k) >= v_k(g)`` for every
    pool good, and that stays true because values never drop and the pool
    only shrinks.  So for an unenvied ``s`` and any ``h``,
    ``v_k((X_s + g) - h) <= v_k(X_s) + v_k(g) <= 2 v_k(X_k)``: every step is
    exactly 1/2-EFX, for any eps >= 0.

``B`` (``charity``)
    Partial allocation that is (1 - eps)-EFX and EF1 with no agent envying
    the pool.  Envied pools are resolved by *claims*: shrink the pool to an
    inclusion-minimal envied subset and hand it to a strictly gaining agent,
    whose old bundle goes back to the pool.  Otherwise pool goods are added
    to unenvied agents whenever an explicit all-pairs check allows it.

Every operation keeps each agent's value at least its previous value,
which is what the welfare lower bounds need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CharityOverflow, ContractViolation, InvalidParameter, StepLimitExceeded
from .model import Allocation, Instance
from .verification import ContractReport, check_alpha_efx, check_contract, check_ef1

_MODES = {"a": "A", "half-efx": "A", "b": "B", "charity": "B"}


@dataclass(frozen=True)
class EngineConfig:
    mode: str = "A"
    epsilon: Fraction = Fraction(0)
    max_steps: int | None = None
    check_invariants: bool = False

    def __post_init__(self):
        mode = _MODES.get(str(self.mode).lower())
        if mode is None:
            raise InvalidParameter(f"unknown mode {self.mode!r}")
        try:
            eps = Fraction(self.epsilon) if not isinstance(self.epsilon, str) \
                else Fraction(self.epsilon.strip())
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InvalidParameter(f"bad epsilon {self.epsilon!r}") from exc
        if mode == "A" and not 0 <= eps < Fraction(1, 2):
            raise InvalidParameter(f"mode A needs 0 <= epsilon < 1/2, got {eps}")
        if mode == "B" and not 0 < eps < 1:
            raise InvalidParameter(f"mode B needs 0 < epsilon < 1, got {eps}")
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "epsilon", eps)

    @property
    def alpha(self) -> Fraction:
        return Fraction(1, 2) - self.epsilon if self.mode == "A" else 1 - self.epsilon

    @property
    def complete(self) -> bool:
        return self.mode == "A"

    @property
    def c(self) -> int:
        return 1 if self.complete else 0

    @property
    def mode_name(self) -> str:
        return "half-efx" if self.mode == "A" else "charity"


@dataclass
class EngineResult:
    allocation: Allocation
    steps: int = 0
    rotations: int = 0
    extensions: int = 0
    nonsource_extensions: int = 0
    rejected_extensions: int = 0
    claims_geometric: int = 0
    claims_exact: int = 0
    path_claims: int = 0
    overflow: bool = False
    contract: ContractReport | None = None

    @property
    def claims(self) -> int:
        return self.claims_geometric + self.claims_exact

    def counters(self) -> dict:
        return {
            "steps": self.steps,
            "rotations": self.rotations,
            "extensions": self.extensions,
            "nonsource_extensions": self.nonsource_extensions,
            "rejected_extensions": self.rejected_extensions,
            "claims_geometric": self.claims_geometric,
            "claims_exact": self.claims_exact,
            "path_claims": self.path_claims,
        }


def default_max_steps(instance: Instance, cfg: EngineConfig) -> int:
    n, m = instance.n, instance.m
    full = frozenset(range(m))
    vmax = max(v.value(full) for v in instance.valuations)
    singles = [v.value((g,)) for v in instance.valuations for g in range(m)]
    positive = [s for s in singles if s > 0]
    vmin = min(positive) if positive else Fraction(1)
    if cfg.epsilon == 0:
        log_term = 0
    else:
        log_term = math.ceil(math.log(float(vmax / vmin) + 1) / -math.log(1 - float(cfg.epsilon)))
    return max(10 * n * m * (1 + log_term), (m + 1) * (n * n + 1))


def _find_cycle(adj: list[list[int]]) -> list[int] | None:
    """First directed cycle found by DFS from agents in ascending order."""
    n = len(adj)
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        color[root] = 1
        stack = [(root, iter(adj[root]))]
        while stack:
            u, it = stack[-1]
            for w in it:
                if color[w] == 0:
                    parent[w] = u
                    color[w] = 1
                    stack.append((w, iter(adj[w])))
                    break
                if color[w] == 1:
                    cycle = [u]
                    while cycle[-1] != w:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    return cycle
            else:
                color[u] = 2
                stack.pop()
    return None


class _Engine:
    def __init__(self, instance: Instance, start: Allocation, cfg: EngineConfig):
        if start.n != instance.n:
            raise ValueError("allocation and instance disagree on n")
        self.instance = instance
        self.n = instance.n
        self.cfg = cfg
        self.bundles = list(start.bundles)
        self.pool = set(start.pool)
        self.result = EngineResult(start)
        self.max_steps = cfg.max_steps or default_max_steps(instance, cfg)
        self._memo: dict[tuple[int, frozenset], Fraction] = {}

    # -- oracle access --------------------------------------------------

    def v(self, i: int, bundle) -> Fraction:
        key = (i, bundle if isinstance(bundle, frozenset) else frozenset(bundle))
        val = self._memo.get(key)
        if val is None:
            val = self._memo[key] = self.instance.value(i, key[1])
        return val

    def own(self) -> list[Fraction]:
        return [self.v(i, self.bundles[i]) for i in range(self.n)]

    def allocation(self) -> Allocation:
        return Allocation(tuple(self.bundles), frozenset(self.pool))

    def envy_adj(self) -> list[list[int]]:
        own = self.own()
        return [[j for j in range(self.n) if j != i and own[i] < self.v(i, self.bundles[j])]
                for i in range(self.n)]

    def sources(self) -> list[int]:
        indeg = [0] * self.n
        for row in self.envy_adj():
            for j in row:
                indeg[j] += 1
        return [s for s in range(self.n) if indeg[s] == 0]

    # -- bookkeeping ------------------------------------------------------

    def _tick(self):
        self.result.steps += 1
        if self.result.steps > self.max_steps:
            raise StepLimitExceeded(f"engine exceeded {self.max_steps} steps")

    def _check_monotone(self, before, strict=()):
        after = self.own()
        bad = [i for i in range(self.n)
               if after[i] < before[i] or (i in strict and not after[i] > before[i])]
        if bad:
            raise ContractViolation("agent value decreased", {"agents": bad, "before": before,
                                                               "after": after})

    def _check_invariants(self):
        X = self.allocation()
        ok, wit = check_alpha_efx(self.instance, X, self.cfg.alpha)
        if ok and self.cfg.mode == "A":
            ok, wit = check_alpha_efx(self.instance, X, Fraction(1, 2))
        if ok:
            ok, wit = check_ef1(self.instance, X)
        if not ok:
            raise ContractViolation("fairness invariant broken mid-run", {"witnesses": wit})
        own = self.own()
        if self.cfg.mode == "A":
            bad = [(k, g) for k in range(self.n) for g in self.pool if own[k] < self.v(k, (g,))]
            if bad:
                raise ContractViolation("pool dominance broken", {"pairs": bad})

    # -- operations ----------------------------------------------------------

    def decycle(self) -> int:
        rotations = 0
        while True:
            adj = self.envy_adj()
            cycle = _find_cycle(adj)
            if cycle is None:
                return rotations
            edges_before = sum(map(len, adj))
            before = self.own()
            moved = [self.bundles[cycle[(t + 1) % len(cycle)]] for t in range(len(cycle))]
            for agent, bundle in zip(cycle, moved):
                self.bundles[agent] = bundle
            self._tick()
            rotations += 1
            self.result.rotations += 1
            self._check_monotone(before, strict=set(cycle))
            edges_after = sum(map(len, self.envy_adj()))
            if edges_after >= edges_before:
                raise ContractViolation("rotation did not reduce envy edges",
                                        {"before": edges_before, "after": edges_after})
            if self.cfg.check_invariants:
                self._check_invariants()

    def extension_ok(self, t: int, g: int) -> bool:
        """Would ``X_t + g`` keep (1 - eps)-EFX and EF1 for everyone else?"""
        bundle = self.bundles[t] | {g}
        own = self.own()
        alpha = self.cfg.alpha
        for k in range(self.n):
            if k == t:
                continue
            whole = self.v(k, bundle)
            if own[k] >= whole:
                continue
            rests = [self.v(k, bundle - {h}) for h in bundle]
            if own[k] < alpha * max(rests) or own[k] < min(rests):
                return False
        return True

    def extend(self, t: int, g: int, checked: bool) -> bool:
        if checked and not self.extension_ok(t, g):
            self.result.rejected_extensions += 1
            return False
        before = self.own()
        self.bundles[t] = self.bundles[t] | {g}
        self.pool.discard(g)
        self._tick()
        self.result.extensions += 1
        self._check_monotone(before)
        if self.cfg.check_invariants:
            self._check_invariants()
        return True

    def claim(self, factor) -> int | None:
        """Resolve pool envy; returns the claimant or ``None`` if nobody qualifies."""
        own = self.own()
        pool = frozenset(self.pool)
        trigger = next((i for i in range(self.n) if own[i] < factor * self.v(i, pool)), None)
        if trigger is None:
            return None
        Z, claimant = shrink_to_minimal(lambda k, s: self.v(k, s), own, pool, trigger)
        before = own
        old = self.bundles[claimant]
        self.bundles[claimant] = Z
        self.pool = (self.pool - Z) | old
        self._tick()
        self._check_monotone(before, strict={claimant})
        after = self.own()
        bad = [(k, g) for k in range(self.n) for g in Z if self.v(k, Z - {g}) > after[k]]
        if bad:
            raise ContractViolation("claimed bundle is not EFX-unenvied", {"pairs": bad})
        if self.cfg.check_invariants:
            self._check_invariants()
        return claimant

    def path_claim(self) -> bool:
        """Break up ``X_a + g`` for some agent ``a`` and pool good ``g``.

        ``X_a + g`` is shrunk to a minimal envied ``Z``; if an agent ``t``
        envying ``Z`` is reachable from ``a`` in the envy graph, bundles
        rotate along the path ``a -> ... -> t``, ``t`` takes ``Z`` and the
        leftover goods return to the pool.  Every mover strictly gains and
        no other bundle changes.
        """
        own = self.own()
        adj = self.envy_adj()
        for a in range(self.n):
            parent = {a: None}
            order = [a]
            for u in order:  # BFS; order grows while iterating
                for w in adj[u]:
                    if w not in parent:
                        parent[w] = u
                        order.append(w)
            for g in sorted(self.pool):
                S = self.bundles[a] | {g}
                enviers = [k for k in range(self.n) if self.v(k, S) > own[k]]
                if not enviers:
                    continue
                Z, _ = shrink_to_minimal(self.v, own, S, enviers[0])
                t = next((k for k in order if self.v(k, Z) > own[k]), None)
                if t is None:
                    continue
                path = [t]
                while path[-1] != a:
                    path.append(parent[path[-1]])
                path.reverse()
                old = list(self.bundles)
                for u, w in zip(path, path[1:]):
                    self.bundles[u] = old[w]
                self.bundles[t] = Z
                self.pool = (self.pool - {g}) | (S - Z)
                self._tick()
                self.result.path_claims += 1
                self._check_monotone(own, strict=set(path))
                if self.cfg.check_invariants:
                    self._check_invariants()
                return True
        return False

    # -- drivers ---------------------------------------------------------------

    def _candidates(self, agents):
        pairs = [(-self.v(s, (g,)), s, g) for s in agents for g in self.pool]
        pairs.sort()
        return [(s, g) for _, s, g in pairs]

    def run_a(self):
        initial_pool = len(self.pool)
        while True:
            rotations = self.decycle()
            if rotations > self.n * self.n:
                raise ContractViolation("too many rotations between extensions",
                                        {"rotations": rotations})
            if not self.pool:
                break
            s, g = self._candidates(self.sources())[0]
            self.extend(s, g, checked=False)
        if self.result.extensions != initial_pool:
            raise ContractViolation("mode A extension count mismatch",
                                    {"extensions": self.result.extensions,
                                     "pool": initial_pool})

    def run_b(self):
        geometric = 1 - self.cfg.epsilon
        while True:
            self.decycle()
            if not self.pool:
                break
            if self.claim(geometric) is not None:
                self.result.claims_geometric += 1
                continue
            if self.claim(1) is not None:
                self.result.claims_exact += 1
                continue
            if any(self.extend(s, g, checked=True) for s, g in self._candidates(self.sources())):
                continue
            if len(self.pool) >= self.n:
                src = set(self.sources())
                others = [t for t in range(self.n) if t not in src]
                if any(self.extend(t, g, checked=True) for t, g in self._candidates(others)):
                    self.result.nonsource_extensions += 1
                    continue
                if self.path_claim():
                    continue
            break
        self.result.overflow = len(self.pool) >= self.n


def shrink_to_minimal(value, own, pool: frozenset, claimant: int):
    """Shrink ``pool`` while some agent still envies it after dropping a good.

    Scans agents ascending, then goods ascending, removing the first good
    whose removal leaves a strictly envied set.  Returns ``(Z, j)`` where no
    agent envies ``Z - g`` for any ``g`` and ``j`` (the agent behind the last
    removal, or ``claimant`` if nothing was removed) strictly envies ``Z``.
    """
    Z = set(pool)
    n = len(own)
    changed = True
    while changed:
        changed = False
        for k in range(n):
            for g in sorted(Z):
                if value(k, frozenset(Z - {g})) > own[k]:
                    Z.discard(g)
                    claimant = k
                    changed = True
                    break
            if changed:
                break
    return frozenset(Z), claimant


# -- public operations ---------------------------------------------------------


def decycle(instance: Instance, X: Allocation) -> Allocation:
    """Rotate bundles along envy cycles until the envy graph is acyclic."""
    eng = _Engine(instance, X, EngineConfig())
    eng.decycle()
    return eng.allocation()


def envy_graph(instance: Instance, X: Allocation) -> list[list[int]]:
    """Adjacency lists: ``j in adj[i]`` iff ``i`` strictly prefers ``X_j``."""
    return _Engine(instance, X, EngineConfig()).envy_adj()


def safe_extend(instance: Instance, X: Allocation, s: int, g: int,
                cfg: EngineConfig) -> Allocation | None:
    """Give pool good ``g`` to unenvied agent ``s``; ``None`` means rejected.

    Mode A commits unconditionally; mode B commits only if every other
    agent stays (1 - eps)-EFX and EF1 towards the enlarged bundle.
    """
    eng = _Engine(instance, X, cfg)
    if s not in eng.sources():
        raise ValueError(f"agent {s} is envied; extensions go to sources")
    if g not in X.pool:
        raise ValueError(f"good {g} is not in the pool")
    if not eng.extend(s, g, checked=cfg.mode == "B"):
        return None
    return eng.allocation()


def champion_claim(instance: Instance, X: Allocation, epsilon=0) -> Allocation | None:
    """One pool claim; ``None`` when no agent envies the pool.

    ``epsilon > 0`` only triggers for agents valuing the pool above
    ``v_i(X_i) / (1 - epsilon)``.
    """
    cfg = EngineConfig("B", Fraction(epsilon) or Fraction(1, 2))
    eng = _Engine(instance, X, cfg)
    if eng.claim(1 - Fraction(epsilon)) is None:
        return None
    return eng.allocation()


def path_claim(instance: Instance, X: Allocation) -> Allocation | None:
    """One path claim (see :meth:`_Engine.path_claim`); ``None`` if none applies."""
    eng = _Engine(instance, X, EngineConfig("B", Fraction(1, 2)))
    if not eng.path_claim():
        return None
    return eng.allocation()


def engine_loop(instance: Instance, start: Allocation, cfg: EngineConfig) -> EngineResult:
    eng = _Engine(instance, start, cfg)
    if cfg.mode == "A":
        eng.run_a()
    else:
        eng.run_b()
    eng.result.allocation = eng.allocation()
    return eng.result


def _check_seed(instance: Instance, Y: Allocation):
    if any(len(b) != 1 for b in Y.bundles):
        raise ValueError("seed bundles must be singletons")
    if Y.allocated() | Y.pool != frozenset(range(instance.m)):
        raise ValueError("seed and pool must partition the goods")
    for i, b in enumerate(Y.bundles):
        vy = instance.value(i, b)
        for g in Y.pool:
            if instance.value(i, (g,)) > vy:
                raise ValueError(f"agent {i} prefers pool good {g} to its seed good")


def run(instance: Instance, Y: Allocation, cfg: EngineConfig, top=None,
        raise_on_overflow: bool = False) -> EngineResult:
    """Complete the rank-fixed seed ``Y`` and machine-check the result.

    Raises :class:`ContractViolation` if any contract bullet fails.  A mode B
    run that ends with ``|pool| >= n`` is flagged ``overflow`` (and raises
    :class:`CharityOverflow` if ``raise_on_overflow``); every other bullet
    is still enforced for it.
    """
    _check_seed(instance, Y)
    result = engine_loop(instance, Y, cfg)
    report = check_contract(instance, Y, result.allocation, cfg, top)
    result.contract = report
    failed = [k for k in report.failed() if not (k == "pool_small" and result.overflow)]
    if failed:
        raise ContractViolation(f"engine contract failed: {failed}",
                                {"failed": failed, "witnesses": report.witnesses,
                                 "counters": result.counters()})
    if result.overflow and raise_on_overflow:
        raise CharityOverflow(f"{len(result.allocation.pool)} goods left in the pool", result)
    return result
