"""Instances, valuation oracles and allocations.

All values live in :class:`fractions.Fraction` so that every fairness
comparison downstream is exact.  Four subadditive valuation families are
supported; each one is normalized, monotone and subadditive by
construction.
"""
from __future__ import annotations

import hashlib
import json
import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InstanceTooSmall, InvalidGood, InvalidValue, ParseError

Value = Fraction

ZERO = Fraction(0)


def to_value(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a nonnegative Fraction."""
    if isinstance(x, bool):
        raise ParseError(f"not a rational: {x!r}")
    if isinstance(x, Fraction):
        v = x
    elif isinstance(x, int):
        v = Fraction(x)
    elif isinstance(x, str):
        try:
            v = Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a rational: {x!r}") from exc
    elif isinstance(x, float):
        # floats are accepted from Python callers; they convert exactly
        v = Fraction(x)
    else:
        raise ParseError(f"not a rational: {x!r}")
    if v < 0:
        raise InvalidValue(f"negative value {x!r}")
    return v


def format_value(v: Fraction):
    """JSON encoding of a rational: int when integral, else ``"p/q"``."""
    v = Fraction(v)
    if v.denominator == 1:
        return v.numerator
    return f"{v.numerator}/{v.denominator}"


def _scaled(values) -> tuple[int, tuple[int, ...]]:
    """Common denominator and integer numerators, so sums avoid Fraction."""
    d = math.lcm(*(v.denominator for v in values)) if values else 1
    return d, tuple(v.numerator * (d // v.denominator) for v in values)


def mask_to_set(mask: int) -> frozenset[int]:
    out = []
    g = 0
    while mask:
        if mask & 1:
            out.append(g)
        mask >>= 1
        g += 1
    return frozenset(out)


def set_to_mask(goods: Iterable[int]) -> int:
    mask = 0
    for g in goods:
        mask |= 1 << g
    return mask


class Valuation:
    """A set-function oracle ``v: 2^M -> Q>=0``.

    Subclasses implement :meth:`_evaluate` on a validated frozenset of goods.
    """

    kind: str = ""
    m: int

    def value(self, goods: Iterable[int]) -> Fraction:
        s = goods if isinstance(goods, frozenset) else frozenset(goods)
        m = self.m
        for g in s:
            if type(g) is not int and not isinstance(g, numbers.Integral) or not 0 <= g < m:
                raise InvalidGood(f"good {g!r} outside 0..{m - 1}")
        if not s:
            return ZERO
        return self._evaluate(s)

    __call__ = value

    def singleton(self, g: int) -> Fraction:
        return self.value((g,))

    def _evaluate(self, goods: frozenset[int]) -> Fraction:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def table(self) -> list[Fraction]:
        """Values of all ``2**m`` subsets, indexed by bitmask."""
        return [self.value(mask_to_set(mask)) for mask in range(1 << self.m)]


@dataclass(frozen=True)
class AdditiveValuation(Valuation):
    values: tuple[Fraction, ...]
    kind: str = field(default="additive", init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(to_value(v) for v in self.values))
        object.__setattr__(self, "_int", _scaled(self.values))

    @property
    def m(self) -> int:
        return len(self.values)

    def _evaluate(self, goods):
        d, w = self._int
        return Fraction(sum(w[g] for g in goods), d)

    def to_json(self):
        return {"kind": "additive", "values": [format_value(v) for v in self.values]}


@dataclass(frozen=True)
class XOSValuation(Valuation):
    """Maximum over additive clauses."""

    clauses: tuple[tuple[Fraction, ...], ...]
    kind: str = field(default="xos", init=False)

    def __post_init__(self):
        clauses = tuple(tuple(to_value(v) for v in c) for c in self.clauses)
        if not clauses:
            raise ParseError("xos valuation needs at least one clause")
        if len({len(c) for c in clauses}) != 1:
            raise ParseError("xos clauses have different lengths")
        object.__setattr__(self, "clauses", clauses)
        d = math.lcm(*(v.denominator for c in clauses for v in c))
        ints = tuple(tuple(v.numerator * (d // v.denominator) for v in c) for c in clauses)
        object.__setattr__(self, "_int", (d, ints))

    @property
    def m(self) -> int:
        return len(self.clauses[0])

    def _evaluate(self, goods):
        d, ints = self._int
        return Fraction(max(sum(c[g] for g in goods) for c in ints), d)

    def to_json(self):
        return {
            "kind": "xos",
            "clauses": [[format_value(v) for v in c] for c in self.clauses],
        }


@dataclass(frozen=True)
class CoverageValuation(Valuation):
    """Weighted coverage: each good covers a subset of a weighted universe."""

    universe_weights: tuple[Fraction, ...]
    covers: tuple[frozenset[int], ...]
    kind: str = field(default="coverage", init=False)

    def __post_init__(self):
        weights = tuple(to_value(w) for w in self.universe_weights)
        covers = []
        for c in self.covers:
            cover = frozenset(c)
            for e in cover:
                if not isinstance(e, int) or not 0 <= e < len(weights):
                    raise ParseError(f"cover element {e!r} outside universe")
            covers.append(cover)
        object.__setattr__(self, "universe_weights", weights)
        object.__setattr__(self, "covers", tuple(covers))
        object.__setattr__(self, "_int", _scaled(weights))

    @property
    def m(self) -> int:
        return len(self.covers)

    def _evaluate(self, goods):
        covered = frozenset().union(*(self.covers[g] for g in goods))
        d, w = self._int
        return Fraction(sum(w[e] for e in covered), d)

    def to_json(self):
        return {
            "kind": "coverage",
            "universe_weights": [format_value(w) for w in self.universe_weights],
            "covers": [sorted(c) for c in self.covers],
        }


@dataclass(frozen=True)
class BudgetAdditiveValuation(Valuation):
    """``v(S) = min(budget, sum of item values)``."""

    budget: Fraction
    values: tuple[Fraction, ...]
    kind: str = field(default="budget_additive", init=False)

    def __post_init__(self):
        object.__setattr__(self, "budget", to_value(self.budget))
        object.__setattr__(self, "values", tuple(to_value(v) for v in self.values))
        object.__setattr__(self, "_int", _scaled(self.values))

    @property
    def m(self) -> int:
        return len(self.values)

    def _evaluate(self, goods):
        d, w = self._int
        return min(self.budget, Fraction(sum(w[g] for g in goods), d))

    def to_json(self):
        return {
            "kind": "budget_additive",
            "budget": format_value(self.budget),
            "values": [format_value(v) for v in self.values],
        }


def valuation_from_json(obj) -> Valuation:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"valuation must be an object with a 'kind': {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "additive":
            return AdditiveValuation(tuple(obj["values"]))
        if kind == "xos":
            return XOSValuation(tuple(tuple(c) for c in obj["clauses"]))
        if kind == "coverage":
            return CoverageValuation(
                tuple(obj["universe_weights"]), tuple(tuple(c) for c in obj["covers"])
            )
        if kind in ("budget_additive", "budget-additive"):
            return BudgetAdditiveValuation(obj["budget"], tuple(obj["values"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed {kind} valuation: {exc}") from exc
    raise ParseError(f"unknown valuation kind {kind!r}")


@dataclass(frozen=True)
class Instance:
    n: int
    m: int
    valuations: tuple[Valuation, ...]

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if not isinstance(self.n, int) or not isinstance(self.m, int) or self.n < 1:
            raise ParseError(f"need integer n >= 1 and m, got n={self.n!r}, m={self.m!r}")
        if self.m < self.n:
            raise InstanceTooSmall(f"m={self.m} < n={self.n}")
        if len(self.valuations) != self.n:
            raise ParseError(f"expected {self.n} valuations, got {len(self.valuations)}")
        for i, v in enumerate(self.valuations):
            if v.m != self.m:
                raise ParseError(f"valuation {i} is over {v.m} goods, instance has m={self.m}")

    @classmethod
    def additive(cls, rows: Sequence[Sequence]) -> "Instance":
        """Shorthand for an all-additive instance from a value matrix."""
        vals = tuple(AdditiveValuation(tuple(r)) for r in rows)
        return cls(len(vals), vals[0].m if vals else 0, vals)

    @property
    def goods(self) -> frozenset[int]:
        return frozenset(range(self.m))

    def value(self, i: int, goods: Iterable[int]) -> Fraction:
        return self.valuations[i].value(goods)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "valuations": [v.to_json() for v in self.valuations],
        }

    def digest(self) -> str:
        return hashlib.sha256(save_instance(self)).hexdigest()[:16]


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict):
        raise ParseError("instance must be a JSON object")
    try:
        n, m, vals = obj["n"], obj["m"], obj["valuations"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    if not isinstance(vals, list):
        raise ParseError("'valuations' must be a list")
    if isinstance(n, int) and isinstance(m, int) and m < n:
        raise InstanceTooSmall(f"m={m} < n={n}")
    return Instance(n, m, tuple(valuation_from_json(v) for v in vals))


def load_instance(data: bytes | str) -> Instance:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return instance_from_json(obj)


def save_instance(instance: Instance) -> bytes:
    return json.dumps(instance.to_json(), sort_keys=True, separators=(",", ":")).encode()


@dataclass(frozen=True)
class Allocation:
    """``n`` disjoint bundles plus a pool of unallocated goods."""

    bundles: tuple[frozenset[int], ...]
    pool: frozenset[int] = frozenset()

    def __post_init__(self):
        bundles = tuple(frozenset(b) for b in self.bundles)
        pool = frozenset(self.pool)
        object.__setattr__(self, "bundles", bundles)
        object.__setattr__(self, "pool", pool)
        seen: set[int] = set()
        for part in (*bundles, pool):
            if seen & part:
                raise ValueError(f"bundles overlap on goods {sorted(seen & part)}")
            seen |= part

    @property
    def n(self) -> int:
        return len(self.bundles)

    def allocated(self) -> frozenset[int]:
        return frozenset().union(*self.bundles)

    def is_complete(self, m: int) -> bool:
        return not self.pool and self.allocated() == frozenset(range(m))

    def covers_within(self, m: int) -> bool:
        return all(0 <= g < m for g in self.allocated() | self.pool)

    def values(self, instance: Instance) -> list[Fraction]:
        return [instance.value(i, b) for i, b in enumerate(self.bundles)]

    def replace(self, i: int, bundle: Iterable[int], pool: Iterable[int] | None = None):
        bundles = list(self.bundles)
        bundles[i] = frozenset(bundle)
        return Allocation(tuple(bundles), self.pool if pool is None else frozenset(pool))

    def to_json(self) -> dict:
        return {"bundles": [sorted(b) for b in self.bundles], "pool": sorted(self.pool)}

    @classmethod
    def from_json(cls, obj) -> "Allocation":
        if not isinstance(obj, dict) or "bundles" not in obj:
            raise ParseError("allocation must be an object with 'bundles'")
        try:
            return cls(tuple(obj["bundles"]), obj.get("pool", ()))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed allocation: {exc}") from exc

    def __str__(self):
        parts = ["{" + ",".join(f"g{g}" for g in sorted(b)) + "}" for b in self.bundles]
        text = "(" + ", ".join(parts) + ")"
        if self.pool:
            text += " pool={" + ",".join(f"g{g}" for g in sorted(self.pool)) + "}"
        return text
