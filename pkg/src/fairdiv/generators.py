"""Seeded random instance families with integer values in ``0..V``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InstanceTooSmall, InvalidParameter
from .model import (
    AdditiveValuation,
    BudgetAdditiveValuation,
    CoverageValuation,
    Instance,
    XOSValuation,
)

FAMILIES = ("uniform-additive", "correlated-additive", "xos", "coverage", "budget-additive")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int
    m: int
    V: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown family {self.family!r}; pick one of {FAMILIES}")
        if self.n < 1 or self.m < self.n:
            raise InstanceTooSmall(f"need 1 <= n <= m, got n={self.n}, m={self.m}")
        if self.V < 1:
            raise InvalidParameter("V must be at least 1")

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "m": self.m, "V": self.V, "seed": self.seed}


def _ints(a) -> tuple[int, ...]:
    return tuple(int(x) for x in a)


def _uniform(rng, n, m, V):
    return [AdditiveValuation(_ints(rng.integers(0, V + 1, m))) for _ in range(n)]


def _correlated(rng, n, m, V):
    # common base plus per-agent noise, clipped to the range
    base = rng.integers(0, V + 1, m)
    spread = max(1, V // 4)
    out = []
    for _ in range(n):
        noise = rng.integers(-spread, spread + 1, m)
        out.append(AdditiveValuation(_ints(np.clip(base + noise, 0, V))))
    return out


def _xos(rng, n, m, V):
    k = min(4, m)
    return [XOSValuation(tuple(_ints(rng.integers(0, V + 1, m)) for _ in range(k)))
            for _ in range(n)]


def _coverage(rng, n, m, V):
    size = 2 * m
    out = []
    for _ in range(n):
        weights = _ints(rng.integers(0, V + 1, size))
        covers = []
        for _ in range(m):
            k = int(rng.integers(1, 4))
            covers.append(frozenset(_ints(rng.choice(size, size=k, replace=False))))
        out.append(CoverageValuation(weights, tuple(covers)))
    return out


def _budget(rng, n, m, V):
    out = []
    for _ in range(n):
        values = _ints(rng.integers(0, V + 1, m))
        total = sum(values)
        budget = int(rng.integers(total // 3, total + 1)) if total else 0
        out.append(BudgetAdditiveValuation(budget, values))
    return out


_MAKERS = {
    "uniform-additive": _uniform,
    "correlated-additive": _correlated,
    "xos": _xos,
    "coverage": _coverage,
    "budget-additive": _budget,
}


def generate(spec: GeneratorSpec) -> Instance:
    """Deterministic in ``spec``: the same spec always yields the same instance."""
    rng = np.random.default_rng(spec.seed)
    vals = _MAKERS[spec.family](rng, spec.n, spec.m, spec.V)
    return Instance(spec.n, spec.m, tuple(vals))
