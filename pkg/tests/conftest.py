from fractions import Fraction
import random
from itertools import product

import pytest
from hypothesis import strategies as st

from fairdiv.model import (
    AdditiveValuation,
    Allocation,
    BudgetAdditiveValuation,
    CoverageValuation,
    Instance,
    XOSValuation,
)

E1_ROWS = [[10, 6, 1, 1], [10, 1, 3, 2]]


@pytest.fixture
def e1():
    return Instance.additive(E1_ROWS)


def all_allocations(n, m):
    """Every complete allocation, by owner vector; plain itertools, no numpy."""
    for owners in product(range(n), repeat=m):
        bundles = [set() for _ in range(n)]
        for g, i in enumerate(owners):
            bundles[i].add(g)
        yield owners, Allocation(tuple(frozenset(b) for b in bundles))


def random_valuation(rng, kind, m):
    def rat():
        return Fraction(rng.randint(0, 40), rng.randint(1, 4))

    if kind == "additive":
        return AdditiveValuation(tuple(rat() for _ in range(m)))
    if kind == "xos":
        return XOSValuation(tuple(tuple(rat() for _ in range(m))
                                  for _ in range(rng.randint(1, 3))))
    if kind == "coverage":
        u = rng.randint(1, 2 * m)
        covers = tuple(frozenset(rng.sample(range(u), rng.randint(0, min(3, u))))
                       for _ in range(m))
        return CoverageValuation(tuple(rat() for _ in range(u)), covers)
    return BudgetAdditiveValuation(rat() + 1, tuple(rat() for _ in range(m)))


KINDS = ["additive", "xos", "coverage", "budget"]


@st.composite
def valuations(draw, m):
    kind = draw(st.sampled_from(KINDS))
    return random_valuation(random.Random(draw(st.integers(0, 2**32))), kind, m)


@st.composite
def instances(draw, max_n=3, max_m=6):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(n, max_m))
    return Instance(n, m, tuple(draw(valuations(m)) for _ in range(n)))


def frac(x):
    return Fraction(x)
