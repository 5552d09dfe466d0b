import math
import random
from fractions import Fraction

import pytest

from fairdiv.matching import (
    NEG_INF,
    POS_INF,
    assignment_key,
    bottleneck_assignment,
    max_weight_assignment,
    min_weight_perfect_assignment,
    objective_value,
)

from oracles import enumerate_assignments, random_matrix

SOLVER = {"max": max_weight_assignment, "min": min_weight_perfect_assignment,
          "bottleneck": bottleneck_assignment}


def test_e1_weights():
    # arguments n*v(g) + tail for E1
    A = [[22, 14, 4, 4], [23, 5, 9, 7]]
    assert max_weight_assignment(A).assignment == (1, 0)
    assert max_weight_assignment(A).objective == 37
    assert bottleneck_assignment(A).assignment == (1, 0)
    assert bottleneck_assignment(A).objective == 14
    inv = [[Fraction(1, a) for a in row] for row in A]
    res = min_weight_perfect_assignment(inv)
    assert res.assignment == (1, 0)
    assert res.objective == Fraction(1, 14) + Fraction(1, 23)


def test_ties_pick_lexicographically_smallest():
    assert max_weight_assignment([[1, 1], [1, 1]]).assignment == (0, 1)
    assert min_weight_perfect_assignment([[0, 0, 0], [0, 0, 0]]).assignment == (0, 1)
    assert bottleneck_assignment([[5, 5], [5, 5]]).assignment == (0, 1)


def test_sentinels_avoided_when_possible():
    W = [[POS_INF, 1], [1, 2]]
    assert min_weight_perfect_assignment(W).assignment == (1, 0)
    W = [[NEG_INF, 1], [1, 2]]
    assert max_weight_assignment(W).assignment == (1, 0)
    W = [[NEG_INF, NEG_INF], [1, 2]]
    res = max_weight_assignment(W)
    assert res.objective == NEG_INF


def test_wrong_sentinel_rejected():
    with pytest.raises(ValueError):
        max_weight_assignment([[POS_INF]])
    with pytest.raises(ValueError):
        min_weight_perfect_assignment([[NEG_INF]])


def test_shape_errors():
    with pytest.raises(ValueError):
        max_weight_assignment([])
    with pytest.raises(ValueError):
        max_weight_assignment([[1], [2]])
    with pytest.raises(ValueError):
        max_weight_assignment([[1, 2], [3]])


@pytest.mark.parametrize("kind", ["max", "min", "bottleneck"])
def test_against_enumeration(kind):
    rng = random.Random({"max": 1, "min": 2, "bottleneck": 3}[kind])
    for _ in range(80):
        n = rng.randint(1, 4)
        m = rng.randint(n, 6)
        W = random_matrix(rng, n, m, kind)
        best, opt = enumerate_assignments(W, kind)
        res = SOLVER[kind](W)
        assert len(set(res.assignment)) == n
        assert assignment_key(W, res.assignment, kind) == best
        assert res.assignment == opt[0]
        assert objective_value(W, res.assignment, kind) == res.objective


def test_float_weights_are_exact():
    # 0.1 + 0.2 != 0.3 in floats; the exact sums decide
    W = [[0.1, 0.3], [0.2, 0.0]]
    res = max_weight_assignment(W)
    assert res.assignment == (1, 0)
    assert isinstance(res.objective, float)


def test_assignment_key_kinds():
    W = [[1, 2], [3, 4]]
    assert assignment_key(W, (0, 1), "max") == (0, 5)
    assert assignment_key(W, (0, 1), "min") == (0, -5)
    assert assignment_key(W, (1, 0), "bottleneck") == 2
    with pytest.raises(ValueError):
        assignment_key(W, (0, 1), "median")
