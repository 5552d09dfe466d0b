"""Generalized p-mean welfare.

``p`` is represented as ``NEG_INF`` (``-math.inf``) for the egalitarian
case or as a :class:`~fractions.Fraction` in ``(-inf, 1]``; ``0`` selects
Nash welfare.  Results are exact Fractions whenever the formula stays
rational (``p`` in ``{-inf, -1, 1}``) and floats otherwise.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .errors import InvalidParameter

NEG_INF = -math.inf

Real = Fraction | float


def parse_p(p) -> Fraction | float:
    """Normalize a p-mean parameter.

    Accepts ``-inf`` (float or the strings ``"-inf"``/``"-infinity"``), ints,
    Fractions, floats and decimal or ``"p/q"`` strings.

    >>> parse_p("-1/2")
    Fraction(-1, 2)
    >>> parse_p("-inf")
    -inf
    """
    if isinstance(p, str):
        text = p.strip().lower()
        if text in ("-inf", "-infinity", "neg-infinity"):
            return NEG_INF
        try:
            p = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParameter(f"cannot parse p={p!r}") from exc
    if isinstance(p, float):
        if p == NEG_INF:
            return NEG_INF
        if math.isnan(p) or math.isinf(p):
            raise InvalidParameter(f"p={p!r} is not allowed")
        p = Fraction(p)
    if isinstance(p, bool) or not isinstance(p, (int, Fraction)):
        raise InvalidParameter(f"cannot interpret p={p!r}")
    p = Fraction(p)
    if p > 1:
        raise InvalidParameter(f"p={p} outside (-inf, 1]")
    return p


def is_neg_inf(p) -> bool:
    return isinstance(p, float) and p == NEG_INF


def format_p(p) -> str:
    p = parse_p(p)
    if is_neg_inf(p):
        return "-inf"
    return str(p)


def _power(v: Fraction, p: Fraction) -> Real:
    """``v**p`` for ``v >= 0``; exact for integer p, ``inf`` for ``0**negative``."""
    if v == 0:
        if p < 0:
            return math.inf
        return Fraction(0)
    if p.denominator == 1:
        return Fraction(v) ** int(p)
    return float(v) ** float(p)


def power_sum(values: Sequence, p) -> Real:
    """Sum of ``v_i ** p`` for finite nonzero ``p``."""
    p = parse_p(p)
    if is_neg_inf(p) or p == 0:
        raise InvalidParameter("power_sum needs finite nonzero p")
    terms = [_power(Fraction(v), p) for v in values]
    if any(isinstance(t, float) for t in terms):
        return math.fsum(float(t) for t in terms)
    return sum(terms, Fraction(0))


def _root(x: Real, p: Fraction) -> Real:
    """``x ** (1/p)`` with exact results when ``1/p`` is an integer."""
    if isinstance(x, float) and math.isinf(x):
        # only reachable for p < 0 with a zero value
        return Fraction(0)
    if x == 0:
        return Fraction(0) if p > 0 else math.inf
    inv = 1 / p
    if isinstance(x, Fraction) and inv.denominator == 1:
        return x ** int(inv)
    return float(x) ** float(inv)


def _geometric(values: Sequence, exponents: Sequence[Fraction]) -> Real:
    """``prod v_i ** e_i`` for nonnegative exponents summing to 1."""
    if any(v == 0 for v in values):
        return Fraction(0)
    if len(set(exponents)) == 1:
        prod = math.prod(Fraction(v) for v in values)
        try:
            return float(prod) ** float(exponents[0])
        except OverflowError:
            pass
    return math.exp(math.fsum(float(e) * math.log(v) for v, e in zip(values, exponents)))


def p_mean(values: Sequence, p) -> Real:
    """``((1/n) * sum v_i**p) ** (1/p)``, with the min / geometric-mean limits.

    Any zero value with ``p <= 0`` yields 0.

    >>> p_mean([8, 10], "-inf"), p_mean([8, 10], 1), p_mean([8, 10], -1)
    (Fraction(8, 1), Fraction(9, 1), Fraction(80, 9))
    """
    p = parse_p(p)
    values = [Fraction(v) for v in values]
    n = len(values)
    if n == 0:
        raise ValueError("p_mean of an empty vector")
    if is_neg_inf(p):
        return min(values)
    if p == 0:
        return _geometric(values, [Fraction(1, n)] * n)
    if p < 0 and any(v == 0 for v in values):
        return Fraction(0)
    s = power_sum(values, p)
    return _root(s / n, p)


def weighted_p_mean(values: Sequence, p, weights: Sequence | None = None) -> Real:
    """``(sum eta_i * v_i**p) ** (1/p)``.

    ``weights`` default to ``1/n`` each, in which case the result equals
    :func:`p_mean`.  For ``p = 0`` the weighted geometric mean with
    exponents ``eta_i / sum(eta)`` is used; ``p = -inf`` ignores weights.
    """
    p = parse_p(p)
    values = [Fraction(v) for v in values]
    n = len(values)
    if weights is None:
        weights = [Fraction(1, n)] * n
    weights = [Fraction(w) for w in weights]
    if len(weights) != n:
        raise InvalidParameter(f"need {n} weights, got {len(weights)}")
    if any(w <= 0 for w in weights):
        raise InvalidParameter("welfare weights must be positive")
    if is_neg_inf(p):
        return min(values)
    if p == 0:
        total = sum(weights)
        return _geometric(values, [w / total for w in weights])
    if p < 0 and any(v == 0 for v in values):
        return Fraction(0)
    terms = []
    for v, w in zip(values, weights):
        t = _power(v, p)
        terms.append(float(w) * t if isinstance(t, float) else w * t)
    if any(isinstance(t, float) for t in terms):
        s: Real = math.fsum(float(t) for t in terms)
    else:
        s = sum(terms, Fraction(0))
    return _root(s, p)


def nash_product(values: Sequence) -> Fraction:
    """Exact product of values; the comparison key for Nash welfare."""
    return math.prod((Fraction(v) for v in values), start=Fraction(1))
