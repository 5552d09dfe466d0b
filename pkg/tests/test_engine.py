from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fairdiv.engine as engine
from fairdiv.engine import (
    EngineConfig,
    EngineResult,
    champion_claim,
    decycle,
    default_max_steps,
    engine_loop,
    envy_graph,
    path_claim,
    run,
    safe_extend,
)
from fairdiv.errors import CharityOverflow, InvalidParameter, StepLimitExceeded
from fairdiv.model import Allocation, Instance
from fairdiv.seeding import seed
from fairdiv.verification import check_alpha_efx, check_ef1

from conftest import instances

EPS = Fraction(1, 20)


def alloc(*bundles, pool=()):
    return Allocation(tuple(frozenset(b) for b in bundles), frozenset(pool))


# -- config ------------------------------------------------------------------


def test_config_modes():
    a = EngineConfig("half-efx", "1/10")
    assert (a.mode, a.alpha, a.c, a.complete) == ("A", Fraction(2, 5), 1, True)
    b = EngineConfig("charity", EPS)
    assert (b.mode, b.alpha, b.c, b.complete) == ("B", Fraction(19, 20), 0, False)
    assert EngineConfig().alpha == Fraction(1, 2)


@pytest.mark.parametrize("mode, eps", [("A", "1/2"), ("A", -1), ("B", 0), ("B", 1),
                                       ("C", 0), ("A", "x")])
def test_config_rejects(mode, eps):
    with pytest.raises(InvalidParameter):
        EngineConfig(mode, eps)


def test_default_max_steps(e1):
    assert default_max_steps(e1, EngineConfig()) == max(10 * 2 * 4, 5 * 5)
    assert default_max_steps(e1, EngineConfig("B", EPS)) > default_max_steps(e1, EngineConfig())


# -- envy graph and decycling ---------------------------------------------


def test_envy_graph(e1):
    # both agents value g0 at 10, above any bundle of the other goods
    assert envy_graph(e1, alloc({0}, {1, 2, 3})) == [[], [0]]
    assert envy_graph(e1, alloc({1, 2, 3}, {0})) == [[1], []]
    assert envy_graph(e1, alloc({0, 1}, {2, 3})) == [[], [0]]


def test_decycle_two_cycle():
    inst = Instance.additive([[1, 2], [2, 1]])
    X = decycle(inst, alloc({0}, {1}))
    assert X.bundles == (frozenset({1}), frozenset({0}))


def test_decycle_acyclic_noop(e1):
    X = alloc({1}, {0}, pool={2, 3})
    assert decycle(e1, X) == X


def test_decycle_three_cycle():
    inst = Instance.additive([[1, 2, 0], [0, 1, 2], [2, 0, 1]])
    X = alloc({0}, {1}, {2})
    Z = decycle(inst, X)
    assert Z.values(inst) == [2, 2, 2]
    assert sorted(map(sorted, Z.bundles)) == [[0], [1], [2]]
    assert envy_graph(inst, Z) == [[], [], []]


# -- extensions -----------------------------------------------------------


def test_safe_extend_e1_first_step(e1):
    X = safe_extend(e1, alloc({1}, {0}, pool={2, 3}), 0, 2, EngineConfig())
    assert X == alloc({1, 2}, {0}, pool={3})
    # agent 1: best removal from {g1,g2} is worth 3, against its own 10
    assert check_alpha_efx(e1, X, 1)[0]


def test_safe_extend_zero_good_commits():
    inst = Instance.additive([[3, 1, 0], [1, 3, 0]])
    X = safe_extend(inst, alloc({0}, {1}, pool={2}), 0, 2, EngineConfig("B", EPS))
    assert X == alloc({0, 2}, {1})


def test_safe_extend_rejects_large_good():
    inst = Instance.additive([[5, 0, 0], [4, 5, 6]])
    X = alloc({0}, {1}, pool={2})
    assert safe_extend(inst, X, 0, 2, EngineConfig("B", EPS)) is None
    # mode A commits regardless
    assert safe_extend(inst, X, 0, 2, EngineConfig()) == alloc({0, 2}, {1})


def test_safe_extend_preconditions():
    inst = Instance.additive([[1, 2, 0], [2, 1, 0]])
    with pytest.raises(ValueError):
        safe_extend(inst, alloc({0}, {1}, pool={2}), 0, 1, EngineConfig())
    inst = Instance.additive([[1, 2, 0], [1, 2, 0]])
    with pytest.raises(ValueError):  # agent 1 is envied by agent 0
        safe_extend(inst, alloc({0}, {1}, pool={2}), 1, 2, EngineConfig())


# -- claims ------------------------------------------------------------------


def test_champion_claim_scan_order():
    inst = Instance.additive([[1, 0, 5, 5], [0, 1, 0, 0]])
    X = champion_claim(inst, alloc({0}, {1}, pool={2, 3}))
    # agent 0 drops g2 first (goods scanned ascending) and keeps g3
    assert X == alloc({3}, {1}, pool={0, 2})


def test_champion_claim_none():
    inst = Instance.additive([[5, 0, 1], [0, 5, 1]])
    assert champion_claim(inst, alloc({0}, {1}, pool={2})) is None


def test_champion_claim_geometric_threshold():
    inst = Instance.additive([[20, 0, 21], [0, 1, 0]])
    X = alloc({0}, {1}, pool={2})
    assert champion_claim(inst, X, epsilon=EPS) is None  # 20 >= 0.95 * 21
    assert champion_claim(inst, X) == alloc({2}, {1}, pool={0})


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 6).flatmap(
    lambda m: st.tuples(st.just(m),
                        st.lists(st.lists(st.integers(0, 9), min_size=m, max_size=m),
                                 min_size=2, max_size=2))))
def test_champion_claim_properties(data):
    m, rows = data
    inst = Instance.additive(rows)
    X = alloc({0}, {1}, pool=range(2, m))
    before = X.values(inst)
    Z = champion_claim(inst, X)
    if Z is None:
        assert all(before[i] >= inst.value(i, X.pool) for i in range(2))
        return
    after = Z.values(inst)
    changed = [i for i in range(2) if Z.bundles[i] != X.bundles[i]]
    assert len(changed) == 1
    j = changed[0]
    assert after[j] > before[j]
    claimed = Z.bundles[j]
    assert claimed <= X.pool
    for k in range(2):
        for g in claimed:
            assert inst.value(k, claimed - {g}) <= after[k]
    assert Z.pool == (X.pool - claimed) | X.bundles[j]


# -- full engine ---------------------------------------------------------------


def test_e1_mode_a(e1):
    Y = seed(e1, 0).allocation
    res = run(e1, Y, EngineConfig())
    assert res.allocation == alloc({1, 2, 3}, {0})
    assert res.allocation.values(e1) == [8, 10]
    assert (res.extensions, res.rotations, res.steps) == (2, 0, 2)
    assert res.contract.ok
    assert check_alpha_efx(e1, res.allocation, 1)[0]


def test_m_equals_n_returns_seed():
    inst = Instance.additive([[3, 1, 2], [1, 3, 2], [2, 2, 2]])
    Y = seed(inst, 0).allocation
    for cfg in (EngineConfig(), EngineConfig("B", EPS)):
        res = run(inst, Y, cfg)
        assert res.allocation == Y and res.steps == 0


def test_identical_agents_split_evenly():
    inst = Instance.additive([[1] * 4, [1] * 4])
    res = run(inst, seed(inst, 1).allocation, EngineConfig())
    assert [len(b) for b in res.allocation.bundles] == [2, 2]
    assert check_alpha_efx(inst, res.allocation, 1)[0]


def test_mode_b_zero_pool_absorbed():
    inst = Instance.additive([[4, 3, 0, 0], [3, 4, 0, 0]])
    res = run(inst, alloc({0}, {1}, pool={2, 3}), EngineConfig("B", EPS))
    assert res.allocation.pool == frozenset()
    assert res.extensions == 2 and res.claims == 0


def test_mode_b_one_huge_good():
    inst = Instance.additive([[1, 0, 100], [0, 1, 0]])
    res = engine_loop(inst, alloc({0}, {1}, pool={2}), EngineConfig("B", EPS))
    assert res.claims == 1
    assert res.claims_geometric == 1
    assert res.allocation.bundles[0] >= {2}
    assert not res.overflow


# agent 1 envies agent 0, nobody envies the pool, and every single-good
# extension breaks (1 - eps)-EFX: only a path claim makes progress
STUCK = Instance.additive([[20, 5, 0, 10, 8, 11, 9, 17], [20, 5, 0, 15, 6, 11, 11, 15]])
STUCK_X = alloc({0, 3}, {1, 2, 4, 7}, pool={5, 6})


def test_stuck_state_has_no_claim_or_extension():
    cfg = EngineConfig("B", EPS)
    assert champion_claim(STUCK, STUCK_X) is None
    assert envy_graph(STUCK, STUCK_X) == [[], [0]]
    for s in (0, 1):
        for g in (5, 6):
            eng = engine._Engine(STUCK, STUCK_X, cfg)
            assert not eng.extension_ok(s, g)


def test_path_claim_self_case():
    X = path_claim(STUCK, STUCK_X)
    # agent 0 values X_0 + g5 at 41 and keeps the minimal envied part {g0, g5};
    # g3 goes back to the pool
    assert X == alloc({0, 5}, {1, 2, 4, 7}, pool={3, 6})
    assert X.values(STUCK) == [31, 26]


def test_path_claim_along_path():
    # agent 0 envies agent 1; agent 1 (not agent 0) envies part of X_0 + g2
    inst = Instance.additive([[1, 5, 0], [2, 2, 3]])
    X = alloc({0}, {1}, pool={2})
    assert envy_graph(inst, X) == [[1], []]
    Z = path_claim(inst, X)
    assert Z == alloc({1}, {2}, pool={0})
    assert Z.values(inst) == [5, 3]


def test_path_claim_none_without_envy():
    inst = Instance.additive([[5, 0, 0], [0, 5, 0]])
    assert path_claim(inst, alloc({0}, {1}, pool={2})) is None


def test_engine_leaves_stuck_state():
    res = engine_loop(STUCK, STUCK_X, EngineConfig("B", EPS, check_invariants=True))
    assert res.path_claims >= 1
    assert not res.overflow and len(res.allocation.pool) < 2


def test_step_limit(e1):
    Y = seed(e1, 0).allocation
    with pytest.raises(StepLimitExceeded):
        engine_loop(e1, Y, EngineConfig(max_steps=1))


def test_run_checks_seed(e1):
    with pytest.raises(ValueError):
        run(e1, alloc({1, 2}, {0}, pool={3}), EngineConfig())
    with pytest.raises(ValueError):
        run(e1, alloc({1}, {0}, pool={2}), EngineConfig())
    with pytest.raises(ValueError):  # agent 1 prefers pool good g2 to g3
        run(e1, alloc({0}, {3}, pool={1, 2}), EngineConfig())


def test_overflow_flag_and_error(monkeypatch):
    inst = Instance.additive([[5, 0, 0, 0, 0], [0, 5, 0, 0, 0]])
    Y = alloc({0}, {1}, pool={2, 3, 4})
    monkeypatch.setattr(engine, "engine_loop",
                        lambda I, Y, cfg: EngineResult(Y, overflow=True))
    res = run(inst, Y, EngineConfig("B", EPS))
    assert res.overflow and res.contract.failed() == ["pool_small"]
    with pytest.raises(CharityOverflow) as info:
        run(inst, Y, EngineConfig("B", EPS), raise_on_overflow=True)
    assert info.value.result.allocation == Y


@settings(max_examples=60, deadline=None)
@given(instances(max_n=4, max_m=7), st.sampled_from(["-inf", -1, 0, 1]))
def test_invariants_every_step(inst, p):
    Y = seed(inst, p).allocation
    for cfg in (EngineConfig(check_invariants=True),
                EngineConfig("B", EPS, check_invariants=True)):
        res = run(inst, Y, cfg)
        Z = res.allocation
        assert res.contract.ok or res.overflow
        assert check_ef1(inst, Z)[0]
        assert all(z >= y for z, y in zip(Z.values(inst), Y.values(inst)))
        if cfg.mode == "A":
            assert Z.is_complete(inst.m)
            assert check_alpha_efx(inst, Z, Fraction(1, 2))[0]
            assert res.extensions == len(Y.pool)
        else:
            assert check_alpha_efx(inst, Z, cfg.alpha)[0]
            pool_vals = [inst.value(i, Z.pool) for i in range(inst.n)]
            assert all(v >= pv for v, pv in zip(Z.values(inst), pool_vals))
