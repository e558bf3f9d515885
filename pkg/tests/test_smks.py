import math
from fractions import Fraction

import numpy as np
import pytest

from linsubmod import (
    AllOf,
    InvalidParam,
    MultiKnapsackConstraint,
    PartitionMatroid,
    PreconditionViolated,
    QueryCountingOracle,
    SystemConstraint,
    UniformMatroid,
    big_alg_pairs,
    big_alg_singleton,
    brute_force,
    greedy,
    modular_objective,
    normalize_multi_knapsack,
    preprocess,
    rho_guessing,
    set_extract,
    smks_basic,
    smks_maximize,
    smks_nearly_linear,
)
from linsubmod.constraints import CardinalityConstraint
from linsubmod.instances import random_small_objective
from linsubmod.smks import (
    fast_inverse_ratio,
    nearly_linear_round_bound,
    quality_d_coefficient,
    quality_inverse_ratio,
    rho_iteration_bound,
    rho_star,
    set_extract_total,
)
from linsubmod.verify import smks_fixture, smks_opt


def mk_of(costs, budgets=None, system=None):
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    if system is None:
        return normalize_multi_knapsack(costs, budgets)
    return preprocess(system, costs, budgets)


# --- set_extract --------------------------------------------------------------

def test_set_extract_hand_trace():
    mk = mk_of([[0.4, 0.4, 0.4]])
    T = set_extract(1, [0, 1, 2], mk)
    assert T == (0, 1)
    assert set_extract_total(T, mk) == Fraction(0.4) * 2


@pytest.mark.parametrize("lam", [1, 2, 3, 5])
def test_set_extract_bound_fuzz(rng, lam):
    for _ in range(100):
        d = int(rng.integers(1, 4))
        n = 30
        C = rng.integers(1, 64 // lam + 1, size=(d, n)) / 64
        mk = mk_of(C)
        order = rng.permutation(n).tolist()
        S, loads = [], np.zeros(d)
        for u in order:
            S.append(u)
            loads += C[:, u]
            if loads.max() > 1:
                break
        else:
            continue
        T = set_extract(lam, S, mk)
        assert set(T) <= set(S)
        assert mk.is_feasible(T)
        assert set_extract_total(T, mk) >= Fraction(lam, lam + 1)


def test_set_extract_preconditions():
    mk = mk_of([[0.4, 0.4, 0.7]])
    with pytest.raises(PreconditionViolated):
        set_extract(1, [0, 1], mk)  # fits the budget
    with pytest.raises(PreconditionViolated):
        set_extract(2, [0, 1, 2], mk)  # 0.7 > 1/2 is big


def test_set_extract_makes_no_queries():
    mk = mk_of([[0.3] * 5])
    o = QueryCountingOracle(modular_objective([1.0] * 5))
    set_extract(3, range(5), mk)
    assert o.count == 0


# --- big element procedures ---------------------------------------------------

def test_big_alg_singleton(oracle_a):
    assert big_alg_singleton(oracle_a, []) == ((), 0)
    assert big_alg_singleton(oracle_a, [2]) == ((2,), 1)
    assert big_alg_singleton(oracle_a, [0, 2]) == ((0,), 2)


def test_big_alg_pairs_skips_infeasible_pair():
    f = modular_objective([5.0, 4.0, 3.0])
    mk = mk_of([[0.6, 0.6, 0.3]])
    system = UniformMatroid(3, 3)
    S, v = big_alg_pairs(QueryCountingOracle(f), [0, 1, 2], system, mk)
    assert S == (0, 2) and v == 8
    S, v = big_alg_pairs(QueryCountingOracle(f), [1], system, mk)
    assert S == (1,) and v == 4


def test_big_alg_pairs_beats_every_feasible_pair(rng):
    for _ in range(30):
        n = int(rng.integers(2, 8))
        f = random_small_objective(rng, n)
        mk = mk_of(rng.integers(1, 11, size=(2, n)) / 10)
        system = UniformMatroid(n, 2)
        _, v = big_alg_pairs(QueryCountingOracle(f), list(range(n)), system, mk)
        for a in range(n):
            assert v >= f([a])
            for b in range(a + 1, n):
                if mk.is_feasible((a, b)):
                    assert v >= f([a, b]) - 1e-12


# --- small-element phase ------------------------------------------------------

def test_lambda_one_has_no_big_elements(rng):
    n = 8
    f = random_small_objective(rng, n, "coverage")
    mk = mk_of(rng.integers(1, 11, size=(1, n)) / 10)
    out = smks_basic(QueryCountingOracle(f), UniformMatroid(n, n), mk, 1, 0.0)
    assert out.big == ()


def test_rho_zero_is_greedy_until_overflow(rng):
    n = 12
    for _ in range(20):
        f = random_small_objective(rng, n, "coverage")
        mk = mk_of([[0.01] * n])
        k = int(rng.integers(1, n + 1))
        out = smks_basic(QueryCountingOracle(f), UniformMatroid(n, k), mk, 2, 0.0)
        ref = greedy(QueryCountingOracle(f), CardinalityConstraint(k))
        assert not out.event_E
        assert out.value == pytest.approx(ref.value)


def test_basic_overflow_goes_through_set_extract():
    f = modular_objective([1.0] * 6)
    mk = mk_of([[0.3] * 6])
    out = smks_basic(QueryCountingOracle(f), UniformMatroid(6, 6), mk, 3, 0.0)
    assert out.event_E and mk.is_feasible(out.solution) and len(out.solution) == 3


def test_nearly_linear_round_bound(rng):
    eps = 0.1
    for _ in range(20):
        n = int(rng.integers(3, 20))
        f = random_small_objective(rng, n)
        mk = mk_of(rng.integers(1, 5, size=(1, n)) / 100)
        out = smks_nearly_linear(QueryCountingOracle(f), UniformMatroid(n, n), mk, 2, 0.0, eps)
        assert out.rounds <= nearly_linear_round_bound(n, eps)
    with pytest.raises(InvalidParam):
        smks_nearly_linear(QueryCountingOracle(f), UniformMatroid(n, n), mk, 2, 0.0, 0.3)


def test_nearly_linear_matches_basic_on_binary_weights(rng):
    for _ in range(30):
        n = int(rng.integers(3, 12))
        f = modular_objective(rng.integers(0, 2, size=n).astype(float).tolist())
        parts = rng.integers(0, 3, size=n).tolist()
        system = PartitionMatroid(parts, {q: 2 for q in range(3)})
        mk = mk_of(rng.integers(1, 11, size=(2, n)) / 20, system=system)
        a = smks_basic(QueryCountingOracle(f), system, mk, 2, 0.5)
        b = smks_nearly_linear(QueryCountingOracle(f), system, mk, 2, 0.5, 0.1)
        assert a.value == b.value and a.event_E == b.event_E


def test_density_guarantee_over_rho_sweep(rng):
    lam = 2
    for _ in range(20):
        f, system, mk = smks_fixture(rng)
        rule = AllOf(SystemConstraint(system), MultiKnapsackConstraint(mk))
        opt_set, opt = brute_force(QueryCountingOracle(f), rule)
        if opt == 0:
            continue
        big_in_opt = sum(mk.max_cost(u) > 1 / lam for u in opt_set)
        alpha = 1 / big_in_opt if big_in_opt else math.inf
        target = rho_star(opt, system.p, mk.d, lam, alpha, big_in_opt)
        for r in np.linspace(0, 2 * target, 17):
            out = smks_basic(QueryCountingOracle(f), system, mk, lam, float(r))
            assert mk.is_feasible(out.solution) and system.is_independent(out.solution)
            if out.event_E:
                assert out.value >= lam * r / (lam + 1) - 1e-9
            elif r <= target:
                assert out.value >= lam * target / (lam + 1) - 1e-9


# --- rho guessing -------------------------------------------------------------

def test_rho_iteration_bound(rng):
    for _ in range(20):
        f, system, mk = smks_fixture(rng)
        for delta in (0.5, 0.1, 0.01):
            res = rho_guessing(QueryCountingOracle(f), system, mk, 2, delta)
            bound = rho_iteration_bound(len(mk.kept), system.p, mk.d, 1.0, delta)
            assert res.trace.iterations <= bound


def test_rho_guessing_single_element():
    f = modular_objective([3.0])
    system = UniformMatroid(1, 1)
    res = rho_guessing(QueryCountingOracle(f), system, mk_of([[0.5]], system=system), 2, 0.1)
    assert res.solution == (0,) and res.value == 3


def test_rho_guessing_validation(oracle_a):
    system = UniformMatroid(3, 3)
    mk = mk_of([[0.5, 0.5, 0.5]], system=system)
    for delta in (0, 1):
        with pytest.raises(InvalidParam):
            rho_guessing(oracle_a, system, mk, 2, delta)
    with pytest.raises(InvalidParam):
        rho_guessing(oracle_a, system, mk, 2, 0.1, variant="other")


# --- full algorithm -----------------------------------------------------------

def test_ratio_constants():
    assert quality_d_coefficient(3) == pytest.approx(13 / 9)
    assert fast_inverse_ratio(1, 2, 0.1) == pytest.approx(1.6 * 5.5)
    assert quality_inverse_ratio(1, 1, 0) == pytest.approx(2.5556 + 13 / 9)


@pytest.mark.parametrize("flavor,inv", [("fast", fast_inverse_ratio), ("quality", quality_inverse_ratio)])
def test_smks_guarantee(rng, flavor, inv):
    for _ in range(25):
        f, system, mk = smks_fixture(rng)
        res = smks_maximize(QueryCountingOracle(f), system, mk, 0.1, flavor)
        assert mk.is_feasible(res.solution) and system.is_independent(res.solution)
        assert res.value * inv(system.p, mk.d, 0.1) >= smks_opt(f, system, mk) - 1e-9


def test_smks_appends_zero_cost_elements():
    f = modular_objective([1.0, 2.0, 5.0])
    system = UniformMatroid(3, 3)
    mk = mk_of([[0.6, 0.6, 0.0]], system=system)
    assert mk.forced == (2,)
    res = smks_maximize(QueryCountingOracle(f), system, mk, 0.1, "fast")
    assert 2 in res.solution and res.value == f(res.solution)


def test_smks_validation(oracle_a):
    system = UniformMatroid(3, 3)
    mk = mk_of([[0.5, 0.5, 0.5]], system=system)
    with pytest.raises(InvalidParam):
        smks_maximize(oracle_a, system, mk, 0.3)
    with pytest.raises(InvalidParam):
        smks_maximize(oracle_a, system, mk, 0.1, "other")
