import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linsubmod import (
    EmptyAfterNormalization,
    InvalidParam,
    MatroidIntersection,
    PartitionMatroid,
    UniformMatroid,
    can_add,
    cardinality,
    normalize_knapsack,
    normalize_multi_knapsack,
)
from linsubmod.constraints import AllOf, CardinalityConstraint, KnapsackConstraint, SetSystem


def test_normalize_example():
    inst = normalize_knapsack([2, 5, 0, 12], 10)
    assert inst.kept == (0, 1)
    assert inst.costs[:2] == (0.2, 0.5)
    assert inst.forced == (2,) and inst.dropped == (3,)
    assert math.isinf(inst.costs[3])


def test_normalize_all_at_budget_and_identity():
    inst = normalize_knapsack([3, 3, 3], 3)
    assert inst.costs == (1.0, 1.0, 1.0) and inst.kept == (0, 1, 2)
    raw = (0.25, 1.0, 0.5)
    assert normalize_knapsack(raw, 1).costs == raw


def test_normalize_errors():
    with pytest.raises(EmptyAfterNormalization):
        normalize_knapsack([5, 6], 1)
    with pytest.raises(InvalidParam):
        normalize_knapsack([1], 0)
    with pytest.raises(InvalidParam):
        normalize_knapsack([-1], 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=1, max_size=12), st.integers(1, 20))
def test_normalization_idempotent(raw, budget):
    if all(c > budget for c in raw):
        return
    once = normalize_knapsack([c for c in raw], budget)
    twice = normalize_knapsack(once, 1.0)
    assert twice == once


def test_cardinality_form():
    inst = cardinality(9, 9)
    assert inst.is_feasible(range(9))
    assert not cardinality(10, 9).is_feasible(range(10))
    assert inst.fits(0.0, 8, 0) and not inst.fits(0.0, 9, 0)
    with pytest.raises(InvalidParam):
        cardinality(3, 0)
    with pytest.raises(InvalidParam):
        cardinality(3, 4)


def test_can_add_examples():
    u = UniformMatroid(5, 2)
    assert not can_add(u, [0, 1], 3)
    parts = [0] * 6 + [1] * 3
    pm = PartitionMatroid(parts, {0: 5, 1: 5})
    assert can_add(pm, [0, 1, 2, 3], 4)
    for system in (u, pm):
        assert all(can_add(system, [], v) for v in range(system.n))


def test_partition_limits_sequence_and_rank():
    pm = PartitionMatroid([0, 0, 1, 1, 1], [1, 2])
    assert pm.rank == 3
    assert pm.is_independent([0, 2, 3]) and not pm.is_independent([0, 1])


def test_intersection_p():
    m = MatroidIntersection([UniformMatroid(4, 2), PartitionMatroid([0, 0, 1, 1], [1, 1])])
    assert m.p == 2
    assert m.is_independent([0, 2]) and not m.is_independent([0, 1])
    assert not m.can_add([0, 2], 3)


def test_custom_set_system():
    s = SetSystem(4, lambda S: sum(S) <= 3, p=2)
    assert s.can_add([1], 2) and not s.can_add([1, 2], 3)


def test_downward_closure_fuzz(rng):
    systems = [UniformMatroid(10, 4), PartitionMatroid(rng.integers(0, 3, 10).tolist(), [1, 2, 3]),
               MatroidIntersection([UniformMatroid(10, 5), PartitionMatroid(rng.integers(0, 4, 10).tolist(),
                                                                           [2, 2, 2, 2])])]
    checked = 0
    while checked < 1000:
        system = systems[checked % 3]
        T = [int(v) for v in rng.permutation(10)[: rng.integers(0, 7)]]
        if not system.is_independent(T):
            continue
        S = [v for v in T if rng.random() < 0.5]
        assert system.is_independent(S)
        checked += 1


def test_multi_knapsack_normalization():
    mk = normalize_multi_knapsack([[1, 2, 0, 2], [2, 1, 0, 3]], [2, 4], drop=[3])
    assert mk.kept == (0, 1) and mk.forced == (2,) and mk.dropped == (3,)
    assert mk.column(0) == (0.5, 0.5)
    assert mk.totals[0] == 1.0 and mk.d == 2 and mk.n == 4
    assert mk.is_feasible([0]) and not mk.is_feasible([0, 1, 3])
    again = normalize_multi_knapsack(mk, drop=[3])
    assert again.kept == mk.kept and again.forced == mk.forced
    with pytest.raises(EmptyAfterNormalization):
        normalize_multi_knapsack([[3.0]], [1])
    with pytest.raises(InvalidParam):
        normalize_multi_knapsack([[1.0]], [1, 2])


def test_trackers_compose():
    rule = AllOf(CardinalityConstraint(2), KnapsackConstraint(normalize_knapsack([0.5, 0.6, 0.4])))
    assert rule.is_feasible([0, 2]) and not rule.is_feasible([0, 1])
    t = rule.tracker()
    t.add(0)
    c = t.copy()
    c.add(2)
    assert t.fits(2) and not c.fits(1)
