import pytest

from linsubmod import QueryBudgetExceeded, QueryCountingOracle, Subset, evaluate, marginal
from linsubmod.objectives import CoverageObjective

from conftest import A, B, C


def test_fix_a_values(oracle_a):
    assert evaluate(oracle_a, [A, B]) == 3
    assert evaluate(oracle_a, []) == 0
    assert evaluate(oracle_a, [A, B, C]) == 4
    assert oracle_a.count == 3


def test_fix_a_marginals(oracle_a):
    assert marginal(oracle_a, B, [A]) == 1
    assert oracle_a.count == 2
    assert marginal(oracle_a, A, [A]) == 0
    assert oracle_a.count == 2  # no query when u is already in S
    assert marginal(oracle_a, C, [A, B], known_fS=3) == 1
    assert oracle_a.count == 3


def test_count_is_one_per_evaluation(oracle_a):
    S = oracle_a.subset([A])
    for i in range(1, 6):
        oracle_a.evaluate_plus(S, B)
        assert oracle_a.count == i


def test_cap_raises_on_the_next_query(fix_a):
    o = QueryCountingOracle(fix_a, cap=2)
    o.evaluate([A])
    o.evaluate([B])
    with pytest.raises(QueryBudgetExceeded):
        o.evaluate([C])
    assert o.count == 2


def test_subset_mask_and_order_agree():
    S = Subset(6, [4, 1, 3])
    assert S.elements == (4, 1, 3)
    assert S.mask == bytes([0, 1, 0, 1, 1, 0])
    assert 3 in S and 0 not in S and 99 not in S and -1 not in S
    with pytest.raises(ValueError):
        S.add(1)
    T = S.plus(0)
    assert T.elements == (4, 1, 3, 0) and len(S) == 3
    S.discard(1)
    assert S.elements == (4, 3) and 1 not in S


def test_cached_state_tracks_additions(fix_a):
    o = QueryCountingOracle(fix_a)
    S = o.subset()
    assert o.evaluate(S) == 0
    S.add(A)
    assert o.evaluate(S) == 2
    S.add(C)
    assert o.evaluate_plus(S, B) == 4
    S.discard(C)
    assert o.evaluate(S) == 2


def test_state_rebuilt_for_another_function():
    f = CoverageObjective([{1}, {2}])
    g = CoverageObjective([{1, 2, 3}, {4}])
    S = Subset(2, [0])
    assert QueryCountingOracle(f).evaluate(S) == 1
    assert QueryCountingOracle(g).evaluate(S) == 3
