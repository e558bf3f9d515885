import itertools
import math

import numpy as np
import pytest

from linsubmod import (
    InvalidParam,
    ListExhausted,
    MatrixSearchTimeout,
    PreconditionViolated,
    QueryCountingOracle,
    SIGame,
    TooLarge,
    double_greedy,
    find_identifying_matrix,
    hard_instance,
    si_adversary_answer,
    si_solve,
    usm_reduction,
)
from linsubmod.hardness import (
    IdentifyingMatrix,
    SIReductionObjective,
    _KNOWN_MATRICES,
    _counting_lower_bound,
    _search_level,
    from_mask,
    is_identifying,
    to_mask,
)
from linsubmod.verify import _exhaustive_submodular


# --- hard cardinality family ----------------------------------------------------

def test_hard_instance_values():
    f = hard_instance(100, 2, 0.5, u=7)
    assert f.t == 8 and f.opt_value == 8
    assert f([]) == 0 and f([7]) == 8
    assert f([1, 2, 3]) == 3 and f(range(20)) == 8 and f(range(8, 30)) == 8


def test_hard_instance_incremental_state_matches_value(rng):
    f = hard_instance(30, 3, 0.7, u=4)
    o = QueryCountingOracle(f)
    for _ in range(50):
        S = rng.choice(30, size=int(rng.integers(0, 12)), replace=False).tolist()
        sub = o.subset(S)
        u = int(rng.integers(30))
        assert o.evaluate_plus(sub, u) == f(set(S) | {u})


@pytest.mark.parametrize("n,k,alpha,u", [(6, 1, 0.5, 0), (8, 2, 0.8, 3), (9, 1, 1.0, 8)])
def test_hard_instance_exhaustively_monotone_submodular(n, k, alpha, u):
    assert _exhaustive_submodular(hard_instance(n, k, alpha, u))


def test_hard_instance_validation():
    for args in ((10, 2, 0, 0), (10, 2, 1.5, 0), (10, 2, 0.5, 10), (10, 0, 0.5, 0)):
        with pytest.raises(InvalidParam):
            hard_instance(*args)


# --- SI game and adversary ------------------------------------------------------

def test_masks_round_trip():
    assert to_mask([0, 3]) == 9 and from_mask(9) == (0, 3) and from_mask(0) == ()


def test_adversary_tie_goes_to_smaller_answer():
    game = SIGame(4, 2)
    assert si_adversary_answer(game, [0]) == 0
    assert len(game.candidates) == 3


def test_adversary_empty_query_keeps_list():
    game = SIGame(4, 2)
    assert game.query([]) == 0 and len(game.candidates) == 6


def test_adversary_list_bound_fuzz(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        k = int(rng.integers(1, n + 1))
        game = SIGame(n, k)
        for _ in range(int(rng.integers(1, 8))):
            game.query(int(rng.integers(0, 1 << n)))
        assert game.list_bound_holds()
        assert len(game.candidates) >= 1


def test_adversary_stays_consistent_after_commit(rng):
    game = SIGame(8, 4)
    for _ in range(5):
        game.query(int(rng.integers(0, 256)))
    hidden = to_mask(game.commit([0, 1, 2, 3]))
    assert all((r.mask & hidden).bit_count() == r.answer for r in game.log)


def test_honest_game_answers_intersections():
    game = SIGame(6, 3, hidden=[1, 2, 5])
    assert game.query([1, 5, 0]) == 2 and game.query(0b111111) == 3
    assert game.commit() == (1, 2, 5)
    with pytest.raises(InvalidParam):
        SIGame(6, 3, hidden=[1, 2])
    with pytest.raises(InvalidParam):
        game.query([6])


def test_game_size_limits():
    with pytest.raises(TooLarge):
        SIGame(20, 10)
    assert SIGame(40, 5, hidden=range(5)).candidates is None
    with pytest.raises(PreconditionViolated):
        si_adversary_answer(SIGame(40, 5, hidden=range(5)), [0])


def test_adversary_exhaustion_is_an_error():
    game = SIGame(3, 1)
    game.candidates = game.candidates[:0]
    with pytest.raises(ListExhausted):
        si_adversary_answer(game, [0])


# --- identifying matrices -------------------------------------------------------

def test_identity_matrix_recovers_n4():
    identity = IdentifyingMatrix(4, (1, 2, 4, 8), False)
    assert is_identifying(identity.rows, 4)
    for C in itertools.combinations(range(4), 2):
        res = si_solve(SIGame(4, 2, hidden=C), identity)
        assert res.recovered == C and res.queries == 4


def test_n8_recovers_all_hidden_sets():
    M = find_identifying_matrix(8)
    assert M.q <= 8
    for C in itertools.combinations(range(8), 4):
        game = SIGame(8, 4, hidden=C)
        res = si_solve(game, M)
        assert res.recovered == C and res.queries == M.q == game.queries


def test_stored_matrices_are_identifying():
    for n, (rows, _) in _KNOWN_MATRICES.items():
        assert is_identifying(rows, n)
    assert not is_identifying((3, 5), 3)


@pytest.mark.parametrize("n", range(1, 7))
def test_live_search_matches_table(n):
    M = find_identifying_matrix(n, use_table=False)
    assert M.proven_minimal and is_identifying(M.rows, n)
    assert M.q == len(_KNOWN_MATRICES[n][0])
    assert M.q >= _counting_lower_bound(n)


def test_one_fewer_row_is_impossible_small_n():
    for n in range(2, 7):
        rows, _ = _search_level(n, len(_KNOWN_MATRICES[n][0]) - 1, 10 ** 7)
        assert rows is None


def test_search_budget_timeout():
    with pytest.raises(MatrixSearchTimeout):
        find_identifying_matrix(7, node_budget=5, use_table=False)
    with pytest.raises(TooLarge):
        find_identifying_matrix(13)


def test_dense_form():
    M = find_identifying_matrix(4)
    D = M.dense()
    assert D.shape == (M.q, 4) and set(np.unique(D)) <= {0, 1}


# --- reduction from unconstrained maximization ---------------------------------

def test_reduction_objective_formula():
    game = SIGame(6, 3, hidden=[0, 1, 2])
    f = SIReductionObjective(game)
    assert f([0, 1, 2]) == 9 and f([0, 3]) == 2 and f([]) == 0 and f(range(6)) == 0
    assert game.queries == 4


def test_reduction_at_optimum_returns_hidden_set():
    game = SIGame(8, 4, hidden=[1, 3, 5, 7])
    res = usm_reduction(lambda o: (1, 3, 5, 7), game, seed=3)
    assert res.output == (1, 3, 5, 7) and not res.flipped


def test_reduction_half_size_set_is_kept(rng):
    for seed in range(10):
        game = SIGame(8, 4, hidden=[0, 1, 2, 3])
        T = tuple(sorted(rng.choice(8, size=4, replace=False).tolist()))
        res = usm_reduction(lambda o: T, game, seed=seed)
        comp = tuple(sorted(set(range(8)) - set(T)))
        assert res.output == (comp if res.flipped else T)


def test_reduction_pads_and_samples():
    game = SIGame(8, 4, hidden=[0, 1, 2, 3])
    small = usm_reduction(lambda o: (0,), game, seed=1)
    assert len(small.output) == 4 and 0 in small.output
    big = usm_reduction(lambda o: (0, 1, 2, 3, 4, 5), game, seed=1)
    assert len(big.output) == 4 and set(big.output) <= {0, 1, 2, 3, 4, 5}
    with pytest.raises(InvalidParam):
        usm_reduction(lambda o: (), SIGame(8, 3, hidden=[0, 1, 2]))


def test_reduction_with_double_greedy_n12():
    n, half = 12, 6
    total, runs = 0, 0
    for C in itertools.combinations(range(n), half):
        solved = double_greedy(QueryCountingOracle(SIReductionObjective(SIGame(n, half, C, explicit=False))))
        for seed in range(100):
            game = SIGame(n, half, hidden=C, explicit=False)
            res = usm_reduction(lambda o: solved.solution, game, seed=seed)
            assert len(res.output) == half
            total += len(set(res.output) & set(C))
            runs += 1
    assert runs == math.comb(n, half) * 100
    assert total / runs >= half / 2
