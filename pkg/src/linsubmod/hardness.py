"""Hard instances and the Set Identification game.

``hard_instance`` builds the family on which sublinear-query algorithms for a
constant cardinality cannot do better than about ``alpha / 2``.  ``SIGame``
hides a ``k``-subset ``C*`` and answers ``|S & C*|``; it can also play the
adversary that keeps the largest consistent part of the candidate list.
``si_solve`` recovers ``C*`` with a binary query matrix that has at most one
binary solution, and ``usm_reduction`` turns an unconstrained solver into an
SI strategy.

Subsets inside the game are bitmasks (bit ``i`` is element ``i``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidParam, ListExhausted, MatrixSearchTimeout, PreconditionViolated, TooLarge
from .oracle import QueryCountingOracle, SetFunction

EXPLICIT_MAX_N = 16
SI_SOLVE_MAX_N = 12
LIVE_SEARCH_MAX_N = 10


# --- constant-cardinality hard family -------------------------------------

class HardCardinalityInstance(SetFunction):
    """``f_u(S) = t`` if ``u`` is in ``S``, else ``min(t, |S|)``, with ``t = 2k / alpha``."""

    def __init__(self, n: int, k: int, alpha: float, u: int):
        if not 0 < alpha <= 1:
            raise InvalidParam(f"alpha must lie in (0, 1], got {alpha}")
        if not 0 <= u < n:
            raise InvalidParam(f"special element {u} outside ground set of size {n}")
        if k < 1:
            raise InvalidParam(f"k must be positive, got {k}")
        self.n, self.k, self.alpha, self.u = n, k, alpha, u
        self.t = 2 * k / alpha

    @property
    def opt_value(self) -> float:
        return self.t

    def value(self, elements):
        elements = set(elements)
        return self.t if self.u in elements else float(min(self.t, len(elements)))

    def new_state(self):
        return [0, False]

    def add_to_state(self, state, u):
        state[0] += 1
        state[1] = state[1] or u == self.u

    def state_value(self, state):
        return self.t if state[1] else float(min(self.t, state[0]))

    def value_plus(self, state, u):
        if state[1] or u == self.u:
            return self.t
        return float(min(self.t, state[0] + 1))


def hard_instance(n: int, k: int, alpha: float, u: int) -> HardCardinalityInstance:
    return HardCardinalityInstance(n, k, alpha, u)


# --- Set Identification -----------------------------------------------------

def to_mask(elements: Iterable[int]) -> int:
    m = 0
    for u in elements:
        m |= 1 << int(u)
    return m


def from_mask(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(int(mask).bit_length()) if mask >> i & 1)


def _all_k_masks(n: int, k: int) -> np.ndarray:
    return np.array([to_mask(c) for c in itertools.combinations(range(n), k)], dtype=np.uint64)


@dataclass
class QueryRecord:
    mask: int
    answer: int
    list_size: int | None


class SIGame:
    """Hidden ``k``-subset of ``{0..n-1}``; a query ``S`` returns ``|S & C*|``.

    With ``hidden`` given the game answers honestly.  Without it the game is
    an adversary: every answer is picked by :func:`si_adversary_answer` and
    ``C*`` is only fixed by :meth:`commit`.  The explicit candidate list is
    kept whenever ``n <= 16``.
    """

    def __init__(self, n: int, k: int, hidden: Iterable[int] | None = None, explicit: bool | None = None):
        if not 1 <= k <= n:
            raise InvalidParam(f"need 1 <= k <= n, got k={k}, n={n}")
        self.n, self.k = n, k
        self.hidden = None if hidden is None else to_mask(hidden)
        if self.hidden is not None and (self.hidden.bit_count() != k or self.hidden >> n):
            raise InvalidParam("hidden set must be a k-subset of the ground set")
        self.explicit = n <= EXPLICIT_MAX_N if explicit is None else explicit
        if self.hidden is None and not self.explicit:
            raise TooLarge(f"the adversary needs an explicit list (n <= {EXPLICIT_MAX_N})")
        if self.explicit and n > EXPLICIT_MAX_N:
            raise TooLarge(f"explicit candidate lists are limited to n <= {EXPLICIT_MAX_N}")
        self.family_size = math.comb(n, k)
        self.candidates = _all_k_masks(n, k) if self.explicit else None
        self.log: list[QueryRecord] = []

    @property
    def queries(self) -> int:
        return len(self.log)

    @property
    def is_adversary(self) -> bool:
        return self.hidden is None

    def query(self, S: Iterable[int] | int) -> int:
        mask = S if isinstance(S, int) else to_mask(S)
        if mask >> self.n:
            raise InvalidParam("query mentions elements outside the ground set")
        if self.is_adversary:
            a = si_adversary_answer(self, mask)
        else:
            a = (mask & self.hidden).bit_count()
            if self.explicit:
                self.candidates = self.candidates[_counts(self.candidates, mask) == a]
        self.log.append(QueryRecord(mask, a, None if self.candidates is None else len(self.candidates)))
        return a

    def list_bound_holds(self) -> bool:
        """``|L_i| >= |C| / (k+1)^i`` after every logged query."""
        for i, rec in enumerate(self.log, start=1):
            if rec.list_size is not None and rec.list_size * (self.k + 1) ** i < self.family_size:
                return False
        return True

    def commit(self, output: Iterable[int] = ()) -> tuple[int, ...]:
        """Fix ``C*`` among the consistent candidates, least overlapping ``output``."""
        if not self.is_adversary:
            return from_mask(self.hidden)
        out = to_mask(output)
        overlap = _counts(self.candidates, out)
        self.hidden = int(self.candidates[int(np.argmin(overlap))])
        return from_mask(self.hidden)


def _counts(masks: np.ndarray, query: int) -> np.ndarray:
    return np.bitwise_count(masks & np.uint64(query))


def si_adversary_answer(game: SIGame, S: Iterable[int] | int) -> int:
    """Answer that keeps the largest part of the candidate list (ties: smallest answer)."""
    if game.candidates is None:
        raise PreconditionViolated("the adversary needs an explicit candidate list")
    mask = S if isinstance(S, int) else to_mask(S)
    counts = _counts(game.candidates, mask)
    sizes = np.bincount(counts, minlength=game.k + 1)
    a = int(np.argmax(sizes))
    game.candidates = game.candidates[counts == a]
    if len(game.candidates) == 0:
        raise ListExhausted("candidate list became empty")
    return a


# --- identifying matrices ---------------------------------------------------

# Row bitmasks with at most one binary solution; n <= 7 are proven minimal by
# exhaustive search, the rest are the best found within a desk budget.
_KNOWN_MATRICES: dict[int, tuple[tuple[int, ...], bool]] = {
    1: ((1,), True),
    2: ((1, 2), True),
    3: ((1, 2, 4), True),
    4: ((9, 5, 14), True),
    5: ((16, 9, 5, 14), True),
    6: ((32, 16, 9, 5, 14), True),
    7: ((65, 33, 18, 106, 124), True),
    8: ((255, 95, 63, 235, 103, 113), False),
    9: ((511, 255, 351, 319, 491, 359, 369), False),
}


@dataclass(frozen=True)
class IdentifyingMatrix:
    n: int
    rows: tuple[int, ...]
    proven_minimal: bool
    nodes: int = 0

    @property
    def q(self) -> int:
        return len(self.rows)

    def dense(self) -> np.ndarray:
        return np.array([[r >> i & 1 for i in range(self.n)] for r in self.rows], dtype=np.int8)


def answer_table(rows: Sequence[int], n: int) -> np.ndarray:
    """``out[x, j] = |x & rows[j]|`` for every ``x`` in ``{0,1}^n``."""
    xs = np.arange(1 << n, dtype=np.uint64)
    return np.stack([_counts(xs, r) for r in rows], axis=1) if rows else np.zeros((1 << n, 0), np.uint8)


def is_identifying(rows: Sequence[int], n: int) -> bool:
    """True iff ``x -> Q x`` is injective on ``{0,1}^n``."""
    table = answer_table(rows, n)
    return len(np.unique(table, axis=0)) == 1 << n


def _difference_vectors(n: int) -> np.ndarray:
    # x != y in {0,1}^n collide iff Q (x - y) = 0; canonical sign: first nonzero is +1
    zs = [z for z in itertools.product((-1, 0, 1), repeat=n)
          if any(z) and next(v for v in z if v) == 1]
    return np.array(zs, dtype=np.int8)


def _search_level(n: int, q: int, budget: int) -> tuple[list[int] | None, int]:
    """Depth-first set cover: choose ``q`` rows so every difference vector has a nonzero product."""
    Z = _difference_vectors(n)
    row_masks = np.arange(1, 1 << n)
    R = ((row_masks[:, None] >> np.arange(n)) & 1).astype(np.int8)
    cover = (R @ Z.T.astype(np.int16)) != 0
    order = np.argsort(cover.sum(axis=0), kind="stable")  # hardest vectors first
    cover = cover[:, order]
    weights = 1 << np.arange(cover.shape[1], dtype=object)
    cbits = [int(np.dot(c.astype(object), weights)) if c.any() else 0 for c in cover]
    zrows = []
    for j in range(cover.shape[1]):
        rs = np.flatnonzero(cover[:, j]).tolist()
        rs.sort(key=lambda r: -cbits[r].bit_count())
        zrows.append(rs)
    full = (1 << cover.shape[1]) - 1
    nodes = 0
    dead: set[tuple[int, int]] = set()

    def dfs(unc: int, left: int, chosen: list[int]):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise MatrixSearchTimeout(f"n={n}, q={q}: node budget {budget} exhausted")
        if unc == 0:
            return list(chosen)
        if left == 0 or (unc, left) in dead:
            return None
        best = max((b & unc).bit_count() for b in cbits)
        if unc.bit_count() > left * best:
            dead.add((unc, left))
            return None
        j = (unc & -unc).bit_length() - 1
        for r in zrows[j]:
            chosen.append(r)
            res = dfs(unc & ~cbits[r], left - 1, chosen)
            chosen.pop()
            if res is not None:
                return res
        dead.add((unc, left))
        return None

    found = dfs(full, q, [])
    return (None if found is None else [int(row_masks[r]) for r in found]), nodes


def _counting_lower_bound(n: int) -> int:
    # q answers in {0..n} must separate 2^n vectors
    q = 1
    while (n + 1) ** q < 1 << n:
        q += 1
    return q


@lru_cache(maxsize=None)
def _verified_table_entry(n: int) -> IdentifyingMatrix | None:
    entry = _KNOWN_MATRICES.get(n)
    if entry is None:
        return None
    rows, proven = entry
    if not is_identifying(rows, n):
        raise AssertionError(f"stored matrix for n={n} is not identifying")
    return IdentifyingMatrix(n, rows, proven)


def find_identifying_matrix(n: int, node_budget: int = 2_000_000, use_table: bool = True) -> IdentifyingMatrix:
    """Smallest-``q`` binary matrix whose system ``Q x = s`` has at most one binary solution.

    Tries ``q`` upward from the counting bound.  Levels proven impossible are
    skipped; running out of ``node_budget`` raises :class:`MatrixSearchTimeout`.
    Stored matrices are re-verified by enumerating ``{0,1}^n``.
    """
    if not 1 <= n <= SI_SOLVE_MAX_N:
        raise TooLarge(f"matrix search supports 1 <= n <= {SI_SOLVE_MAX_N}, got {n}")
    if use_table:
        hit = _verified_table_entry(n)
        if hit is not None:
            return hit
    if n > LIVE_SEARCH_MAX_N:
        raise MatrixSearchTimeout(f"live search is limited to n <= {LIVE_SEARCH_MAX_N}")
    spent = 0
    for q in range(_counting_lower_bound(n), n + 1):
        rows, used = _search_level(n, q, node_budget - spent)
        spent += used
        if rows is not None:
            assert is_identifying(rows, n)
            return IdentifyingMatrix(n, tuple(rows), True, spent)
    raise AssertionError("the identity matrix is always identifying")


@dataclass
class SISolveResult:
    recovered: tuple[int, ...]
    queries: int
    matrix: IdentifyingMatrix
    answers: tuple[int, ...] = field(default=())


def si_solve(game: SIGame, matrix: IdentifyingMatrix | None = None) -> SISolveResult:
    """Query each row set of an identifying matrix, then solve ``Q x = s`` over ``{0,1}^n``."""
    n = game.n
    if n > SI_SOLVE_MAX_N:
        raise TooLarge(f"si_solve supports n <= {SI_SOLVE_MAX_N}, got {n}")
    if matrix is None:
        matrix = find_identifying_matrix(n)
    start = game.queries
    answers = tuple(game.query(r) for r in matrix.rows)
    table = answer_table(matrix.rows, n)
    hits = np.flatnonzero((table == np.array(answers)).all(axis=1))
    if len(hits) != 1:
        raise AssertionError(f"expected one binary solution, found {len(hits)}")
    return SISolveResult(from_mask(int(hits[0])), game.queries - start, matrix, answers)


# --- reduction from SI to unconstrained maximization ------------------------

class SIReductionObjective(SetFunction):
    """``f(S) = |S & C*| * (n/2 - |S \\ C*|)``; every evaluation is one SI query."""

    monotone = False

    def __init__(self, game: SIGame):
        self.game = game
        self.n = game.n

    def value(self, elements):
        elements = set(elements)
        a = self.game.query(elements)
        return float(a * (self.n // 2 - (len(elements) - a)))


@dataclass
class ReductionResult:
    output: tuple[int, ...]
    solver_set: tuple[int, ...]
    flipped: bool
    queries: int


def usm_reduction(usm_solver: Callable[[QueryCountingOracle], object], game: SIGame,
                  seed: int = 0) -> ReductionResult:
    """Run ``usm_solver`` on the reduction objective and round its set to size ``n/2``.

    ``usm_solver`` receives an oracle and returns a SolveResult or a set.  The
    solver's set is replaced by its complement when that scores higher, then
    padded with, or sampled down to, a uniformly random subset of size ``n/2``.
    """
    n = game.n
    if n % 2 or game.k != n // 2:
        raise InvalidParam("the reduction needs an even n and k = n/2")
    start = game.queries
    oracle = QueryCountingOracle(SIReductionObjective(game))
    res = usm_solver(oracle)
    T = set(getattr(res, "solution", res))
    solver_set = tuple(sorted(T))
    comp = set(range(n)) - T
    flipped = oracle.evaluate(sorted(T)) < oracle.evaluate(sorted(comp))
    if flipped:
        T, comp = comp, T
    rng = np.random.default_rng(seed)
    half = n // 2
    if len(T) <= half:
        pad = rng.choice(sorted(comp), size=half - len(T), replace=False) if half > len(T) else []
        out = T | {int(v) for v in pad}
    else:
        out = {int(v) for v in rng.choice(sorted(T), size=half, replace=False)}
    return ReductionResult(tuple(sorted(out)), solver_set, flipped, game.queries - start)
