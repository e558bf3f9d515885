"""Comparison algorithms and the exhaustive reference solver."""
from __future__ import annotations

import heapq
import math
from typing import Sequence

import numpy as np

from .constraints import CardinalityConstraint, Feasibility, KnapsackInstance, Tracker
from .errors import InvalidParam, TooLarge
from .oracle import QueryCountingOracle
from .result import SolveResult, Stopwatch

BRUTE_FORCE_MAX_N = 24


def greedy(oracle: QueryCountingOracle, feasibility: Feasibility, name: str = "greedy",
           param=None) -> SolveResult:
    """Classic greedy: add the feasible element with the largest marginal until none fits.

    Ties go to the lowest index.  One query per inspected candidate.
    """
    with Stopwatch() as sw:
        start = oracle.count
        S = oracle.subset()
        tracker = feasibility.tracker()
        fS = oracle.evaluate(S)
        while True:
            best_u, best_fu = None, -math.inf
            for u in range(oracle.n):
                if u in S or not tracker.fits(u):
                    continue
                fu = oracle.evaluate_plus(S, u)
                if fu > best_fu:
                    best_u, best_fu = u, fu
            if best_u is None:
                break
            S.add(best_u)
            tracker.add(best_u)
            fS = best_fu
    return SolveResult(name, S.elements, fS, oracle.count - start, oracle.n, param=param,
                       millis=sw.millis)


def lazy_greedy(oracle: QueryCountingOracle, k: int) -> SolveResult:
    """Greedy under ``|S| <= k`` with stale marginals kept in a max-heap.

    By submodularity a stale marginal upper-bounds the current one, so the
    top entry is taken once it has been refreshed against the current set.
    Picks the same elements as :func:`greedy` (same tie-break).
    """
    with Stopwatch() as sw:
        start = oracle.count
        S = oracle.subset()
        # f(u) bounds f(u) - f(empty) for non-negative f, which saves a query
        fS = 0.0
        heap = []
        for u in range(oracle.n if k > 0 else 0):
            fu = oracle.evaluate_plus(S, u)
            heapq.heappush(heap, (-fu, u, 0, fu))
        while len(S) < k and heap:
            _, u, stamp, fu = heapq.heappop(heap)
            if stamp == len(S):
                S.add(u)
                fS = fu
                continue
            fu = oracle.evaluate_plus(S, u)
            heapq.heappush(heap, (-(fu - fS), u, len(S), fu))
    return SolveResult("lazy_greedy", S.elements, fS, oracle.count - start, oracle.n, param=k,
                       millis=sw.millis)


def stochastic_greedy(oracle: QueryCountingOracle, k: int, eps: float = 0.1, seed: int = 0,
                      sample_size: int | None = None) -> SolveResult:
    """Each of ``k`` rounds samples ``s = ceil((n/k) ln(1/eps))`` unchosen elements and adds the best."""
    if not 1 <= k <= oracle.n:
        raise InvalidParam(f"need 1 <= k <= n, got {k}")
    if sample_size is None:
        if not 0 < eps < 1:
            raise InvalidParam(f"eps must lie in (0, 1), got {eps}")
        sample_size = math.ceil(oracle.n / k * math.log(1 / eps))
    s = max(1, int(sample_size))
    rng = np.random.default_rng(seed)
    with Stopwatch() as sw:
        start = oracle.count
        S = oracle.subset()
        fS = oracle.evaluate(S)
        for _ in range(k):
            rest = np.array([u for u in range(oracle.n) if u not in S])
            if rest.size == 0:
                break
            sample = np.sort(rng.choice(rest, size=min(s, rest.size), replace=False))
            best_u, best_fu = None, -math.inf
            for u in sample.tolist():
                fu = oracle.evaluate_plus(S, u)
                if fu > best_fu:
                    best_u, best_fu = u, fu
            S.add(best_u)
            fS = best_fu
    return SolveResult("stochastic_greedy", S.elements, fS, oracle.count - start, oracle.n,
                       param=k, eps=eps, millis=sw.millis)


def density_greedy(oracle: QueryCountingOracle, knapsack: KnapsackInstance, param=None) -> SolveResult:
    """Repeatedly add the fitting element with the best ``f(u | S) / c(u)``."""
    with Stopwatch() as sw:
        start = oracle.count
        S = oracle.subset()
        fS = oracle.evaluate(S)
        spent, count = 0.0, 0
        while True:
            best_u, best_ratio, best_fu = None, -math.inf, 0.0
            for u in knapsack.kept:
                if u in S or not knapsack.fits(spent, count, u):
                    continue
                fu = oracle.evaluate_plus(S, u)
                ratio = (fu - fS) / knapsack.costs[u]
                if ratio > best_ratio:
                    best_u, best_ratio, best_fu = u, ratio, fu
            if best_u is None:
                break
            S.add(best_u)
            spent += knapsack.costs[best_u]
            count += 1
            fS = best_fu
        if knapsack.forced:
            for u in knapsack.forced:
                S.add(u)
            fS = oracle.evaluate(S)
    return SolveResult("density_greedy", S.elements, fS, oracle.count - start, oracle.n, param=param,
                       millis=sw.millis)


def double_greedy(oracle: QueryCountingOracle, randomized: bool = False, seed: int = 0) -> SolveResult:
    """Single pass keeping ``X <= Y``; keep ``u`` iff ``f(u | X) >= f(Y - u) - f(Y)``.

    The deterministic rule is a 1/3-approximation for unconstrained
    non-negative submodular maximization; ``randomized=True`` keeps ``u`` with
    probability ``a+ / (a+ + b+)`` instead (1/2 in expectation).
    """
    rng = np.random.default_rng(seed) if randomized else None
    with Stopwatch() as sw:
        start = oracle.count
        n = oracle.n
        X = oracle.subset()
        Y = oracle.subset(range(n))
        fX = oracle.evaluate(X)
        fY = oracle.evaluate(Y)
        for u in range(n):
            fXu = oracle.evaluate_plus(X, u)
            Y_minus = oracle.subset([v for v in Y if v != u])
            fYu = oracle.evaluate(Y_minus)
            a = fXu - fX
            b = fYu - fY
            if rng is None:
                keep = a >= b
            else:
                ap, bp = max(a, 0.0), max(b, 0.0)
                keep = True if ap + bp == 0 else rng.random() < ap / (ap + bp)
            if keep:
                X.add(u)
                fX = fXu
            else:
                Y = Y_minus
                fY = fYu
    return SolveResult("double_greedy" + ("_rand" if randomized else ""), X.elements, fX,
                       oracle.count - start, n, millis=sw.millis)


def brute_force(oracle: QueryCountingOracle, feasibility: Feasibility,
                candidates: Sequence[int] | None = None) -> tuple[tuple[int, ...], float]:
    """Exact maximum over all feasible sets, by depth-first enumeration.

    Feasibility is downward closed, so branches stop at the first infeasible
    extension.  Ties keep the lexicographically first set.
    """
    elems = list(range(oracle.n)) if candidates is None else list(candidates)
    if len(elems) > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force is limited to {BRUTE_FORCE_MAX_N} elements, got {len(elems)}")
    best_set: tuple[int, ...] = ()
    best_val = oracle.evaluate(())
    stack: list[tuple[int, list[int], Tracker]] = [(0, [], feasibility.tracker())]
    while stack:
        pos, chosen, tracker = stack.pop()
        for j in range(len(elems) - 1, pos - 1, -1):
            u = elems[j]
            if not tracker.fits(u):
                continue
            nxt = tracker.copy()
            nxt.add(u)
            members = chosen + [u]
            stack.append((j + 1, members, nxt))
        if chosen:
            v = oracle.evaluate(chosen)
            if v > best_val:
                best_set, best_val = tuple(chosen), v
    return best_set, best_val


def brute_force_cardinality(oracle: QueryCountingOracle, k: int) -> tuple[tuple[int, ...], float]:
    return brute_force(oracle, CardinalityConstraint(k))
