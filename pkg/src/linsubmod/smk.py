"""Linear-time algorithms for a cardinality or a single knapsack constraint.

``estimate_opt`` gives a constant-factor estimate ``gamma`` of the optimum,
``fast_threshold_greedy`` runs a threshold greedy whose thresholds only span
``[gamma / e, 8 * alpha * gamma]``, and ``smk_maximize`` adds the snapshot
augmentation that makes the knapsack case a ``(1/2 - eps)`` approximation.

Elements are always scanned in increasing index order and ties go to the
lowest index.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .constraints import KnapsackInstance, cardinality
from .errors import InvalidParam
from .oracle import QueryCountingOracle, Subset
from .result import SolveResult, Stopwatch


@dataclass
class EstimatorOutput:
    gamma: float
    s_tilde: tuple[int, ...]
    trace: list[tuple[int, bool]]
    f_empty: float
    queries: int


@dataclass
class GreedyTrace:
    sequence: list[int]
    prefix_costs: list[float]
    prefix_values: list[float]
    tau: float
    rounds: int
    gamma: float
    queries: int
    estimator: EstimatorOutput | None = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return self.prefix_values[-1]

    def prefix(self, h: int) -> tuple[int, ...]:
        return tuple(self.sequence[:h])


def estimate_opt(oracle: QueryCountingOracle, knapsack: KnapsackInstance) -> EstimatorOutput:
    """One pass: keep ``u`` whenever ``f(u | S) / c(u) >= f(S)``; return ``f(S) / 4``.

    The result obeys ``gamma <= f(OPT) <= 8 * gamma``.  Uses ``n + 1`` queries.
    """
    start = oracle.count
    S = oracle.subset()
    fS = oracle.evaluate(S)
    f_empty = fS
    trace = []
    for u in knapsack.kept:
        fu = oracle.evaluate_plus(S, u)
        accept = (fu - fS) / knapsack.costs[u] >= fS
        trace.append((u, accept))
        if accept:
            S.add(u)
            fS = fu
    return EstimatorOutput(fS / 4.0, S.elements, trace, f_empty, oracle.count - start)


def max_outer_rounds(eps: float, alpha: float) -> float:
    """Upper bound ``3 + (4 + ln alpha) / eps`` on the number of threshold rounds."""
    return 3 + (4 + math.log(alpha)) / eps


def fast_threshold_greedy(oracle: QueryCountingOracle, knapsack: KnapsackInstance, eps: float,
                          alpha: float = 1.0) -> GreedyTrace:
    """Threshold greedy from ``8 * alpha * gamma`` down to ``(1 - eps) * gamma / e``.

    Every inspected candidate costs exactly one query (``f(S)`` is cached), so
    the query count depends on ``n``, ``eps`` and ``alpha`` but not on how
    quickly the budget fills.
    """
    if not 0 < eps < 1:
        raise InvalidParam(f"eps must lie in (0, 1), got {eps}")
    if not alpha >= 1:
        raise InvalidParam(f"alpha must be >= 1, got {alpha}")
    start = oracle.count
    est = estimate_opt(oracle, knapsack)
    gamma = est.gamma
    fS = est.f_empty
    seq: list[int] = []
    prefix_costs = [0.0]
    prefix_values = [fS]
    if gamma == 0:
        # f(OPT) <= 8 * gamma = 0
        return GreedyTrace(seq, prefix_costs, prefix_values, 0.0, 0, gamma, oracle.count - start, est)

    costs = knapsack.costs
    S = oracle.subset()
    spent, count = 0.0, 0
    tau = 8 * alpha * gamma
    floor = (1 - eps) * gamma / math.e
    rounds = 0
    evaluate_plus, fits, mask = oracle.evaluate_plus, knapsack.fits, S._mask
    while tau > floor:
        rounds += 1
        for u in knapsack.kept:
            if mask[u]:
                continue
            fu = evaluate_plus(S, u)
            if fits(spent, count, u) and (fu - fS) / costs[u] >= tau:
                S.add(u)
                seq.append(u)
                spent += costs[u]
                count += 1
                fS = fu
                c_now = knapsack.prefix_cost(spent, count)
                assert c_now <= 1.0 and c_now > prefix_costs[-1]
                prefix_costs.append(c_now)
                prefix_values.append(fS)
        tau *= 1 - eps
    return GreedyTrace(seq, prefix_costs, prefix_values, tau, rounds, gamma, oracle.count - start, est)


def smc_maximize(oracle: QueryCountingOracle, k: int, eps: float) -> SolveResult:
    """``(1 - 1/e - eps)``-approximation for ``|S| <= k`` with ``O(n / eps)`` queries."""
    with Stopwatch() as sw:
        knapsack = cardinality(oracle.n, k)
        start = oracle.count
        trace = fast_threshold_greedy(oracle, knapsack, eps, alpha=1.0)
    return SolveResult("smc", tuple(trace.sequence), trace.value, oracle.count - start, oracle.n,
                       param=k, eps=eps, millis=sw.millis, trace=trace)


def snapshot_count(eps: float) -> int:
    """``floor(log_{1+eps}(1/eps)) + 1``, computed without rounding trouble at exact powers."""
    i = 0
    while (1 + eps) ** (i + 1) <= 1 / eps:
        i += 1
    return i + 1


@dataclass
class Snapshot:
    index: int
    h: int
    added: int | None
    value: float


def smk_maximize(oracle: QueryCountingOracle, knapsack: KnapsackInstance, eps: float,
                 param: float | int | None = None) -> SolveResult:
    """``(1/2 - eps)``-approximation for a knapsack constraint.

    Runs the threshold greedy with ``alpha = 1/eps``, then tries to augment
    prefixes of its growth sequence (of cost at most ``eps (1+eps)^i``) with
    the best single element that still fits.  The answer is the best among the
    final greedy set, every singleton and every augmented prefix.
    """
    if not 0 < eps <= 0.5:
        raise InvalidParam(f"eps must lie in (0, 1/2], got {eps}")
    with Stopwatch() as sw:
        start = oracle.count
        trace = fast_threshold_greedy(oracle, knapsack, eps, alpha=1.0 / eps)
        best_set: tuple[int, ...] = tuple(trace.sequence)
        best_val = trace.value
        source = "greedy"

        empty = oracle.subset()
        for u in knapsack.kept:
            v = oracle.evaluate_plus(empty, u)
            if v > best_val:
                best_set, best_val, source = (u,), v, "singleton"

        snapshots: list[Snapshot] = []
        by_prefix: dict[int, Snapshot] = {}
        for i in range(snapshot_count(eps)):
            h = bisect_right(trace.prefix_costs, eps * (1 + eps) ** i) - 1
            assert h >= 0
            if h in by_prefix:
                snap = by_prefix[h]
                snapshots.append(Snapshot(i, h, snap.added, snap.value))
                continue
            S = Subset(oracle.n, trace.sequence[:h])
            fS = trace.prefix_values[h]
            spent = trace.prefix_costs[h]
            best_u, best_gain = None, -math.inf
            for u in knapsack.kept:
                if u in S:
                    gain = 0.0
                elif knapsack.fits(spent, h, u):
                    gain = oracle.evaluate_plus(S, u) - fS
                else:
                    continue
                if gain > best_gain:
                    best_u, best_gain = u, gain
            if best_u is None or best_u in S:
                snap = Snapshot(i, h, None, fS)
            else:
                snap = Snapshot(i, h, best_u, fS + best_gain)
            by_prefix[h] = snap
            snapshots.append(snap)
            if snap.value > best_val:
                members = trace.sequence[:h] + ([snap.added] if snap.added is not None else [])
                best_set, best_val, source = tuple(members), snap.value, f"snapshot{i}"

        if knapsack.forced:
            best_set = best_set + tuple(knapsack.forced)
            best_val = oracle.evaluate(best_set)
    return SolveResult("smk", best_set, best_val, oracle.count - start, oracle.n,
                       param=param, eps=eps, millis=sw.millis,
                       trace={"greedy": trace, "snapshots": snapshots, "source": source})


def smk_maximize_raw(oracle: QueryCountingOracle, raw_costs, budget: float, eps: float) -> SolveResult:
    """Normalize raw costs against ``budget`` and solve."""
    from .constraints import normalize_knapsack

    return smk_maximize(oracle, normalize_knapsack(raw_costs, budget), eps, param=budget)
