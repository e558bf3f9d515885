"""Maximization subject to a p-set system and d knapsack constraints.

Elements are *big* when some normalized cost exceeds ``1/lambda``.  A
``big_alg`` procedure handles the big elements; the small ones are grown by a
density-filtered greedy (``smks_basic``) or a decreasing-threshold variant
(``smks_nearly_linear``).  When the small solution overflows a budget the run
ends through :func:`set_extract` (the "event E" exit).  ``rho_guessing``
binary-searches the density target, and ``smks_maximize`` wires up the two
parameter choices ("fast" and "quality").
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .constraints import MultiKnapsackInstance, SetSystem, normalize_multi_knapsack
from .errors import InvalidParam, PreconditionViolated
from .oracle import QueryCountingOracle, Subset
from .result import SolveResult, Stopwatch

BigAlg = Callable[[QueryCountingOracle, Sequence[int], SetSystem, MultiKnapsackInstance],
                  tuple[tuple[int, ...], float]]


@dataclass
class SmksConfig:
    lam: int = 2
    rho: float = 0.0
    eps: float = 0.1
    delta: float = 0.1
    alpha_lower_inv: float = 1.0

    def __post_init__(self):
        if int(self.lam) != self.lam or self.lam < 1:
            raise InvalidParam(f"lambda must be an integer >= 1, got {self.lam}")
        if self.rho < 0:
            raise InvalidParam(f"rho must be non-negative, got {self.rho}")
        if not 0 < self.eps <= 0.25:
            raise InvalidParam(f"eps must lie in (0, 1/4], got {self.eps}")
        if not 0 < self.delta < 1:
            raise InvalidParam(f"delta must lie in (0, 1), got {self.delta}")
        if not self.alpha_lower_inv >= 1:
            raise InvalidParam("the inverse lower bound on alpha must be >= 1")


@dataclass
class SmksOutcome:
    solution: tuple[int, ...]
    event_E: bool
    value: float
    queries: int
    rounds: int = 0
    big: tuple[int, ...] = field(default=(), repr=False)


def set_extract(lam: int, S: Sequence[int], mk: MultiKnapsackInstance) -> tuple[int, ...]:
    """Pick a budget-feasible subset of an overflowing set of small elements.

    Builds ``T_1, ..., T_{lam+1}``: ``T_j`` starts from the elements rejected by
    the earlier passes and then takes elements of ``S`` in order until one does
    not fit.  Returns the ``T_j`` with the largest total cost (earliest on
    ties), which is always feasible with total cost at least ``lam/(lam+1)``.
    No oracle queries.
    """
    S = list(S)
    if any(mk.max_cost(u) > 1.0 / lam for u in S):
        raise PreconditionViolated("set_extract got a big element")
    if max(mk.loads(S), default=0.0) <= 1.0:
        raise PreconditionViolated("set_extract needs a set that overflows some budget")

    rejected: list[int] = []
    best: list[int] | None = None
    best_total = -math.inf
    for _ in range(lam + 1):
        T = list(rejected)
        inside = set(T)
        loads = mk.loads(T)
        stop = None
        for u in S:
            if u in inside:
                continue
            col = mk.column(u)
            if all(a + c <= 1.0 for a, c in zip(loads, col)):
                T.append(u)
                inside.add(u)
                loads = [a + c for a, c in zip(loads, col)]
            else:
                stop = u
                break
        assert stop is not None, "an overflowing input always rejects some element"
        total = sum(loads)
        if total > best_total:
            best, best_total = T, total
        rejected.append(stop)
    return tuple(best)


def set_extract_total(T: Sequence[int], mk: MultiKnapsackInstance) -> Fraction:
    """Exact ``sum_i c_i(T)`` (for checking the ``lam/(lam+1)`` bound without rounding)."""
    return sum((Fraction(c) for u in T for c in mk.column(u)), Fraction(0))


# --- procedures for the big elements ----------------------------------------

def big_alg_singleton(oracle: QueryCountingOracle, B: Sequence[int], system: SetSystem | None = None,
                      mk: MultiKnapsackInstance | None = None) -> tuple[tuple[int, ...], float]:
    """Best singleton of ``B``; empty set (value ``f(empty)``) when ``B`` is empty."""
    empty = oracle.subset()
    if not B:
        return (), oracle.evaluate(empty)
    best, best_val = None, -math.inf
    for u in B:
        v = oracle.evaluate_plus(empty, u)
        if v > best_val:
            best, best_val = u, v
    return (best,), best_val


def big_alg_pairs(oracle: QueryCountingOracle, B: Sequence[int], system: SetSystem,
                  mk: MultiKnapsackInstance) -> tuple[tuple[int, ...], float]:
    """Best feasible set of at most two elements of ``B`` (``O(|B|^2)`` queries)."""
    best, best_val = big_alg_singleton(oracle, B)
    B = list(B)
    for a in range(len(B)):
        Sa = oracle.subset([B[a]])
        for b in range(a + 1, len(B)):
            u, w = B[a], B[b]
            if not (mk.is_feasible((u, w)) and system.is_independent((u, w))):
                continue
            v = oracle.evaluate_plus(Sa, w)
            if v > best_val:
                best, best_val = (u, w), v
    return best, best_val


# --- small-element phase -----------------------------------------------------

def _split(mk: MultiKnapsackInstance, lam: int) -> tuple[list[int], list[int]]:
    big, small = [], []
    for u in mk.kept:
        (big if mk.max_cost(u) > 1.0 / lam else small).append(u)
    return big, small


def _overflow(loads: list[float]) -> bool:
    return max(loads, default=0.0) > 1.0


def _finish(oracle, start, S_B, f_SB, S, fS, big, rounds) -> SmksOutcome:
    if f_SB > fS:
        return SmksOutcome(tuple(S_B), False, f_SB, oracle.count - start, rounds, tuple(big))
    return SmksOutcome(S.elements, False, fS, oracle.count - start, rounds, tuple(big))


def _extract(oracle, start, lam, S, mk, big, rounds) -> SmksOutcome:
    T = set_extract(lam, S.elements, mk)
    return SmksOutcome(T, True, oracle.evaluate(T), oracle.count - start, rounds, tuple(big))


def smks_basic(oracle: QueryCountingOracle, system: SetSystem, mk: MultiKnapsackInstance, lam: int,
               rho: float, big_alg: BigAlg = big_alg_singleton) -> SmksOutcome:
    """Density-filtered greedy on the small elements, best-of with ``big_alg``.

    Each step rescans every small element (one query each, ``f(S)`` cached)
    and takes the max marginal among those that keep ``S`` independent and
    have ``f(u | S) >= rho * sum_i c_i(u)``.
    """
    SmksConfig(lam=lam, rho=rho)
    start = oracle.count
    big, small = _split(mk, lam)
    S_B, f_SB = big_alg(oracle, big, system, mk)
    S = oracle.subset()
    if not small:
        return _finish(oracle, start, S_B, f_SB, S, -math.inf, big, 0)
    fS = oracle.evaluate(S)
    loads = [0.0] * mk.d
    steps = 0
    while True:
        best_u, best_fu = None, -math.inf
        for u in small:
            if u in S or not system.can_add(S, u):
                continue
            fu = oracle.evaluate_plus(S, u)
            if fu - fS >= rho * mk.totals[u] and fu > best_fu:
                best_u, best_fu = u, fu
        if best_u is None:
            break
        steps += 1
        S.add(best_u)
        fS = best_fu
        loads = [a + c for a, c in zip(loads, mk.column(best_u))]
        if _overflow(loads):
            return _extract(oracle, start, lam, S, mk, big, steps)
    return _finish(oracle, start, S_B, f_SB, S, fS, big, steps)


def nearly_linear_round_bound(n: int, eps: float) -> int:
    """``ceil(log_{1+eps}(n/eps)) + 1``."""
    return math.ceil(math.log(n / eps) / math.log1p(eps)) + 1


def smks_nearly_linear(oracle: QueryCountingOracle, system: SetSystem, mk: MultiKnapsackInstance,
                       lam: int, rho: float, eps: float,
                       big_alg: BigAlg = big_alg_singleton) -> SmksOutcome:
    """Decreasing-threshold version of :func:`smks_basic`.

    The threshold starts at ``M = max_u f({u})`` (``n`` extra queries) and is
    divided by ``1 + eps`` each round until it drops below
    ``eps * M / ((1 + eps) * n)``.
    """
    SmksConfig(lam=lam, rho=rho, eps=eps)
    start = oracle.count
    big, small = _split(mk, lam)
    S_B, f_SB = big_alg(oracle, big, system, mk)
    S = oracle.subset()
    if not small:
        return _finish(oracle, start, S_B, f_SB, S, -math.inf, big, 0)
    fS = oracle.evaluate(S)
    n = len(mk.kept)
    M = max(oracle.evaluate_plus(S, u) for u in mk.kept)
    if M <= 0:
        return _finish(oracle, start, S_B, f_SB, S, fS, big, 0)
    tau = M
    stop = eps * M / ((1 + eps) * n)
    loads = [0.0] * mk.d
    rounds = 0
    while tau >= stop:
        rounds += 1
        for u in small:
            if u in S or not system.can_add(S, u):
                continue
            fu = oracle.evaluate_plus(S, u)
            if fu - fS >= max(tau, rho * mk.totals[u]):
                S.add(u)
                fS = fu
                loads = [a + c for a, c in zip(loads, mk.column(u))]
                if _overflow(loads):
                    return _extract(oracle, start, lam, S, mk, big, rounds)
        tau /= 1 + eps
    return _finish(oracle, start, S_B, f_SB, S, fS, big, rounds)


# --- guessing rho ------------------------------------------------------------

@dataclass
class RhoSearchTrace:
    lo: int
    hi_initial: int
    probes: list[tuple[int, float, bool, float]]
    final_rho: float
    iterations: int


def rho_grid_top(n: int, p: int, d: int, alpha_lower_inv: float, delta: float,
                 eps: float | None = None) -> int:
    """Initial upper index of the grid; ``eps`` selects the nearly-linear variant's grid."""
    low = 1.0 / (p + 1 + alpha_lower_inv + d)
    if eps is not None:
        low *= 1 - 2 * eps
    return math.ceil((math.log(2 * n / p) - math.log(low)) / math.log1p(delta))


def rho_iteration_bound(n: int, p: int, d: int, alpha_lower_inv: float, delta: float,
                        eps: float | None = None) -> float:
    """``2 + log2[log_{1+delta}(2n/p) - log_{1+delta}(low)]`` binary-search iterations."""
    low = 1.0 / (p + 1 + alpha_lower_inv + d)
    if eps is not None:
        low *= 1 - 2 * eps
    span = (math.log(2 * n / p) - math.log(low)) / math.log1p(delta)
    return 2 + math.log2(span)


def rho_guessing(oracle: QueryCountingOracle, system: SetSystem, mk: MultiKnapsackInstance, lam: int,
                 delta: float, variant: str = "basic", eps: float = 0.1,
                 big_alg: BigAlg = big_alg_singleton, alpha_lower_inv: float = 1.0,
                 name: str = "rho_guessing") -> SolveResult:
    """Binary search over ``rho(i) = (1+delta)^i * max_u f({u}) / (p + 1 + 1/alpha_low + d)``.

    A probe that ends through the overflow exit moves the lower index up,
    otherwise the upper index comes down.  One more run at the final lower
    index, then the best of every probed solution is returned.  The
    nearly-linear variant scales the grid by ``1 - 2 eps``.
    """
    if variant not in ("basic", "nearly_linear"):
        raise InvalidParam(f"unknown variant {variant!r}")
    SmksConfig(lam=lam, eps=eps, delta=delta, alpha_lower_inv=alpha_lower_inv)
    with Stopwatch() as sw:
        start = oracle.count
        p, d, n = system.p, mk.d, len(mk.kept)
        empty = oracle.subset()
        m = max((oracle.evaluate_plus(empty, u) for u in mk.kept), default=0.0)
        grid_eps = eps if variant == "nearly_linear" else None
        scale = (1 - 2 * eps) if grid_eps is not None else 1.0
        base = scale * m / (p + 1 + alpha_lower_inv + d)

        def rho(i: int) -> float:
            return (1 + delta) ** i * base

        def run(r: float) -> SmksOutcome:
            if variant == "basic":
                return smks_basic(oracle, system, mk, lam, r, big_alg)
            return smks_nearly_linear(oracle, system, mk, lam, r, eps, big_alg)

        lo = 0
        hi = hi0 = rho_grid_top(n, p, d, alpha_lower_inv, delta, grid_eps)
        probes = []
        results: list[SmksOutcome] = []
        if m > 0:
            while hi - lo > 1:
                mid = -((lo + hi) // -2)
                out = run(rho(mid))
                probes.append((mid, rho(mid), out.event_E, out.value))
                results.append(out)
                if out.event_E:
                    lo = mid
                else:
                    hi = mid
        final = run(rho(lo))
        best = final
        for out in results:
            if out.value > best.value:
                best = out
    trace = RhoSearchTrace(lo, hi0, probes, rho(lo), len(probes))
    return SolveResult(name, best.solution, best.value, oracle.count - start, oracle.n,
                       eps=eps if variant == "nearly_linear" else delta, millis=sw.millis,
                       trace=trace)


def preprocess(system: SetSystem, raw_costs, budgets: Sequence[float] | None = None) -> MultiKnapsackInstance:
    """Normalize budgets to 1 and drop self-loops and over-budget elements."""
    loops = [u for u in range(system.n) if not system.is_independent([u])]
    return normalize_multi_knapsack(raw_costs, budgets, drop=loops)


def smks_maximize(oracle: QueryCountingOracle, system: SetSystem, mk: MultiKnapsackInstance,
                  eps: float, flavor: str = "fast") -> SolveResult:
    """Approximation for a p-set system plus d knapsacks.

    ``fast``: nearly-linear search with ``lam = 2``, ``delta = eps`` and the
    best-singleton procedure; ratio ``1 / ((1 + 6 eps)(p + 1 + 7d/4))``.
    ``quality``: basic search with ``lam = 3``,
    ``delta = eps / (2p + 4d + 4)`` and best-pair enumeration; ratio
    ``1 / (p + 1.5556 + 13d/9 + eps)``.

    ``mk`` should come from :func:`preprocess`.  Zero-cost elements are added
    at the end, in index order, as long as they keep the set independent.
    """
    if not 0 < eps <= 0.25:
        raise InvalidParam(f"eps must lie in (0, 1/4], got {eps}")
    p, d = system.p, mk.d
    if flavor == "fast":
        lam = 2
        res = rho_guessing(oracle, system, mk, lam, delta=eps, variant="nearly_linear", eps=eps,
                           big_alg=big_alg_singleton, alpha_lower_inv=d * (lam - 1),
                           name="smks_fast")
    elif flavor == "quality":
        lam = 3
        res = rho_guessing(oracle, system, mk, lam, delta=eps / (2 * p + 4 * d + 4), variant="basic",
                           eps=eps, big_alg=big_alg_pairs,
                           alpha_lower_inv=max(d * (lam - 1) / 2, 1), name="smks_quality")
    else:
        raise InvalidParam(f"unknown flavor {flavor!r}")
    res.eps = eps
    if mk.forced:
        start = oracle.count - res.queries
        S = Subset(oracle.n, res.solution)
        for u in mk.forced:
            if system.can_add(S, u):
                S.add(u)
        if len(S) > len(res.solution):
            res.solution = S.elements
            res.value = oracle.evaluate(S)
            res.queries = oracle.count - start
    return res


def fast_inverse_ratio(p: int, d: int, eps: float) -> float:
    return (1 + 6 * eps) * (p + 1 + 1.75 * d)


def quality_inverse_ratio(p: int, d: int, eps: float) -> float:
    return p + 1.5556 + 13 / 9 * d + eps


def quality_d_coefficient(lam: int = 3) -> float:
    """``lam/2 - 1/2 + 1/lam + 1/lam^2``; equals 13/9 at ``lam = 3``."""
    return lam / 2 - 0.5 + 1 / lam + 1 / lam ** 2


def rho_star(f_opt: float, p: int, d: int, lam: int, alpha: float, big_in_opt: int,
             eps: float | None = None) -> float:
    """Density target from the guarantee of the basic (``eps=None``) or nearly-linear run."""
    if eps is None:
        return f_opt / ((p + 1 + 1 / alpha) / (1 + 1 / lam) + d - big_in_opt / lam)
    return (1 - eps) * f_opt / (((1 + eps) * p + 1 + 1 / alpha) / (1 + 1 / lam) + d - big_in_opt / lam)
