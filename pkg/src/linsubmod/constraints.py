"""Feasibility structures: cardinality, knapsack, multi-knapsack and set systems.

Knapsack budgets are normalized to 1.  Elements whose cost exceeds the budget
are dropped, zero-cost elements are set aside as *forced* (the solver wrappers
append them to the final answer), and the rest are divided by the budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyAfterNormalization, InvalidParam
from .oracle import Subset


@dataclass(frozen=True)
class KnapsackInstance:
    """Normalized single knapsack; ``costs[u]`` is ``inf`` for dropped and 0 for forced elements.

    ``k`` is set when the instance encodes a cardinality constraint; the
    budget check then counts elements instead of summing ``1/k`` floats.
    """

    costs: tuple[float, ...]
    kept: tuple[int, ...]
    forced: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()
    k: int | None = None

    @property
    def n(self) -> int:
        return len(self.costs)

    def fits(self, spent: float, count: int, u: int) -> bool:
        if self.k is not None:
            return count < self.k
        return spent + self.costs[u] <= 1.0

    def total_cost(self, elements: Iterable[int]) -> float:
        return float(sum(self.costs[u] for u in elements))

    def prefix_cost(self, spent: float, count: int) -> float:
        return count / self.k if self.k is not None else spent

    def is_feasible(self, elements: Iterable[int]) -> bool:
        elements = list(elements)
        if any(math.isinf(self.costs[u]) for u in elements):
            return False
        if self.k is not None:
            return len(elements) <= self.k
        return self.total_cost(elements) <= 1.0


def normalize_knapsack(raw_costs: Sequence[float] | KnapsackInstance, B: float = 1.0) -> KnapsackInstance:
    if isinstance(raw_costs, KnapsackInstance):
        raw_costs = raw_costs.costs
    if not B > 0:
        raise InvalidParam(f"budget must be positive, got {B}")
    costs, kept, forced, dropped = [], [], [], []
    for u, c in enumerate(raw_costs):
        c = float(c)
        if c < 0:
            raise InvalidParam(f"negative cost for element {u}")
        if c > B:
            dropped.append(u)
            costs.append(math.inf)
        elif c == 0:
            forced.append(u)
            costs.append(0.0)
        else:
            kept.append(u)
            costs.append(c / B)
    if len(dropped) == len(costs):
        raise EmptyAfterNormalization("every element costs more than the budget")
    return KnapsackInstance(tuple(costs), tuple(kept), tuple(forced), tuple(dropped))


def cardinality(n: int, k: int) -> KnapsackInstance:
    """The knapsack form of ``|S| <= k``: every element costs ``1/k``."""
    if not 1 <= k <= n:
        raise InvalidParam(f"need 1 <= k <= n, got k={k}, n={n}")
    return KnapsackInstance(tuple([1.0 / k] * n), tuple(range(n)), k=k)


@dataclass(frozen=True)
class MultiKnapsackInstance:
    """``d`` normalized knapsacks; ``costs`` has shape ``(d, n)``."""

    costs: np.ndarray
    kept: tuple[int, ...]
    forced: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()
    totals: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.totals:
            object.__setattr__(self, "totals", tuple(float(t) for t in self.costs.sum(axis=0)))
        object.__setattr__(self, "_cols", [tuple(float(x) for x in col) for col in self.costs.T])

    @property
    def d(self) -> int:
        return self.costs.shape[0]

    @property
    def n(self) -> int:
        return self.costs.shape[1]

    def column(self, u: int) -> tuple[float, ...]:
        return self._cols[u]

    def max_cost(self, u: int) -> float:
        return max(self._cols[u])

    def loads(self, elements: Iterable[int]) -> list[float]:
        out = [0.0] * self.d
        for u in elements:
            for i, c in enumerate(self._cols[u]):
                out[i] += c
        return out

    def is_feasible(self, elements: Iterable[int]) -> bool:
        return max(self.loads(elements), default=0.0) <= 1.0


def normalize_multi_knapsack(raw_costs, budgets: Sequence[float] | None = None,
                             drop: Iterable[int] = ()) -> MultiKnapsackInstance:
    """Scale row ``i`` by ``1/budgets[i]``, drop over-budget elements and split off zero-total ones.

    ``drop`` lists extra elements to discard (e.g. self-loops of a set system).
    """
    if isinstance(raw_costs, MultiKnapsackInstance):
        raw_costs = raw_costs.costs
    C = np.atleast_2d(np.asarray(raw_costs, dtype=float)).copy()
    d, n = C.shape
    budgets = [1.0] * d if budgets is None else [float(b) for b in budgets]
    if len(budgets) != d:
        raise InvalidParam(f"{len(budgets)} budgets for {d} cost rows")
    if any(not b > 0 for b in budgets):
        raise InvalidParam("budgets must be positive")
    if (C < 0).any():
        raise InvalidParam("costs must be non-negative")
    C /= np.asarray(budgets)[:, None]
    extra = set(drop)
    kept, forced, dropped = [], [], []
    for u in range(n):
        col = C[:, u]
        if u in extra or (col > 1.0).any():
            dropped.append(u)
            C[:, u] = np.inf
        elif col.sum() == 0:
            forced.append(u)
        else:
            kept.append(u)
    if len(dropped) == n:
        raise EmptyAfterNormalization("every element violates some budget")
    return MultiKnapsackInstance(C, tuple(kept), tuple(forced), tuple(dropped))


class SetSystem:
    """Downward-closed family given by an independence oracle.

    ``p`` is declared by the caller for custom systems; ``rank`` is an upper
    bound on the size of independent sets.
    """

    def __init__(self, n: int, is_independent: Callable[[Sequence[int]], bool], p: int = 1,
                 rank: int | None = None):
        self.n = n
        self._oracle = is_independent
        self.p = p
        self.rank = n if rank is None else rank

    def is_independent(self, elements: Iterable[int]) -> bool:
        return bool(self._oracle(list(elements)))

    def can_add(self, S: Subset | Sequence[int], u: int) -> bool:
        return self.is_independent([*S, u])


class UniformMatroid(SetSystem):
    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        self.p = 1
        self.rank = min(n, k)

    def is_independent(self, elements):
        return len(set(elements)) <= self.k

    def can_add(self, S, u):
        return u in S or len(S) < self.k


class PartitionMatroid(SetSystem):
    """At most ``limits[part]`` elements from each part."""

    def __init__(self, parts: Sequence[int], limits: Mapping[int, int] | Sequence[int]):
        self.parts = [int(x) for x in parts]
        self.n = len(self.parts)
        if isinstance(limits, Mapping):
            self.limits = {int(k): int(v) for k, v in limits.items()}
        else:
            self.limits = dict(enumerate(int(v) for v in limits))
        self.p = 1
        sizes: dict[int, int] = {}
        for q in self.parts:
            sizes[q] = sizes.get(q, 0) + 1
        self.rank = sum(min(self.limits.get(q, 0), s) for q, s in sizes.items())

    def is_independent(self, elements):
        counts: dict[int, int] = {}
        for u in set(elements):
            q = self.parts[u]
            counts[q] = counts.get(q, 0) + 1
            if counts[q] > self.limits.get(q, 0):
                return False
        return True

    def can_add(self, S, u):
        if u in S:
            return True
        q = self.parts[u]
        used = sum(1 for v in S if self.parts[v] == q)
        return used < self.limits.get(q, 0)


class MatroidIntersection(SetSystem):
    """Intersection of ``q`` matroids, which is a ``q``-set system."""

    def __init__(self, matroids: Sequence[SetSystem]):
        if not matroids:
            raise InvalidParam("need at least one matroid")
        self.matroids = list(matroids)
        self.n = self.matroids[0].n
        self.p = len(self.matroids)
        self.rank = min(m.rank for m in self.matroids)

    def is_independent(self, elements):
        elements = list(elements)
        return all(m.is_independent(elements) for m in self.matroids)

    def can_add(self, S, u):
        return all(m.can_add(S, u) for m in self.matroids)


def can_add(system: SetSystem, S: Subset | Sequence[int], u: int) -> bool:
    return system.can_add(S, u)


# --- incremental feasibility for baselines and brute force -----------------

class Tracker:
    def fits(self, u: int) -> bool:
        raise NotImplementedError

    def add(self, u: int) -> None:
        raise NotImplementedError

    def copy(self) -> "Tracker":
        raise NotImplementedError


class Feasibility:
    """A downward-closed feasibility rule with an incremental tracker."""

    def tracker(self) -> Tracker:
        raise NotImplementedError

    def is_feasible(self, elements: Iterable[int]) -> bool:
        t = self.tracker()
        for u in elements:
            if not t.fits(u):
                return False
            t.add(u)
        return True


class _CountTracker(Tracker):
    def __init__(self, k: int, count: int = 0):
        self.k, self.count = k, count

    def fits(self, u):
        return self.count < self.k

    def add(self, u):
        self.count += 1

    def copy(self):
        return _CountTracker(self.k, self.count)


class CardinalityConstraint(Feasibility):
    def __init__(self, k: int):
        self.k = k

    def tracker(self):
        return _CountTracker(self.k)


class Unconstrained(Feasibility):
    def tracker(self):
        return _CountTracker(math.inf)


class _KnapsackTracker(Tracker):
    def __init__(self, inst: KnapsackInstance, spent: float = 0.0, count: int = 0):
        self.inst, self.spent, self.count = inst, spent, count

    def fits(self, u):
        return not math.isinf(self.inst.costs[u]) and self.inst.fits(self.spent, self.count, u)

    def add(self, u):
        self.spent += self.inst.costs[u]
        self.count += 1

    def copy(self):
        return _KnapsackTracker(self.inst, self.spent, self.count)


class KnapsackConstraint(Feasibility):
    def __init__(self, inst: KnapsackInstance):
        self.inst = inst

    def tracker(self):
        return _KnapsackTracker(self.inst)


class _MultiTracker(Tracker):
    def __init__(self, mk: MultiKnapsackInstance, loads: list[float] | None = None):
        self.mk = mk
        self.loads = [0.0] * mk.d if loads is None else loads

    def fits(self, u):
        return all(a + c <= 1.0 for a, c in zip(self.loads, self.mk.column(u)))

    def add(self, u):
        self.loads = [a + c for a, c in zip(self.loads, self.mk.column(u))]

    def copy(self):
        return _MultiTracker(self.mk, list(self.loads))


class MultiKnapsackConstraint(Feasibility):
    def __init__(self, mk: MultiKnapsackInstance):
        self.mk = mk

    def tracker(self):
        return _MultiTracker(self.mk)


class _SystemTracker(Tracker):
    def __init__(self, system: SetSystem, S: Subset):
        self.system, self.S = system, S

    def fits(self, u):
        return u not in self.S and self.system.can_add(self.S, u)

    def add(self, u):
        self.S.add(u)

    def copy(self):
        return _SystemTracker(self.system, self.S.copy())


class SystemConstraint(Feasibility):
    def __init__(self, system: SetSystem):
        self.system = system

    def tracker(self):
        return _SystemTracker(self.system, Subset(self.system.n))


class _AllTracker(Tracker):
    def __init__(self, parts: list[Tracker]):
        self.parts = parts

    def fits(self, u):
        return all(t.fits(u) for t in self.parts)

    def add(self, u):
        for t in self.parts:
            t.add(u)

    def copy(self):
        return _AllTracker([t.copy() for t in self.parts])


class AllOf(Feasibility):
    def __init__(self, *rules: Feasibility):
        self.rules = rules

    def tracker(self):
        return _AllTracker([r.tracker() for r in self.rules])
