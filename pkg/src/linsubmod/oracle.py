"""Value-oracle access to set functions, with query accounting.

Every algorithm in this package talks to its objective only through a
:class:`QueryCountingOracle`.  One call to :meth:`QueryCountingOracle.evaluate`
or :meth:`QueryCountingOracle.evaluate_plus` is one query.

Objectives may keep an incremental *state* for a subset (a coverage counter,
a Cholesky factor, ...).  A :class:`Subset` caches the state of the last
objective it was evaluated against and updates it on every ``add``, so
evaluating ``f(S + u)`` for a growing ``S`` does not redo the whole set.
"""
from __future__ import annotations

from typing import Any, Iterable, Iterator, Sequence

from .errors import QueryBudgetExceeded


class Subset:
    """A subset of ``{0, ..., n-1}`` that remembers insertion order.

    ``mask`` and ``elements`` always agree; adding an element twice raises.
    """

    __slots__ = ("n", "_mask", "_order", "_fn", "_state")

    def __init__(self, n: int, elements: Iterable[int] = ()):
        self.n = n
        self._mask = bytearray(n)
        self._order: list[int] = []
        self._fn = None
        self._state = None
        for u in elements:
            self.add(u)

    def add(self, u: int) -> None:
        if self._mask[u]:
            raise ValueError(f"element {u} already in subset")
        self._mask[u] = 1
        self._order.append(u)
        if self._fn is not None:
            self._fn.add_to_state(self._state, u)

    def discard(self, u: int) -> None:
        if not self._mask[u]:
            return
        self._mask[u] = 0
        self._order.remove(u)
        self._fn = None
        self._state = None

    def copy(self) -> "Subset":
        out = Subset(self.n)
        out._mask[:] = self._mask
        out._order = list(self._order)
        return out

    def plus(self, u: int) -> "Subset":
        out = self.copy()
        out.add(u)
        return out

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(self._order)

    @property
    def mask(self) -> bytes:
        return bytes(self._mask)

    def state_for(self, fn: "SetFunction") -> Any:
        if self._fn is not fn:
            state = fn.new_state()
            for u in self._order:
                fn.add_to_state(state, u)
            self._fn = fn
            self._state = state
        return self._state

    def __contains__(self, u: object) -> bool:
        try:
            return bool(self._mask[u]) if u >= 0 else False
        except (IndexError, TypeError):
            return False

    def __len__(self) -> int:
        return len(self._order)

    def __iter__(self) -> Iterator[int]:
        return iter(self._order)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Subset):
            return self._mask == other._mask
        return NotImplemented

    def __repr__(self) -> str:
        return f"Subset({self._order})"


class SetFunction:
    """A non-negative set function over ``{0, ..., n-1}``.

    Subclasses implement :meth:`value` (from scratch).  Objectives with a cheap
    incremental form also override the state hooks; the defaults keep the
    element list as the state and recompute from scratch.

    ``monotone`` and ``submodular`` are declarations only; the test suite
    spot-checks them.
    """

    n: int
    monotone = True
    submodular = True

    def value(self, elements: Sequence[int]) -> float:
        raise NotImplementedError

    def new_state(self) -> Any:
        return []

    def add_to_state(self, state: Any, u: int) -> None:
        state.append(u)

    def state_value(self, state: Any) -> float:
        return self.value(state)

    def value_plus(self, state: Any, u: int) -> float:
        return self.value([*state, u])

    def __call__(self, elements: Iterable[int]) -> float:
        return self.value(list(elements))


class QueryCountingOracle:
    """Counts every evaluation of the wrapped set function.

    ``cap`` is a hard limit; asking for evaluation number ``cap + 1`` raises
    :class:`QueryBudgetExceeded`.  An oracle is meant for one run.
    """

    def __init__(self, fn: SetFunction, cap: int | None = None):
        self.fn = fn
        self.cap = cap
        self.count = 0

    @property
    def n(self) -> int:
        return self.fn.n

    def subset(self, elements: Iterable[int] = ()) -> Subset:
        return Subset(self.fn.n, elements)

    def _charge(self) -> None:
        if self.cap is not None and self.count >= self.cap:
            raise QueryBudgetExceeded(f"query cap {self.cap} reached")
        self.count += 1

    def _as_subset(self, S: Subset | Iterable[int]) -> Subset:
        return S if isinstance(S, Subset) else Subset(self.fn.n, S)

    def evaluate(self, S: Subset | Iterable[int]) -> float:
        S = self._as_subset(S)
        self._charge()
        return self.fn.state_value(S.state_for(self.fn))

    def evaluate_plus(self, S: Subset | Iterable[int], u: int) -> float:
        """``f(S + u)`` as a single query (``S`` itself is not modified)."""
        if type(S) is not Subset:
            S = self._as_subset(S)
        if S._mask[u]:
            return self.evaluate(S)
        self._charge()
        fn = self.fn
        state = S._state if S._fn is fn else S.state_for(fn)
        return fn.value_plus(state, u)

    def marginal(self, u: int, S: Subset | Iterable[int], known_fS: float | None = None) -> float:
        """``f(u | S)``; one query if ``known_fS`` is given, two otherwise."""
        S = self._as_subset(S)
        if u in S:
            return 0.0
        with_u = self.evaluate_plus(S, u)
        fS = self.evaluate(S) if known_fS is None else known_fS
        return with_u - fS


def evaluate(oracle: QueryCountingOracle, S: Subset | Iterable[int]) -> float:
    return oracle.evaluate(S)


def marginal(oracle: QueryCountingOracle, u: int, S: Subset | Iterable[int],
             known_fS: float | None = None) -> float:
    return oracle.marginal(u, S, known_fS)
