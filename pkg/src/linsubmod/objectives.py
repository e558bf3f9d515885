"""Concrete monotone submodular objectives (plus a few non-monotone test functions)."""
from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPSD
from .oracle import SetFunction


class CoverageObjective(SetFunction):
    """``f(S) = |union of cover(u) for u in S|``."""

    def __init__(self, cover_sets: Sequence[Iterable[int]]):
        self.cover = [tuple(sorted(set(int(x) for x in c))) for c in cover_sets]
        self.n = len(self.cover)

    def value(self, elements):
        covered = set()
        for u in elements:
            covered.update(self.cover[u])
        return float(len(covered))

    def new_state(self):
        return [set()]

    def add_to_state(self, state, u):
        state[0].update(self.cover[u])

    def state_value(self, state):
        return float(len(state[0]))

    def value_plus(self, state, u):
        covered = state[0]
        return float(len(covered) + sum(1 for x in self.cover[u] if x not in covered))


def coverage_objective(cover_sets: Sequence[Iterable[int]]) -> CoverageObjective:
    return CoverageObjective(cover_sets)


def vertex_cover_objective(n: int, edges: Iterable[tuple[int, int]]) -> CoverageObjective:
    """Coverage with ``cover(u) = N(u) + u`` on an undirected graph."""
    nbrs: list[set[int]] = [{u} for u in range(n)]
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    return CoverageObjective(nbrs)


class FacilityLocationObjective(SetFunction):
    """``f(S) = (1/n) * sum_i max_{j in S} M[i, j]``, with the max over nothing taken as 0."""

    def __init__(self, M):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {M.shape}")
        if (M < 0).any():
            raise ValueError("similarity matrix has negative entries")
        self.n = M.shape[0]
        # column j of M as a contiguous row
        self._cols = np.ascontiguousarray(M.T)

    def value(self, elements):
        if len(elements) == 0:
            return 0.0
        return float(self._cols[list(elements)].max(axis=0).sum() / self.n)

    def new_state(self):
        return [np.zeros(self.n)]

    def add_to_state(self, state, u):
        np.maximum(state[0], self._cols[u], out=state[0])

    def state_value(self, state):
        return float(state[0].sum() / self.n)

    def value_plus(self, state, u):
        return float(np.maximum(state[0], self._cols[u]).sum() / self.n)


def facility_location_objective(M) -> FacilityLocationObjective:
    return FacilityLocationObjective(M)


class _CholState:
    __slots__ = ("elements", "L", "logdet")

    def __init__(self, cap: int):
        self.elements: list[int] = []
        self.L = np.zeros((cap, cap))
        self.logdet = 0.0


class LogDetObjective(SetFunction):
    """``f(S) = log det(I + alpha * M_S)`` for a PSD kernel ``M``.

    :meth:`value` factors the principal submatrix from scratch; the
    incremental path extends the Cholesky factor by one row per element.
    """

    def __init__(self, M, alpha: float = 1.0):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"kernel must be square, got shape {M.shape}")
        if not np.allclose(M, M.T, atol=1e-10):
            raise NotPSD("kernel is not symmetric")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.M = M
        self.alpha = float(alpha)
        self.n = M.shape[0]

    def value(self, elements):
        idx = list(elements)
        if not idx:
            return 0.0
        A = np.eye(len(idx)) + self.alpha * self.M[np.ix_(idx, idx)]
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError as exc:
            raise NotPSD(f"Cholesky failed on subset of size {len(idx)}") from exc
        return float(2.0 * np.log(np.diag(L)).sum())

    def new_state(self):
        return _CholState(min(self.n, 16))

    def _extend(self, state: _CholState, u: int) -> tuple[np.ndarray, float]:
        k = len(state.elements)
        diag = 1.0 + self.alpha * self.M[u, u]
        if k == 0:
            y = np.zeros(0)
            d2 = diag
        else:
            b = self.alpha * self.M[state.elements, u]
            y = solve_triangular(state.L[:k, :k], b, lower=True, check_finite=False)
            d2 = diag - float(y @ y)
        if not d2 > 0.0:
            raise NotPSD(f"Schur complement {d2} is not positive when adding {u}")
        return y, d2

    def add_to_state(self, state, u):
        y, d2 = self._extend(state, u)
        k = len(state.elements)
        if k == state.L.shape[0]:
            cap = min(self.n, 2 * k + 1)
            L = np.zeros((cap, cap))
            L[:k, :k] = state.L[:k, :k]
            state.L = L
        state.L[k, :k] = y
        state.L[k, k] = math.sqrt(d2)
        state.elements.append(u)
        state.logdet += math.log(d2)

    def state_value(self, state):
        return state.logdet

    def value_plus(self, state, u):
        _, d2 = self._extend(state, u)
        return state.logdet + math.log(d2)

    def rank_one_marginal(self, elements: Sequence[int], u: int) -> float:
        """``f(u | S)`` from the Schur complement alone."""
        state = self.new_state()
        for v in elements:
            self.add_to_state(state, v)
        return math.log(self._extend(state, u)[1])


def log_det_objective(M, alpha: float = 1.0) -> LogDetObjective:
    return LogDetObjective(M, alpha)


class SqrtCoverageObjective(SetFunction):
    """``f(S) = sum_w sqrt(sum_{e in S} score(w, e))``."""

    def __init__(self, n_words: int, element_scores: Sequence[Mapping[int, float]]):
        self.n_words = n_words
        self.n = len(element_scores)
        self._words = []
        self._scores = []
        for row in element_scores:
            items = sorted((int(w), float(s)) for w, s in row.items() if s != 0)
            if any(s < 0 for _, s in items):
                raise ValueError("scores must be non-negative")
            self._words.append(np.array([w for w, _ in items], dtype=np.int64))
            self._scores.append(np.array([s for _, s in items], dtype=float))

    @classmethod
    def from_dense(cls, scores) -> "SqrtCoverageObjective":
        """``scores`` is a words x elements array."""
        scores = np.asarray(scores, dtype=float)
        rows = [{w: scores[w, e] for w in range(scores.shape[0]) if scores[w, e] != 0}
                for e in range(scores.shape[1])]
        return cls(scores.shape[0], rows)

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[int, int, float]],
                     n: int | None = None) -> "SqrtCoverageObjective":
        rows: dict[int, dict[int, float]] = {}
        n_words = 0
        for w, e, s in triples:
            rows.setdefault(int(e), {})
            rows[int(e)][int(w)] = rows[int(e)].get(int(w), 0.0) + float(s)
            n_words = max(n_words, int(w) + 1)
        n = n if n is not None else (max(rows) + 1 if rows else 0)
        return cls(n_words, [rows.get(e, {}) for e in range(n)])

    def new_state(self):
        # [per-word sums, cached value or None]
        return [np.zeros(self.n_words), 0.0]

    def add_to_state(self, state, u):
        np.add.at(state[0], self._words[u], self._scores[u])
        state[1] = None

    def state_value(self, state):
        if state[1] is None:
            state[1] = float(np.sqrt(state[0]).sum())
        return state[1]

    def value(self, elements):
        state = self.new_state()
        for u in elements:
            self.add_to_state(state, u)
        return self.state_value(state)

    def value_plus(self, state, u):
        base = self.state_value(state)
        w = self._words[u]
        if w.size == 0:
            return base
        old = state[0][w]
        return base + float((np.sqrt(old + self._scores[u]) - np.sqrt(old)).sum())


def sqrt_coverage_objective(scores) -> SqrtCoverageObjective:
    if isinstance(scores, SqrtCoverageObjective):
        return scores
    return SqrtCoverageObjective.from_dense(scores)


class ModularObjective(SetFunction):
    """``f(S) = sum of w(u) over S``."""

    def __init__(self, weights: Sequence[float]):
        self.weights = [float(w) for w in weights]
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        self.n = len(self.weights)

    def value(self, elements):
        return float(sum(self.weights[u] for u in elements))

    def new_state(self):
        return [0.0]

    def add_to_state(self, state, u):
        state[0] += self.weights[u]

    def state_value(self, state):
        return state[0]

    def value_plus(self, state, u):
        return state[0] + self.weights[u]


def modular_objective(weights: Sequence[float]) -> ModularObjective:
    return ModularObjective(weights)


class CutObjective(SetFunction):
    """Weighted cut function of a graph; non-negative, submodular, not monotone.

    For a directed graph only edges leaving ``S`` count.
    """

    monotone = False

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], weights: Sequence[float] | None = None,
                 directed: bool = False):
        self.n = n
        self.edges = [(int(a), int(b)) for a, b in edges]
        self.weights = [1.0] * len(self.edges) if weights is None else [float(w) for w in weights]
        self.directed = directed

    def value(self, elements):
        inside = set(elements)
        total = 0.0
        for (a, b), w in zip(self.edges, self.weights):
            if self.directed:
                if a in inside and b not in inside:
                    total += w
            elif (a in inside) != (b in inside):
                total += w
        return total


class FunctionObjective(SetFunction):
    """Adapter for a plain callable on element lists."""

    def __init__(self, n: int, fn: Callable[[Sequence[int]], float], monotone: bool = True,
                 submodular: bool = True):
        self.n = n
        self._fn = fn
        self.monotone = monotone
        self.submodular = submodular

    def value(self, elements):
        return float(self._fn(elements))
