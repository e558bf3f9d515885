import numpy as np
import pytest

from linsubmod import CoverageObjective, QueryCountingOracle

A, B, C = 0, 1, 2


@pytest.fixture
def fix_a():
    """a -> {1,2}, b -> {2,3}, c -> {4}."""
    return CoverageObjective([{1, 2}, {2, 3}, {4}])


@pytest.fixture
def oracle_a(fix_a):
    return QueryCountingOracle(fix_a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class SpyFunction:
    """Wraps an objective and counts every value entry point independently of the oracle."""

    def __init__(self, inner):
        self.inner = inner
        self.n = inner.n
        self.calls = 0
        self.monotone = inner.monotone
        self.submodular = inner.submodular

    def value(self, elements):
        self.calls += 1
        return self.inner.value(elements)

    def new_state(self):
        return self.inner.new_state()

    def add_to_state(self, state, u):
        self.inner.add_to_state(state, u)

    def state_value(self, state):
        self.calls += 1
        return self.inner.state_value(state)

    def value_plus(self, state, u):
        self.calls += 1
        return self.inner.value_plus(state, u)
