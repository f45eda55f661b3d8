"""Shared fixtures and deliberately broken plants for the verifier tests."""
import os
import sys

import pytest

# Ensure the project root is on sys.path so `src` can be imported
proj_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if proj_root not in sys.path:
    sys.path.insert(0, proj_root)

from src.constraints import PartitionMatroid, UniformMatroid, intersect  # noqa: E402
from src.objectives import GraphCutObjective, ModularObjective, ValueOracle  # noqa: E402
from src.solvers import round_bound  # noqa: E402


class SupermodularPlant(ValueOracle):
    """TEST-ONLY: f(S) = |S|^2, marginals 1, 3, 5, ... grow with S."""

    kind = "plant-supermodular"
    monotone_hint = True

    def _value(self, S):
        return float(len(S) ** 2)


class NegativePlant(ValueOracle):
    """TEST-ONLY: f(S) = |S| - 2 for non-empty S, so singletons are negative."""

    kind = "plant-negative"

    def _value(self, S):
        return 0.0 if not S else float(len(S) - 2)


class CountingOracle(ValueOracle):
    """TEST-ONLY: wraps an oracle and counts calls to the set function itself."""

    def __init__(self, inner: ValueOracle):
        super().__init__(inner.n)
        self.inner = inner
        self.kind = inner.kind
        self.monotone_hint = inner.monotone_hint
        self.definitional = 0

    def _value(self, S):
        self.definitional += 1
        return self.inner._value(S)


class ExplicitFamily:
    """TEST-ONLY: independence given by an explicit list of sets (need not be a matroid)."""

    def __init__(self, n, family):
        self.n = n
        self.family = {frozenset(s) for s in family}

    def is_independent(self, S):
        return frozenset(S) in self.family


def assert_round_bound(result, r, epsilon):
    assert result.rounds <= round_bound(r, epsilon)


@pytest.fixture
def modular_103():
    return ModularObjective([10.0, 7.0, 3.0])


@pytest.fixture
def path_cut():
    # path 1-2 (w=5), 2-3 (w=4) relabelled to {0, 1, 2}
    return GraphCutObjective(3, [[0, 1, 5.0], [1, 2, 4.0]])


@pytest.fixture
def exchange_pair():
    m1 = PartitionMatroid(3, [([0, 1], 1), ([2], 1)])
    m2 = PartitionMatroid(3, [([0, 2], 1), ([1], 1)])
    return intersect([m1, m2])


@pytest.fixture
def uniform2():
    return UniformMatroid(3, 2)
