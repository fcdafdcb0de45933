"""Shared fixtures: cached solves and reference parameter sets.

Diagonalizations and dense-oracle steady states are cached per spec for
the whole session since many tests revisit the same parameter points.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from openxy.model import ChainSpec, build_structure_matrix
from openxy.spectral import diagonalize

# bath rates used for every figure-style run
FIG_RATES = dict(gl1=0.5, gl2=0.3, gr1=0.5, gr2=0.1)

_BASIS_CACHE = {}
_NESS_CACHE = {}


def fig_spec(n: int, h: float, gamma: float = 0.5) -> ChainSpec:
    return ChainSpec(n=n, gamma=gamma, h=h, **FIG_RATES)


def cached_basis(spec: ChainSpec):
    if spec not in _BASIS_CACHE:
        _BASIS_CACHE[spec] = diagonalize(build_structure_matrix(spec))
    return _BASIS_CACHE[spec]


def cached_ness(spec: ChainSpec):
    from openxy import oracle

    if spec not in _NESS_CACHE:
        _NESS_CACHE[spec] = oracle.steady_state(oracle.build_liouvillean(spec))
    return _NESS_CACHE[spec]


def multiset_distance(a, b):
    """Max matched distance between two complex multisets of equal size."""
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def random_spec(rng: np.random.Generator, n: int,
                single_ended: bool = False) -> ChainSpec:
    """Random dissipative spec; rates in (0.05, 1) keep the NESS unique."""
    rates = rng.uniform(0.05, 1.0, size=4)
    if single_ended:
        side = rng.integers(0, 2)
        rates[2 * side:2 * side + 2] = 0.0
    return ChainSpec(n=n, gamma=float(rng.uniform(0.0, 1.0)),
                     h=float(rng.uniform(0.0, 1.2)), gl1=float(rates[0]),
                     gl2=float(rates[1]), gr1=float(rates[2]),
                     gr2=float(rates[3]))


@pytest.fixture(scope="session")
def solver():
    return cached_basis


@pytest.fixture(scope="session")
def oracle_ness():
    return cached_ness
