"""Shared instances and pre-optimized minima (session-scoped: the strategy
runs are the expensive part of the suite and many tests share them)."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qls.graphs import ProblemGraph, build_cost_diagonal, generate_regular_graph
from qls.optimize import bootstrap_depth_one, single_ts_step


PETERSEN_EDGES = tuple(
    (i, j, 1.0)
    for i, j in [
        (0, 1), (1, 2), (2, 3), (3, 4), (0, 4),          # outer cycle
        (5, 7), (7, 9), (6, 9), (6, 8), (5, 8),          # inner pentagram
        (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),          # spokes
    ]
)


@pytest.fixture(scope="session")
def petersen():
    return ProblemGraph(10, PETERSEN_EDGES)


def optimize_to_depth(cost, p_max):
    params, record = bootstrap_depth_one(cost)
    for _ in range(2, p_max + 1):
        res = single_ts_step(cost, params)
        params, record = res.params, res.record
    return params, record


@pytest.fixture(scope="session")
def n8_instance():
    graph = generate_regular_graph(8, 3, weighted=False, seed=3)
    return graph, build_cost_diagonal(graph)


@pytest.fixture(scope="session")
def n8_min_p3(n8_instance):
    graph, cost = n8_instance
    params, record = optimize_to_depth(cost, 3)
    assert record.converged
    return graph, cost, params


@pytest.fixture(scope="session")
def n10_instance():
    graph = generate_regular_graph(10, 3, weighted=False, seed=7)
    return graph, build_cost_diagonal(graph)


@pytest.fixture(scope="session")
def n10_min_p3(n10_instance):
    graph, cost = n10_instance
    params, record = optimize_to_depth(cost, 3)
    assert record.converged
    return graph, cost, params
