import numpy as np
import pytest

from graphspine.graphs import AbstractGraph


def graph_from_edges(n_vertices, edge_list, leaf_labels=None):
    """Build an AbstractGraph from (u, v) endpoint pairs.

    Vertices are elements 0..n_vertices-1; edge k contributes the half-edge
    pair (n_vertices + 2k, n_vertices + 2k + 1).
    """
    m = n_vertices + 2 * len(edge_list)
    sigma = list(range(m))
    t = list(range(m))
    for k, (u, v) in enumerate(edge_list):
        a, b = n_vertices + 2 * k, n_vertices + 2 * k + 1
        sigma[a], sigma[b] = b, a
        t[a], t[b] = u, v
    return AbstractGraph(m, sigma, t, leaf_labels)


@pytest.fixture
def rose2():
    # one vertex, two loops
    return graph_from_edges(1, [(0, 0), (0, 0)])


@pytest.fixture
def theta():
    # two vertices, three parallel edges
    return graph_from_edges(2, [(0, 1), (0, 1), (0, 1)])


@pytest.fixture
def dumbbell():
    # two vertices, a loop at each, one bridge
    return graph_from_edges(2, [(0, 0), (1, 1), (0, 1)])


@pytest.fixture
def wedge_loop_leaf():
    # the one (1, 1) graph: a loop plus a labelled leaf edge
    return graph_from_edges(2, [(0, 0), (0, 1)], {1: 1})
