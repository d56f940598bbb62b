import numpy as np
import pytest

from graphcv import Graph, random_regular, spectral_decompose


def path_graph(n, w=1.0):
    return Graph.from_edges(n, [(i, i + 1, w) for i in range(n - 1)])


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def random_weighted_graph(n, p, rng):
    """Erdos-Renyi with a spanning path so the graph is connected; random weights."""
    edges = {(i, i + 1): rng.uniform(0.5, 2.0) for i in range(n - 1)}
    for i in range(n):
        for j in range(i + 2, n):
            if rng.random() < p:
                edges[(i, j)] = rng.uniform(0.1, 2.0)
    return Graph.from_edges(n, [(i, j, w) for (i, j), w in edges.items()])


def two_clusters(m, bridge, seed):
    """Two dense random clusters of ``m`` vertices joined by one weak edge."""
    rng = np.random.default_rng(seed)
    edges = {}
    for off in (0, m):
        for i in range(m):
            for j in range(i + 1, m):
                if rng.random() < 0.5:
                    edges[(off + i, off + j)] = rng.uniform(0.5, 1.5)
        for i in range(m - 1):
            edges[(off + i, off + i + 1)] = 1.0
    edges[(m - 1, m)] = bridge
    return Graph.from_edges(2 * m, [(i, j, w) for (i, j), w in edges.items()])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def rr_basis():
    g = random_regular(60, 4, seed=3)
    return spectral_decompose(g)
