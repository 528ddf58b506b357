import numpy as np
import pytest

from localflow import AttributeMatrix, Graph


@pytest.fixture
def triangle():
    return Graph.from_edge_list([(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def path3():
    return Graph.from_edge_list([(0, 1), (1, 2)])


@pytest.fixture
def barbell():
    """Two unit-weight triangles joined by a single bridge edge (2, 3)."""
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    return Graph.from_edge_list(edges)


@pytest.fixture
def barbell_attrs():
    X = np.zeros((6, 2))
    X[3:] = 10.0
    return AttributeMatrix(X)


def random_connected_graph(rng, n, extra_edges=None):
    """Random tree plus extra random edges, random weights in [0.2, 3]."""
    us = []
    vs = []
    for i in range(1, n):
        us.append(int(rng.integers(0, i)))
        vs.append(i)
    extra = int(1.5 * n) if extra_edges is None else extra_edges
    for _ in range(extra):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            us.append(min(int(i), int(j)))
            vs.append(max(int(i), int(j)))
    w = rng.uniform(0.2, 3.0, size=len(us))
    return Graph.from_arrays(np.array(us), np.array(vs), w, n=n)
