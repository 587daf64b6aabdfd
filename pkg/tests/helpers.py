"""Shared fixtures: the two reference networks and random instance generators."""

import numpy as np

from distnet.graph import Edge, Graph, Port

# 1-based edge list of the five-vertex, seven-edge reference network
FIVE_EDGES = [(1, 2), (2, 3), (3, 1), (1, 4), (4, 3), (1, 5), (5, 2)]
# two ports, both fed at vertex 5, drained at 4 and 3 (0-based here)
FIVE_PORTS = (Port(4, 3), Port(4, 2))
# an exact optimum for budget 8 (gamma = 1); checked by hand in test_allocate
FIVE_OPT = (0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 2.0)
# published allocation for budget 8
PUBLISHED_W = (0.0, 1.0427, 2.0, 3.0427, 0.9573, 0.9573, 0.0)


def five_node(weights=None):
    w = np.ones(7) if weights is None else np.asarray(weights, dtype=float)
    return Graph.from_one_based(5, [(u, v, x) for (u, v), x in zip(FIVE_EDGES, w)])


def signed_five(w8, w9):
    """Unit positive edges of ``five_node`` plus negative edges (5,3) = -w8 and (5,4) = -w9."""
    trip = [(u, v, 1.0) for u, v in FIVE_EDGES] + [(5, 3, -w8), (5, 4, -w9)]
    return Graph.from_one_based(5, trip)


def complete(n, w=1.0):
    return Graph(n, tuple(Edge(i, j, w) for i in range(n) for j in range(i + 1, n)))


def path(n, w=1.0):
    return Graph(n, tuple(Edge(i, i + 1, w) for i in range(n - 1)))


def random_connected(rng, n, p=0.4, lo=0.1, hi=3.0):
    """Random spanning tree plus Bernoulli(p) extra edges, weights uniform in [lo, hi]."""
    perm = rng.permutation(n)
    edges = []
    for i in range(1, n):
        j = int(rng.integers(i))
        edges.append((int(perm[j]), int(perm[i])))
    have = {frozenset(e) for e in edges}
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((i, j)) not in have and rng.random() < p:
                edges.append((i, j))
    w = rng.uniform(lo, hi, len(edges))
    return Graph(n, tuple(Edge(u, v, float(x)) for (u, v), x in zip(edges, w)))


def random_ports(rng, n, k):
    ports = []
    for _ in range(k):
        a, b = rng.choice(n, 2, replace=False)
        ports.append(Port(int(a), int(b), float(rng.uniform(0.5, 2.0))))
    return ports


def random_signed(rng, n_max=8):
    """Random graph whose positive part may be disconnected, with a few negative edges."""
    n = int(rng.integers(2, n_max + 1))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            r = rng.random()
            if r < 0.45:
                edges.append(Edge(i, j, float(rng.uniform(0.2, 2.0))))
            elif r < 0.6:
                edges.append(Edge(i, j, -float(rng.uniform(0.05, 1.5))))
    if not edges:
        edges.append(Edge(0, 1, 1.0))
    return Graph(n, tuple(edges))
