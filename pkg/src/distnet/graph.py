"""Weighted graphs, incidence/Laplacian matrices, connectivity and ports.

Vertices are 0-based inside the library. Files, CLI output and error
messages use 1-based ids; :meth:`Graph.from_one_based` and the file
parser in :mod:`distnet.netfile` do the translation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc


@dataclass(frozen=True)
class Edge:
    """Oriented edge ``u -> v`` carrying a real (possibly negative) weight."""

    u: int
    v: int
    w: float = 1.0


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"vertex count must be a positive integer, got {self.n!r}")
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        for j, e in enumerate(edges):
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise ValueError(
                    f"edge {j + 1} ({e.u + 1},{e.v + 1}) has an endpoint outside 1..{self.n}"
                )
            if e.u == e.v:
                raise ValueError(f"edge {j + 1} is a self-loop at vertex {e.u + 1}")
            if not np.isfinite(e.w):
                raise ValueError(f"edge {j + 1} has non-finite weight {e.w!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_one_based(cls, n: int, triples: Iterable[Sequence[float]]) -> "Graph":
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples with 1-based vertex ids."""
        edges = []
        for t in triples:
            u, v = int(t[0]) - 1, int(t[1]) - 1
            w = float(t[2]) if len(t) > 2 else 1.0
            edges.append(Edge(u, v, w))
        return cls(n, tuple(edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.w for e in self.edges], dtype=float)

    def with_weights(self, w: Sequence[float]) -> "Graph":
        w = np.asarray(w, dtype=float)
        if w.shape != (self.m,):
            raise ValueError(f"expected {self.m} weights, got shape {w.shape}")
        return Graph(self.n, tuple(Edge(e.u, e.v, float(x)) for e, x in zip(self.edges, w)))

    def subgraph(self, keep: Callable[[Edge], bool]) -> "Graph":
        """Same vertex set, only the edges for which ``keep`` is true."""
        return Graph(self.n, tuple(e for e in self.edges if keep(e)))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Vertex ``i`` becomes ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return Graph(self.n, tuple(Edge(perm[e.u], perm[e.v], e.w) for e in self.edges))


@dataclass(frozen=True)
class Port:
    """External flow entering at ``inflow`` and leaving at ``outflow``."""

    inflow: int
    outflow: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.inflow == self.outflow:
            raise ValueError(f"port inflow and outflow coincide (vertex {self.inflow + 1})")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"port magnitude must be positive, got {self.alpha!r}")


def positive(e: Edge) -> bool:
    return e.w > 0


def incidence_matrix(g: Graph) -> np.ndarray:
    """n x m matrix with +1 at each edge's tail and -1 at its head."""
    B = np.zeros((g.n, g.m))
    for j, e in enumerate(g.edges):
        B[e.u, j] = 1.0
        B[e.v, j] = -1.0
    return B


def laplacian(g: Graph) -> np.ndarray:
    """Weighted Laplacian ``B diag(w) B^T``.

    Assembled edge by edge, which gives exact symmetry and exact zero row
    sums for any weights, including negative ones and parallel edges.
    """
    L = np.zeros((g.n, g.n))
    for e in g.edges:
        L[e.u, e.u] += e.w
        L[e.v, e.v] += e.w
        L[e.u, e.v] -= e.w
        L[e.v, e.u] -= e.w
    return L


def component_labels(g: Graph, edge_filter: Callable[[Edge], bool] | None = None) -> np.ndarray:
    """Component id per vertex; the id is the smallest (0-based) vertex in the component."""
    edges = [e for e in g.edges if edge_filter is None or edge_filter(e)]
    rows = [e.u for e in edges]
    cols = [e.v for e in edges]
    adj = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(g.n, g.n))
    _, raw = _cc(adj, directed=False)
    smallest: dict[int, int] = {}
    for i, r in enumerate(raw):
        smallest.setdefault(int(r), i)
    return np.array([smallest[int(r)] for r in raw], dtype=int)


def connected_components(
    g: Graph, edge_filter: Callable[[Edge], bool] | None = None
) -> list[list[int]]:
    """Partition of the vertices, ordered by smallest member; 0-based ids."""
    labels = component_labels(g, edge_filter)
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(labels):
        groups.setdefault(int(c), []).append(i)
    return [groups[c] for c in sorted(groups)]


def laplacian_components(L: np.ndarray) -> np.ndarray:
    """Component labels read off the off-diagonal sparsity pattern of ``L``."""
    mask = L != 0
    np.fill_diagonal(mask, False)
    _, raw = _cc(coo_matrix(mask), directed=False)
    smallest: dict[int, int] = {}
    for i, r in enumerate(raw):
        smallest.setdefault(int(r), i)
    return np.array([smallest[int(r)] for r in raw], dtype=int)


def port_matrix(ports: Sequence[Port], n: int) -> np.ndarray:
    """n x k matrix with +alpha at the inflow and -alpha at the outflow of each port."""
    E = np.zeros((n, len(ports)))
    for i, p in enumerate(ports):
        for vert in (p.inflow, p.outflow):
            if not 0 <= vert < n:
                raise ValueError(f"port {i + 1} references vertex {vert + 1} outside 1..{n}")
        if p.inflow == p.outflow:
            raise ValueError(f"port {i + 1} has inflow == outflow")
        E[p.inflow, i] = p.alpha
        E[p.outflow, i] = -p.alpha
    return E


class PortCheck(NamedTuple):
    ok: bool
    offending: tuple[int, ...]
    message: str


def validate_ports(g: Graph, ports: Sequence[Port]) -> PortCheck:
    """Every port must sit inside one component of the positive-weight subgraph."""
    labels = component_labels(g, positive)
    bad = tuple(i for i, p in enumerate(ports) if labels[p.inflow] != labels[p.outflow])
    if not bad:
        return PortCheck(True, (), "all ports lie within one connected component")
    desc = ", ".join(
        f"port {i + 1} ({ports[i].inflow + 1}->{ports[i].outflow + 1})" for i in bad
    )
    return PortCheck(False, bad, f"ports spanning components: {desc}")


def unbalanced_columns(E: np.ndarray, labels: np.ndarray) -> list[int]:
    """Columns of ``E`` whose restriction to some component does not sum to zero.

    An empty result means ``im E`` lies in the image of the Laplacian.
    """
    bad = []
    scale = max(1.0, float(np.abs(E).max())) if E.size else 1.0
    for j in range(E.shape[1]):
        col = E[:, j]
        for c in np.unique(labels):
            if abs(col[labels == c].sum()) > 1e-12 * scale:
                bad.append(j)
                break
    return bad
