"""Signed Laplacians: effective resistance and the two-condition PSD test.

A signed Laplacian ``L = B+ W+ B+^T - B- W- B-^T`` is PSD exactly when
every negative edge lies inside one component of the positive subgraph and
``W-^{-1} - B-^T L+^+ B-`` is PSD.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PortDisconnectedError
from .graph import Edge, Graph, component_labels, incidence_matrix, laplacian, positive
from .spectral import DEFAULT_TOL, TolerancePolicy, is_psd, laplacian_pinv, sym_eig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SignedSplit:
    """Edges partitioned by weight sign; magnitudes stored positive for both parts."""

    n: int
    positive_edges: tuple[Edge, ...]
    negative_edges: tuple[Edge, ...]
    zero_edges: tuple[Edge, ...]
    positive_index: tuple[int, ...]
    negative_index: tuple[int, ...]

    @property
    def positive_graph(self) -> Graph:
        return Graph(self.n, self.positive_edges)

    @property
    def negative_graph(self) -> Graph:
        """Negative edges with their weights replaced by magnitudes."""
        return Graph(self.n, tuple(Edge(e.u, e.v, -e.w) for e in self.negative_edges))

    @property
    def B_plus(self) -> np.ndarray:
        return incidence_matrix(self.positive_graph)

    @property
    def W_plus(self) -> np.ndarray:
        return np.array([e.w for e in self.positive_edges], dtype=float)

    @property
    def B_minus(self) -> np.ndarray:
        return incidence_matrix(self.negative_graph)

    @property
    def W_minus(self) -> np.ndarray:
        return np.array([-e.w for e in self.negative_edges], dtype=float)

    @property
    def L_plus(self) -> np.ndarray:
        return laplacian(self.positive_graph)

    @property
    def L_minus(self) -> np.ndarray:
        return laplacian(self.negative_graph)


def split_signed(g: Graph) -> SignedSplit:
    pos, neg, zero, ip, ineg = [], [], [], [], []
    for j, e in enumerate(g.edges):
        if e.w > 0:
            pos.append(e)
            ip.append(j)
        elif e.w < 0:
            neg.append(e)
            ineg.append(j)
        else:
            zero.append(e)
    return SignedSplit(g.n, tuple(pos), tuple(neg), tuple(zero), tuple(ip), tuple(ineg))


def pair_probe(n: int, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Incidence columns for vertex pairs (0-based), ``+1`` at the first vertex."""
    P = np.zeros((n, len(pairs)))
    for j, (a, b) in enumerate(pairs):
        P[a, j] += 1.0
        P[b, j] -= 1.0
    return P


def effective_resistance(g: Graph, probe) -> np.ndarray:
    """``probe^T L+^+ probe`` over the positive-weight subgraph of ``g``.

    ``probe`` is an incidence-like ``n x p`` matrix or a list of 0-based
    vertex pairs. Diagonal entries are the pairwise effective resistances.
    """
    if not isinstance(probe, np.ndarray):
        probe = pair_probe(g.n, list(probe))
    probe = np.asarray(probe, dtype=float).reshape(g.n, -1)
    labels = component_labels(g, positive)
    for j in range(probe.shape[1]):
        for c in np.unique(labels):
            if abs(probe[labels == c, j].sum()) > 1e-12:
                verts = [int(v) + 1 for v in np.flatnonzero(probe[:, j])]
                raise PortDisconnectedError(
                    f"probe {j + 1} (vertices {verts}) spans two components of the positive subgraph",
                    (j,),
                )
    Lp = laplacian(g.subgraph(positive))
    R = probe.T @ laplacian_pinv(Lp, labels) @ probe
    return 0.5 * (R + R.T)


@dataclass(frozen=True)
class PsdVerdict:
    condition1: bool
    condition2: bool
    slack: np.ndarray
    slack_min: float
    overall: bool
    direct_min_eig: float
    direct_psd: bool
    bad_edges: tuple[int, ...] = ()

    @property
    def consistent(self) -> bool:
        return self.overall == self.direct_psd


def _resistance_over_negative(split: SignedSplit) -> np.ndarray:
    labels = component_labels(split.positive_graph)
    Bm = split.B_minus
    R = Bm.T @ laplacian_pinv(split.L_plus, labels) @ Bm
    return 0.5 * (R + R.T)


def psd_check(g: Graph, tol: TolerancePolicy = DEFAULT_TOL) -> PsdVerdict:
    """Decide PSD-ness of the signed Laplacian through the resistance criterion.

    The direct eigenvalue verdict is computed alongside; the two must agree.
    """
    split = split_signed(g)
    labels = component_labels(split.positive_graph)
    bad = tuple(
        split.negative_index[i]
        for i, e in enumerate(split.negative_edges)
        if labels[e.u] != labels[e.v]
    )
    cond1 = not bad
    if split.negative_edges:
        slack = np.diag(1.0 / split.W_minus) - _resistance_over_negative(split)
        res = is_psd(slack, tol)
        cond2, slack_min = res.psd, res.min_eig
    else:
        slack = np.zeros((0, 0))
        cond2, slack_min = True, math.inf
    direct = is_psd(laplacian(g), tol)
    overall = cond1 and cond2
    if overall != direct.psd:
        log.warning(
            "resistance criterion (%s) disagrees with direct eigenvalue test (lambda_min=%.3g)",
            overall,
            direct.min_eig,
        )
    return PsdVerdict(cond1, cond2, slack, slack_min, overall, direct.min_eig, direct.psd, bad)


def critical_scale(g: Graph) -> float:
    """Largest factor by which all negative magnitudes can grow with ``L`` staying PSD.

    Equals ``1 / lambda_max(sqrt(W-) B-^T L+^+ B- sqrt(W-))``; infinite
    when there are no negative edges.
    """
    split = split_signed(g)
    if not split.negative_edges:
        return math.inf
    labels = component_labels(split.positive_graph)
    for i, e in enumerate(split.negative_edges):
        if labels[e.u] != labels[e.v]:
            raise PortDisconnectedError(
                f"negative edge {split.negative_index[i] + 1} ({e.u + 1},{e.v + 1}) joins two "
                "components of the positive subgraph: no positive scaling keeps L PSD",
                (split.negative_index[i],),
            )
    s = np.sqrt(split.W_minus)
    M = s[:, None] * _resistance_over_negative(split) * s[None, :]
    top = sym_eig(M).max
    return math.inf if top <= 0 else 1.0 / top


def scaled_negative(g: Graph, rho: float) -> Graph:
    """Copy of ``g`` with every negative weight multiplied by ``rho``."""
    return g.with_weights([e.w * rho if e.w < 0 else e.w for e in g.edges])
