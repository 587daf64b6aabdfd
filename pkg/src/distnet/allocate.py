"""Optimal edge-weight allocation on a budget simplex.

Minimizes ``f(w) = lambda_max(E^T L_w^+ E)`` over ``{w >= 0, sum w = c}``.
``f`` is convex in ``w`` (a pointwise supremum of affine functions), so a
projected subgradient method with best-iterate tracking converges; the
returned weights are certified by the LMI check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleAllocationError
from .graph import Graph, Port, component_labels, incidence_matrix, port_matrix, unbalanced_columns
from .hinf import GainCertificate, NetworkSystem, hinf_network
from .spectral import DEFAULT_TOL, TolerancePolicy, laplacian_pinv, sym_eig


@dataclass(frozen=True)
class AllocationProblem:
    """Topology, port matrix and budget. Topology weights are ignored by the solver."""

    topology: Graph
    E: np.ndarray = field(repr=False)
    budget: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be a positive number, got {self.budget!r}")
        if self.topology.m == 0:
            raise InfeasibleAllocationError("topology has no edges to allocate")
        E = np.asarray(self.E, dtype=float)
        if E.ndim == 1:
            E = E.reshape(-1, 1)
        if E.shape[0] != self.topology.n:
            raise ValueError(f"E has {E.shape[0]} rows, topology has {self.topology.n} vertices")
        object.__setattr__(self, "E", E)
        labels = component_labels(self.topology)
        bad = unbalanced_columns(E, labels)
        if bad:
            raise InfeasibleAllocationError(
                "no allocation gives a finite gain: port column(s) "
                + ", ".join(str(j + 1) for j in bad)
                + " span disconnected parts of the topology"
            )

    @classmethod
    def from_ports(cls, topology: Graph, ports: Sequence[Port], budget: float) -> "AllocationProblem":
        return cls(topology, port_matrix(ports, topology.n), budget)

    @property
    def m(self) -> int:
        return self.topology.m

    def incidence(self) -> np.ndarray:
        return incidence_matrix(self.topology)

    def system(self, w) -> NetworkSystem:
        return NetworkSystem(self.topology.with_weights(w), self.E)


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 5000
    rel_tol: float = 1e-6
    window: int = 100
    step_scale: float = 1.0
    max_halvings: int = 60
    bound_every: int = 10
    patience: int = 20
    bundle_size: int = 200
    seed: int = 0

    def __post_init__(self):
        if min(self.max_iters, self.window, self.bound_every, self.bundle_size, self.patience) < 1 or self.max_halvings < 0:
            raise ValueError("iteration counts must be positive, max_halvings nonnegative")
        if not (self.rel_tol > 0 and self.step_scale > 0):
            raise ValueError("rel_tol and step_scale must be positive")


@dataclass
class AllocationResult:
    weights: np.ndarray
    gamma: float
    iterations: int
    best_gap: float
    certificate: GainCertificate
    history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def _endpoints(g: Graph) -> np.ndarray:
    return np.array([(e.u, e.v) for e in g.edges], dtype=int).reshape(-1, 2)


def _gain(B, ends, E, w):
    """Objective and the maximizing ``x = L^+ E v``; ``(inf, None)`` when a port is cut off."""
    n = B.shape[0]
    active = w > 0
    support = Graph(n, tuple((int(a), int(b), 1.0) for a, b in ends[active]))
    labels = component_labels(support)
    if unbalanced_columns(E, labels):
        return math.inf, None
    if E.shape[1] == 0:
        return 0.0, np.zeros(n)
    L = (B * w) @ B.T
    X = laplacian_pinv(0.5 * (L + L.T), labels) @ E
    M = E.T @ X
    dec = sym_eig(0.5 * (M + M.T))
    v = dec.eigenvectors[:, -1]
    return max(dec.max, 0.0), X @ v


def objective(problem: AllocationProblem, w) -> float:
    """Network H-infinity norm at weights ``w``; ``math.inf`` when a port is cut off."""
    w = np.asarray(w, dtype=float)
    if w.shape != (problem.m,):
        raise ValueError(f"expected {problem.m} weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    f, _ = _gain(problem.incidence(), _endpoints(problem.topology), problem.E, w)
    return f


def subgradient(problem: AllocationProblem, w) -> np.ndarray:
    """``g_i = -(b_i^T L^+ E v)^2`` with ``v`` the top eigenvector of ``E^T L^+ E``."""
    w = np.asarray(w, dtype=float)
    B = problem.incidence()
    f, x = _gain(B, _endpoints(problem.topology), problem.E, w)
    if not math.isfinite(f):
        raise InfeasibleAllocationError("objective is infinite at this point; no subgradient")
    return -((B.T @ x) ** 2)


def project_simplex(v, c: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum w = c}`` by the sorted-threshold rule."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex expects a non-empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - c
    k = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / k > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _canonical_order(g: Graph) -> np.ndarray:
    keys = [(min(e.u, e.v), max(e.u, e.v)) for e in g.edges]
    return np.array(sorted(range(g.m), key=lambda j: keys[j]), dtype=int)


def _cutting_plane_bound(cuts, c: float) -> float:
    """``min_{w in simplex} max_i f_i + g_i^T (w - w_i)``, a lower bound on the optimum."""
    F = np.array([f for f, _, _ in cuts])
    G = np.array([g for _, g, _ in cuts])
    W = np.array([w for _, _, w in cuts])
    m = G.shape[1]
    offset = F - np.einsum("ij,ij->i", G, W)
    res = linprog(
        np.r_[np.zeros(m), 1.0],
        A_ub=np.hstack([G, -np.ones((len(cuts), 1))]),
        b_ub=-offset,
        A_eq=np.r_[np.ones(m), 0.0][None, :],
        b_eq=[c],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    return float(res.fun) if res.status == 0 else -math.inf


def _clean(w: np.ndarray, c: float) -> np.ndarray:
    # weights at rounding level would leave vertices attached by ~1e-16 conductances
    w = np.where(w < 1e-12 * c, 0.0, w)
    return w * (c / w.sum())


def solve(problem: AllocationProblem, opts: SolverOptions = SolverOptions(),
          tol: TolerancePolicy = DEFAULT_TOL) -> AllocationResult:
    """Projected subgradient descent from the uniform allocation.

    The search direction is the subgradient with its mean removed (tangent
    to the simplex). Steps are Polyak steps towards the level
    ``best - theta * (best - lower)``, where ``lower`` is the minimum of the
    cutting-plane model built from the last ``bundle_size`` subgradients,
    refreshed every ``bound_every`` iterations. ``theta`` starts at 1/2 and
    is halved after ``patience`` iterations without improvement. When the
    current value is already below the level the step falls back to
    ``c / (sqrt(t) ||d||)``. Steps that land on an infinite objective are
    halved.

    Stops when the gap falls under ``rel_tol * best``, or when neither the
    best value nor the bound has moved by that much over ``window``
    iterations.
    """
    c = float(problem.budget)
    m = problem.m
    order = _canonical_order(problem.topology)
    B = problem.incidence()[:, order]
    ends = _endpoints(problem.topology)[order]
    E = problem.E

    w = np.full(m, c / m)
    f, x = _gain(B, ends, E, w)
    if not math.isfinite(f):
        raise InfeasibleAllocationError(
            "uniform allocation leaves a port disconnected; no feasible start"
        )
    best_w, best_f = w.copy(), f
    lower = -math.inf
    history = [best_f]
    lowers = [lower]
    since = 0
    theta = 0.5
    cuts: list = []
    t = 0
    for t in range(1, opts.max_iters + 1):
        g = -((B.T @ x) ** 2)
        lower = max(lower, f + c * float(g.min()) - float(g @ w))
        cuts.append((f, g, w))
        if len(cuts) > opts.bundle_size:
            del cuts[0]
        if t % opts.bound_every == 1 or opts.bound_every == 1:
            lower = max(lower, _cutting_plane_bound(cuts, c))
        d = g - g.mean()
        dn = float(np.linalg.norm(d))
        if dn == 0.0 or best_f - lower <= opts.rel_tol * abs(best_f):
            break
        level = best_f - theta * (best_f - lower)
        if f > level:
            step = (f - level) / dn**2
        else:
            step = opts.step_scale * c / (dn * math.sqrt(t))
        for _ in range(opts.max_halvings + 1):
            cand = _clean(project_simplex(w - step * d, c), c)
            fc, xc = _gain(B, ends, E, cand)
            if math.isfinite(fc):
                break
            step *= 0.5
        else:
            history.append(best_f)
            lowers.append(lower)
            continue
        w, f, x = cand, fc, xc
        if f < best_f:
            best_w, best_f, since, theta = w.copy(), f, 0, 0.5
        else:
            since += 1
            if since >= opts.patience:
                # no progress: aim closer to the current best
                since, theta = 0, max(theta / 2, 1e-3)
        history.append(best_f)
        lowers.append(lower)
        # stalled: neither the best value nor the bound moved over the window
        if t > opts.window:
            moved = max(history[-opts.window - 1] - best_f, lower - lowers[-opts.window - 1])
            if moved <= opts.rel_tol * abs(best_f):
                break

    weights = np.empty(m)
    weights[order] = best_w
    cert = hinf_network(problem.system(weights), tol)
    return AllocationResult(
        weights=weights,
        gamma=cert.gamma,
        iterations=t,
        best_gap=max(best_f - lower, 0.0),
        certificate=cert,
        history=np.array(history),
    )


def _batched_gain(B, E, W, labels) -> np.ndarray:
    """Objective for every row of ``W`` sharing one support pattern."""
    n = B.shape[0]
    outer = np.einsum("ij,kj->jik", B, B).reshape(B.shape[1], n * n)
    Ls = (W @ outer).reshape(len(W), n, n)
    M = np.zeros((len(W), E.shape[1], E.shape[1]))
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        Ec = E[idx]
        if len(idx) < 2 or not Ec.any():
            continue
        # E_c sums to zero per column, so the J shift drops out of E^T (L + J)^-1 E
        J = np.full((len(idx), len(idx)), 1.0 / len(idx))
        block = Ls[:, idx[:, None], idx[None, :]] + J
        X = np.linalg.solve(block, np.broadcast_to(Ec, (len(W),) + Ec.shape))
        M += np.einsum("ia,pib->pab", Ec, X)
    M = 0.5 * (M + np.swapaxes(M, 1, 2))
    return np.linalg.eigvalsh(M)[:, -1]


def _compositions(m: int, total: int) -> np.ndarray:
    """All nonnegative integer m-vectors summing to ``total``, lexicographically ascending.

    Stars and bars: each choice of ``m - 1`` bar slots among
    ``total + m - 1`` gives one composition, and ascending bar tuples give
    ascending compositions.
    """
    if m == 1:
        return np.array([[total]], dtype=np.int64)
    slots = total + m - 1
    count = math.comb(slots, m - 1)
    bars = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(slots), m - 1)),
        dtype=np.int64,
        count=count * (m - 1),
    ).reshape(count, m - 1)
    edges = np.column_stack([np.full(count, -1), bars, np.full(count, slots)])
    return np.diff(edges, axis=1) - 1


def lattice(m: int, resolution: int) -> np.ndarray:
    """Simplex lattice points ``k / (resolution - 1)`` summing to one, in lexicographic order."""
    steps = resolution - 1
    return _compositions(m, steps) / steps


def grid_oracle(problem: AllocationProblem, resolution: int = 201,
                tol: TolerancePolicy = DEFAULT_TOL, chunk: int = 200_000) -> AllocationResult:
    """Exhaustive minimum of the objective over a simplex lattice (at most 4 edges).

    Points are grouped by support pattern; inside a group every Laplacian
    shares its components, so ``L^+ = (L + J)^{-1} - J`` per component is
    evaluated in one batch. Ties go to the lexicographically first point.
    """
    m = problem.m
    if m > 4:
        raise ValueError(f"grid_oracle handles at most 4 edges (cost grows as resolution^(m-1)); got {m}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    c = float(problem.budget)
    B = problem.incidence()
    E = problem.E
    W = lattice(m, resolution) * c
    vals = np.full(len(W), math.inf)
    if E.shape[1] == 0:
        vals[:] = 0.0
    else:
        masks = W > 0
        keys = masks @ (1 << np.arange(m))
        for key in np.unique(keys):
            rows = np.flatnonzero(keys == key)
            support = [j for j in range(m) if key >> j & 1]
            sub = Graph(problem.topology.n,
                        tuple(problem.topology.edges[j] for j in support))
            labels = component_labels(sub)
            if unbalanced_columns(E, labels):
                continue
            for s in range(0, len(rows), chunk):
                r = rows[s:s + chunk]
                vals[r] = _batched_gain(B, E, W[r], labels)
    i = int(np.argmin(vals))
    if not math.isfinite(vals[i]):
        raise InfeasibleAllocationError("every lattice point leaves a port disconnected")
    weights = W[i].copy()
    cert = hinf_network(problem.system(weights), tol)
    return AllocationResult(weights, cert.gamma, len(W), 0.0, cert, np.array([vals[i]]))
