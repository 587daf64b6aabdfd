"""H-infinity norm of the port-driven network system and of symmetric systems.

The network system is ``x' = -L x + E d``, ``y = E^T x``. It is state-space
symmetric, so its peak gain sits at zero frequency and equals
``lambda_max(E^T L^+ E)``. The frequency sweep routines evaluate the
transfer matrix directly and serve as the independent check on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import IndefiniteMatrixError, PortDisconnectedError
from .graph import (
    Graph,
    Port,
    component_labels,
    laplacian,
    laplacian_components,
    port_matrix,
    positive,
    unbalanced_columns,
)
from .spectral import (
    DEFAULT_TOL,
    TolerancePolicy,
    deflated_spectrum,
    is_psd,
    laplacian_pinv,
    ones_complement,
    sym_eig,
)


@dataclass(frozen=True)
class NetworkSystem:
    """Distribution network on ``graph`` driven through the port matrix ``E``."""

    graph: Graph
    E: np.ndarray = field(repr=False)

    def __post_init__(self):
        if any(e.w < 0 for e in self.graph.edges):
            raise ValueError("network weights must be nonnegative; use distnet.signed for signed graphs")
        E = np.asarray(self.E, dtype=float)
        if E.ndim == 1:
            E = E.reshape(-1, 1)
        if E.shape[0] != self.graph.n:
            raise ValueError(f"E has {E.shape[0]} rows but the graph has {self.graph.n} vertices")
        object.__setattr__(self, "E", E)

    @classmethod
    def from_ports(cls, graph: Graph, ports: Sequence[Port]) -> "NetworkSystem":
        return cls(graph, port_matrix(ports, graph.n))

    @property
    def laplacian(self) -> np.ndarray:
        return laplacian(self.graph)

    @property
    def labels(self) -> np.ndarray:
        return component_labels(self.graph, positive)


@dataclass(frozen=True)
class SymmetricSystem:
    """``x' = A x + B u``, ``y = B^T x`` with ``A`` symmetric negative definite."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        if A.ndim == 0:
            A = A.reshape(1, 1)
        if B.ndim < 2:
            B = B.reshape(A.shape[0], -1)
        if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
            raise ValueError(f"incompatible shapes A {A.shape}, B {B.shape}")
        lam_max = sym_eig(A).max
        if not lam_max < 0:
            raise IndefiniteMatrixError(
                f"A must be negative definite (largest eigenvalue {lam_max:.6g})"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


@dataclass(frozen=True)
class GainCertificate:
    gamma: float
    witness: np.ndarray
    lmi_margin: float


def _check_ports(E: np.ndarray, labels: np.ndarray) -> None:
    bad = unbalanced_columns(E, labels)
    if bad:
        cols = ", ".join(str(j + 1) for j in bad)
        raise PortDisconnectedError(
            f"port column(s) {cols} span more than one connected component: the gain is infinite",
            bad,
        )


def gain_matrix(L, E, labels=None) -> np.ndarray:
    """``E^T L^+ E`` with the pseudo-inverse formed component by component."""
    L = np.asarray(L, dtype=float)
    E = np.asarray(E, dtype=float).reshape(L.shape[0], -1)
    if labels is None:
        labels = laplacian_components(L)
    _check_ports(E, labels)
    M = E.T @ laplacian_pinv(L, labels) @ E
    return 0.5 * (M + M.T)


def hinf_network(sys: NetworkSystem, tol: TolerancePolicy = DEFAULT_TOL) -> GainCertificate:
    """Peak gain ``lambda_max(E^T L^+ E)`` with a top eigenvector as witness."""
    L = sys.laplacian
    E = sys.E
    k = E.shape[1]
    if k == 0:
        return GainCertificate(0.0, np.zeros(0), lmi_feasible(L, E, 0.0, tol).margin)
    dec = sym_eig(gain_matrix(L, E, sys.labels))
    gamma = max(dec.max, 0.0)
    witness = dec.eigenvectors[:, -1]
    witness = witness / np.linalg.norm(witness)
    return GainCertificate(gamma, witness, lmi_feasible(L, E, gamma, tol).margin)


class LmiVerdict(NamedTuple):
    feasible: bool
    margin: float


def lmi_block(L, E, gamma: float) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    E = np.asarray(E, dtype=float).reshape(L.shape[0], -1)
    k = E.shape[1]
    return np.block([[L, E], [E.T, gamma * np.eye(k)]])


def lmi_feasible(L, E, gamma: float, tol: TolerancePolicy = DEFAULT_TOL) -> LmiVerdict:
    """Is ``[[L, E], [E^T, gamma I]]`` positive semidefinite? Decided by its eigenvalues."""
    res = is_psd(lmi_block(L, E, gamma), tol)
    return LmiVerdict(res.psd, res.min_eig)


def lmi_feasible_schur(L, E, gamma: float, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Same question through the Schur complement of the ``L`` block.

    With zero slack: ``L`` PSD, ``im E`` inside ``im L`` and
    ``gamma >= lambda_max(E^T L^+ E)``. With slack ``s > 0`` the block
    test accepts ``M + sI >= 0``, which is exactly ``L + sI > 0`` and
    ``gamma + s >= lambda_max(E^T (L + sI)^{-1} E)``; the range condition
    is then carried by the ``1/s`` weight on null directions of ``L``.
    ``s`` comes from the policy applied to ``||M||_2`` (an SVD, not the
    block eigenvalues).
    """
    L = np.asarray(L, dtype=float)
    E = np.asarray(E, dtype=float).reshape(L.shape[0], -1)
    if tol.psd_atol is not None:
        s = tol.psd_atol
    else:
        M = lmi_block(L, E, gamma)
        s = tol.psd_slack(np.array([np.linalg.norm(M, 2)]))
    dec = sym_eig(L)
    lam = dec.eigenvalues
    if s == 0:
        if lam[0] < 0:
            return False
        if E.shape[1] == 0:
            return True
        labels = laplacian_components(L)
        if unbalanced_columns(E, labels):
            return False
        try:
            top = sym_eig(gain_matrix(L, E, labels)).max
        except IndefiniteMatrixError:
            return False
        return bool(gamma >= top)
    shifted = lam + s
    if shifted[0] <= 0:
        return False
    if E.shape[1] == 0:
        return True
    QE = dec.eigenvectors.T @ E
    G = QE.T @ (QE / shifted[:, None])
    top = sym_eig(0.5 * (G + G.T)).max
    return bool(gamma + s >= top)


class RiccatiResult(NamedTuple):
    residual: np.ndarray
    satisfied: bool
    max_eig: float


def riccati_check(sys: SymmetricSystem, gamma: float, tol: TolerancePolicy = DEFAULT_TOL) -> RiccatiResult:
    """Evaluate ``PA + AP + BB^T + PBB^TP / gamma^2`` at ``P = gamma I``.

    The residual simplifies to ``2 (gamma A + B B^T)``; the inequality
    holds when its largest eigenvalue is at most the PSD slack.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    A, B = sys.A, sys.B
    n = A.shape[0]
    P = gamma * np.eye(n)
    BBt = B @ B.T
    R = P @ A + A @ P + BBt + (P @ BBt @ P) / gamma**2
    R = 0.5 * (R + R.T)
    lam = sym_eig(R).eigenvalues
    top = float(lam[-1])
    return RiccatiResult(R, bool(top <= tol.psd_slack(lam)), top)


def hinf_symmetric(sys: SymmetricSystem) -> float:
    """``lambda_max(-B^T A^{-1} B)``, the zero-frequency gain."""
    dec = sym_eig(sys.A)
    W = dec.eigenvectors.T @ sys.B
    M = -(W.T / dec.eigenvalues) @ W
    return max(sym_eig(0.5 * (M + M.T)).max, 0.0)


def deflated_system(L, E, labels=None) -> SymmetricSystem:
    """Minimal realization ``(-Lambda_hat, U2 E)`` of a connected network.

    Only defined when ``L`` is connected; its H-infinity norm equals that
    of the full network.
    """
    L = np.asarray(L, dtype=float)
    E = np.asarray(E, dtype=float).reshape(L.shape[0], -1)
    if labels is None:
        labels = laplacian_components(L)
    if len(np.unique(labels)) != 1:
        raise ValueError("deflated_system needs a connected graph")
    dec = deflated_spectrum(L)
    U2 = ones_complement(L.shape[0]) @ dec.eigenvectors
    return SymmetricSystem(-np.diag(dec.eigenvalues), U2.T @ E)


def _output_matrix(E: np.ndarray, C) -> np.ndarray:
    if C is None:
        return E.T
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    return C


def freq_response(L, E, C=None, omega: float = 0.0):
    """Transfer matrix ``C (j omega I + L)^{-1} E`` and its largest singular value.

    ``C`` defaults to ``E^T``. At ``omega == 0`` the finite limit
    ``C L^+ E`` is returned; it exists only when every port column is
    balanced on each component.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    E = np.asarray(E, dtype=float).reshape(n, -1)
    C = _output_matrix(E, C)
    if omega == 0:
        labels = laplacian_components(L)
        _check_ports(E, labels)
        G = (C @ laplacian_pinv(L, labels) @ E).astype(complex)
    else:
        X = np.linalg.solve(1j * omega * np.eye(n) + L, E.astype(complex))
        G = C @ X
    sigma = float(np.linalg.norm(G, 2)) if G.size else 0.0
    return G, sigma


class SweepResult(NamedTuple):
    sigma_max: float
    omega_argmax: float
    omegas: np.ndarray
    sigmas: np.ndarray


def _modal_data(L, E, C):
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    E = np.asarray(E, dtype=float).reshape(n, -1)
    C = _output_matrix(E, C)
    labels = laplacian_components(L)
    _check_ports(E, labels)
    dec = sym_eig(L)
    lam = dec.eigenvalues
    cut = DEFAULT_TOL.rank_cutoff(lam)
    live = lam > cut
    Q = dec.eigenvectors[:, live]
    return lam[live], C @ Q, Q.T @ E


def default_grid(L, points: int = 400, omega_max: float | None = None) -> np.ndarray:
    """``0`` followed by ``points`` log-spaced frequencies spanning the system time constants.

    The range is ``[1e-3 * lambda_2, 1e3 * lambda_n]`` where ``lambda_2`` is
    the smallest nonzero Laplacian eigenvalue.
    """
    lam = sym_eig(L).eigenvalues
    nz = lam[lam > DEFAULT_TOL.rank_cutoff(lam)]
    lo = 1e-3 * nz[0] if len(nz) else 1e-3
    hi = 1e3 * nz[-1] if len(nz) else 1e3
    if omega_max is not None:
        hi = omega_max
        lo = min(lo, hi)
    if points <= 0:
        return np.zeros(1)
    return np.concatenate([[0.0], np.logspace(math.log10(lo), math.log10(hi), points)])


def _sigma_on(omegas, lam, Ct, Et) -> np.ndarray:
    if Ct.size == 0 or Et.size == 0 or lam.size == 0:
        return np.zeros(len(omegas))
    resolvent = 1.0 / (1j * np.asarray(omegas)[:, None] + lam[None, :])
    G = np.einsum("pi,wi,ik->wpk", Ct, resolvent, Et)
    return np.linalg.svd(G, compute_uv=False)[:, 0]


def hinf_sweep(L, E, C=None, grid=None, points: int = 400) -> SweepResult:
    """Brute-force maximum of the largest singular value over a frequency grid.

    Ties go to the earliest grid point, so for a symmetric system the
    argmax is ``omega = 0``.
    """
    lam, Ct, Et = _modal_data(L, E, C)
    omegas = default_grid(L, points) if grid is None else np.asarray(grid, dtype=float)
    if omegas.size == 0:
        raise ValueError("frequency grid is empty")
    sig = _sigma_on(omegas, lam, Ct, Et)
    i = int(np.argmax(sig))
    return SweepResult(float(sig[i]), float(omegas[i]), omegas, sig)


def hinf_general(L, E, C=None, points: int = 400, xatol: float = 1e-8) -> float:
    """H-infinity norm for an arbitrary output matrix.

    Grid sweep followed by a bounded scalar search (Brent's golden-section
    hybrid) between the neighbours of the grid argmax.
    """
    lam, Ct, Et = _modal_data(L, E, C)
    omegas = default_grid(L, points)
    sig = _sigma_on(omegas, lam, Ct, Et)
    i = int(np.argmax(sig))
    best = float(sig[i])
    lo = omegas[max(i - 1, 0)]
    hi = omegas[min(i + 1, len(omegas) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda w: -_sigma_on([w], lam, Ct, Et)[0],
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": xatol},
        )
        best = max(best, float(-res.fun))
    return best


def algebraic_connectivity(L) -> float:
    return float(sym_eig(L).eigenvalues[1]) if np.asarray(L).shape[0] > 1 else 0.0


def corollary_bound(L, E, C, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Upper bound ``||C||_2 ||E||_2 / lambda_2`` for a SISO network on a connected graph."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    E = np.asarray(E, dtype=float).reshape(-1)
    C = np.asarray(C, dtype=float).reshape(-1)
    if E.shape != (n,) or C.shape != (n,):
        raise ValueError("corollary_bound is for single-input single-output systems (E: n x 1, C: 1 x n)")
    scale = max(1.0, float(np.abs(E).max()), float(np.abs(C).max()))
    if abs(E.sum()) > 1e-12 * n * scale or abs(C.sum()) > 1e-12 * n * scale:
        raise ValueError("E and C must be orthogonal to the all-ones vector")
    lam = sym_eig(L).eigenvalues
    lam2 = float(lam[1]) if n > 1 else 0.0
    if lam2 <= tol.psd_slack(lam):
        raise PortDisconnectedError(
            f"graph is disconnected (lambda_2 = {lam2:.3g}); the bound does not apply"
        )
    return float(np.linalg.norm(C) * np.linalg.norm(E) / lam2)


def argmax_c_check(L, E, trials: int = 500, seed: int = 0, atol: float = 1e-9) -> bool:
    """Sample outputs ``C`` with ``C 1 = 0`` and ``||C|| = ||E||``; none may beat ``C = E^T``.

    Requires ``lambda_2 = ... = lambda_n`` (complete-graph-type spectrum).
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    E = np.asarray(E, dtype=float).reshape(-1)
    lam = sym_eig(L).eigenvalues
    top = float(np.abs(lam).max())
    if n < 2 or lam[1] <= 0 or lam[-1] - lam[1] > 1e-9 * top:
        raise ValueError("argmax_c_check needs 0 = lambda_1 < lambda_2 = ... = lambda_n")
    reference = hinf_general(L, E, E)
    rng = np.random.default_rng(seed)
    norm_e = float(np.linalg.norm(E))
    for _ in range(trials):
        c = rng.standard_normal(n)
        c -= c.mean()
        c *= norm_e / np.linalg.norm(c)
        if hinf_general(L, E, c) > reference + atol:
            return False
    return True
