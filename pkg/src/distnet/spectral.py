"""Dense symmetric eigensolvers, pseudo-inverses and semidefiniteness tests.

Every verdict in the package that reads "is this matrix PSD" or "which
eigenvalues count as zero" goes through :class:`TolerancePolicy`, so the
direct and the indirect routes of a check always use the same slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IndefiniteMatrixError, NumericalFailure

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TolerancePolicy:
    """Cutoffs used for rank decisions and PSD verdicts.

    ``rank_rtol`` is relative to the largest eigenvalue magnitude; the
    default is ``n * eps``. ``psd_atol`` is an absolute slack; the default
    is ``1e-9 * max(1, |lambda|_max)``.
    """

    rank_rtol: float | None = None
    psd_atol: float | None = None

    def __post_init__(self):
        for name in ("rank_rtol", "psd_atol"):
            val = getattr(self, name)
            if val is not None and not (val >= 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be a nonnegative finite number, got {val!r}")

    def rank_cutoff(self, eigenvalues: np.ndarray) -> float:
        n = len(eigenvalues)
        top = float(np.abs(eigenvalues).max()) if n else 0.0
        rtol = n * EPS if self.rank_rtol is None else self.rank_rtol
        return rtol * top

    def psd_slack(self, eigenvalues: np.ndarray) -> float:
        if self.psd_atol is not None:
            return self.psd_atol
        top = float(np.abs(eigenvalues).max()) if len(eigenvalues) else 0.0
        return 1e-9 * max(1.0, top)

    def describe(self) -> dict:
        return {
            "rank_rtol": "n*eps" if self.rank_rtol is None else self.rank_rtol,
            "psd_atol": "1e-9*max(1,|lambda|max)" if self.psd_atol is None else self.psd_atol,
        }


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order; column ``i`` of ``eigenvectors`` pairs with ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else math.inf

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1]) if len(self.eigenvalues) else -math.inf


def _symmetrize(S) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NumericalFailure("matrix contains NaN or infinite entries")
    if S.size:
        scale = max(1.0, float(np.abs(S).max()))
        asym = float(np.abs(S - S.T).max())
        if asym > 1e-12 * scale:
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (S + S.T)


def jacobi_eig(S, max_sweeps: int = 60) -> SpectralDecomposition:
    """Cyclic Jacobi eigenvalue iteration.

    Slow (O(n^3) per sweep, pure Python inner loop over pairs) but
    completely independent of LAPACK; the test suite uses it as a cross
    check on :func:`sym_eig`.
    """
    A = _symmetrize(S).copy()
    n = A.shape[0]
    V = np.eye(n)
    if n < 2:
        return SpectralDecomposition(np.diag(A).copy(), V)
    scale = max(float(np.abs(A).max()), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off <= EPS * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = math.sqrt(float(np.sum(np.triu(A, 1) ** 2)))
        if off > 1e3 * EPS * scale:
            raise NumericalFailure(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order], V[:, order])


def sym_eig(S, method: str = "lapack") -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    ``method="lapack"`` calls ``numpy.linalg.eigh`` (deterministic for a
    fixed input); ``method="jacobi"`` runs :func:`jacobi_eig`.
    """
    if method == "jacobi":
        return jacobi_eig(S)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    A = _symmetrize(S)
    try:
        lam, Q = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver failed: {exc}") from exc
    return SpectralDecomposition(lam, Q)


def pseudo_inverse(S, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric PSD matrix via its eigendecomposition."""
    dec = sym_eig(S)
    lam = dec.eigenvalues
    if len(lam) and lam[0] < -tol.psd_slack(lam):
        raise IndefiniteMatrixError(
            f"matrix has eigenvalue {lam[0]:.6g} below -{tol.psd_slack(lam):.3g}"
        )
    keep = lam > tol.rank_cutoff(lam)
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / lam[keep]
    Q = dec.eigenvectors
    P = (Q * inv) @ Q.T
    return 0.5 * (P + P.T)


class PsdResult(NamedTuple):
    psd: bool
    min_eig: float
    slack: float


def is_psd(S, tol: TolerancePolicy = DEFAULT_TOL) -> PsdResult:
    """``lambda_min(S) >= -psd_slack``, reported together with the margin."""
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return PsdResult(True, math.inf, 0.0)
    lam = sym_eig(S).eigenvalues
    slack = tol.psd_slack(lam)
    return PsdResult(bool(lam[0] >= -slack), float(lam[0]), slack)


def ones_complement(n: int) -> np.ndarray:
    """Orthonormal basis (n x n-1) of the subspace orthogonal to the all-ones vector.

    Columns are the normalized Helmert contrasts, so the basis is fixed
    and needs no factorization.
    """
    U = np.zeros((n, max(n - 1, 0)))
    for j in range(1, n):
        U[:j, j - 1] = 1.0
        U[j, j - 1] = -float(j)
        U[:, j - 1] /= math.sqrt(j * (j + 1))
    return U


def deflated_spectrum(L) -> SpectralDecomposition:
    """Spectrum of a connected Laplacian restricted to the complement of ``1``.

    Returns the decomposition of ``U2^T L U2`` where ``U2`` is
    :func:`ones_complement`; all eigenvalues are positive for a connected
    graph with positive weights.
    """
    L = np.asarray(L, dtype=float)
    U2 = ones_complement(L.shape[0])
    return sym_eig(U2.T @ L @ U2)


def laplacian_pinv(L, labels) -> np.ndarray:
    """Pseudo-inverse of a PSD Laplacian, one connected component at a time.

    Within each component the all-ones direction is removed exactly and the
    remaining block is inverted. ``labels`` gives the component of every
    vertex. A non-positive deflated eigenvalue means the component is not
    actually connected (or the matrix is indefinite) and is an error.
    """
    L = np.asarray(L, dtype=float)
    labels = np.asarray(labels)
    n = L.shape[0]
    P = np.zeros((n, n))
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < 2:
            continue
        block = L[np.ix_(idx, idx)]
        dec = deflated_spectrum(block)
        lam = dec.eigenvalues
        if lam[0] <= 0:
            raise IndefiniteMatrixError(
                f"component containing vertex {idx[0] + 1} has deflated eigenvalue {lam[0]:.6g}"
            )
        U2 = ones_complement(len(idx))
        W = U2 @ dec.eigenvectors
        P[np.ix_(idx, idx)] = (W / lam) @ W.T
    return 0.5 * (P + P.T)
