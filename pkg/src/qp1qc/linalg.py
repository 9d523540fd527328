"""Dense symmetric linear algebra used throughout the package.

Every rank decision goes through one relative cutoff so that badly scaled
instances behave the same as well scaled ones: an eigenvalue (or singular
value) is treated as zero when its magnitude is at most
``tol.rel * max(1, scale)``, where ``scale`` is the largest magnitude in the
same spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonConvergence


@dataclass(frozen=True)
class Tolerance:
    """Relative threshold plus an absolute floor."""

    rel: float = 1e-9
    abs: float = 1e-12

    def __post_init__(self):
        if not (self.rel > 0 and self.abs > 0):
            raise ValueError("tolerances must be positive")

    def cutoff(self, scale: float) -> float:
        return max(self.rel * max(1.0, scale), self.abs)


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class EigDecomp:
    values: np.ndarray  # ascending
    vectors: np.ndarray  # orthonormal columns

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def as_sym(M) -> np.ndarray:
    """Return ``M`` as a float array, symmetrized exactly.

    Raises ``ValueError`` for non-square or non-finite input.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (M + M.T)


def sym_eig(M) -> EigDecomp:
    M = as_sym(M)
    try:
        w, Q = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergence(str(exc)) from exc
    return EigDecomp(w, Q)


def lambda_min(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def pinv(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric matrix via its eigenvectors."""
    e = sym_eig(M)
    keep = np.abs(e.values) > tol.cutoff(e.scale)
    Q = e.vectors[:, keep]
    return (Q / e.values[keep]) @ Q.T


def null_basis(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``M``."""
    e = sym_eig(M)
    zero = np.abs(e.values) <= tol.cutoff(e.scale)
    return e.vectors[:, zero]


def range_basis(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    e = sym_eig(M)
    keep = np.abs(e.values) > tol.cutoff(e.scale)
    return e.vectors[:, keep]


def rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    return range_basis(M, tol).shape[1]


def range_contains(M, b, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff ``b`` lies in the range of the symmetric matrix ``M``.

    For symmetric ``M`` this is ``b`` orthogonal to the null space, i.e.
    ``||(I - M M^+) b|| <= rel * max(1, ||b||)``.
    """
    b = np.asarray(b, dtype=float)
    N = null_basis(M, tol)
    if N.shape[1] == 0:
        return True
    resid = np.linalg.norm(N.T @ b)
    return bool(resid <= tol.rel * max(1.0, np.linalg.norm(b)))


def is_psd(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    M = as_sym(M)
    if M.size == 0:
        return True
    w = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    return bool(w[0] >= -tol.rel * scale)


def is_pd(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    M = as_sym(M)
    if M.size == 0:
        return True
    w = np.linalg.eigvalsh(M)
    scale = max(1.0, float(np.max(np.abs(w))))
    return bool(w[0] > tol.rel * scale)


def joint_null_split(A, B, tol: Tolerance = DEFAULT_TOL):
    """Split R^n into N(A) ∩ N(B) and its orthogonal complement.

    Returns ``(V, U)``: ``V`` spans the joint null space, ``U`` the rest; both
    have orthonormal columns and ``U.T @ V == 0`` to rounding.

    The joint null space is the null space of the stacked matrix ``[A; B]``,
    read off from its SVD.
    """
    A = as_sym(A)
    B = as_sym(B)
    n = A.shape[0]
    if B.shape != A.shape:
        raise ValueError("A and B must have the same shape")
    _, s, Vt = np.linalg.svd(np.vstack([A, B]))
    smax = float(s[0]) if s.size else 0.0
    nonzero = int(np.sum(s > tol.cutoff(smax)))
    U = Vt[:nonzero].T.copy()
    V = Vt[nonzero:].T.copy()
    assert U.shape[1] + V.shape[1] == n
    return V, U


def inv_sqrt_pd(W) -> np.ndarray:
    """``W^{-1/2}`` for a symmetric positive definite ``W``."""
    w, Q = np.linalg.eigh(as_sym(W))
    return (Q / np.sqrt(w)) @ Q.T

