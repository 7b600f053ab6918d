"""Dense matrix decompositions used by every other module.

Matrices are plain float64 ``numpy.ndarray`` values in row-major (C) order.
The three factorizations here (SVD, symmetric eigendecomposition, SPD
factor/solve) are backed by LAPACK through numpy/scipy, which is
deterministic for a fixed input on a fixed build. Everything is pure:
inputs are never mutated and results are safe to share between threads.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NotPositiveDefinite

__all__ = [
    "as_matrix",
    "svd_decompose",
    "sym_eig",
    "solve_spd",
    "spd_factor",
    "SvdResult",
    "SymEigResult",
    "SpdFactor",
]

# Relative asymmetry tolerated by sym_eig before the input is rejected.
_SYM_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Coerce ``a`` to a 2-D float64 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidInput(f"{name} must be 2-D with at least one row and column")
    if not np.all(np.isfinite(m)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``a = u @ diag(singular_values) @ v.T``.

    ``u`` is rows x r and ``v`` is cols x r with r = min(rows, cols);
    singular values are non-negative and sorted non-increasing.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.singular_values) @ self.v.T


@dataclass(frozen=True)
class SymEigResult:
    """Eigenpairs of a symmetric matrix, eigenvalues sorted non-increasing.

    Eigenvector columns are unit-norm, mutually orthonormal, and
    sign-fixed so each column's largest-magnitude entry is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _fix_column_signs(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def svd_decompose(a):
    """Thin singular value decomposition of a real matrix.

    Rank-deficient inputs yield trailing zero singular values.
    """
    m = as_matrix(a)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdResult(u=u, singular_values=s, v=vt.T)


def sym_eig(a):
    """Eigendecomposition of a symmetric matrix.

    The input must be square and symmetric to within 1e-10 relative
    asymmetry; it is symmetrized as (A + A^T)/2 before factorization.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InvalidInput(f"sym_eig needs a square matrix, got {m.shape}")
    norm = np.linalg.norm(m)
    if np.linalg.norm(m - m.T) > _SYM_TOL * max(1.0, norm):
        raise InvalidInput("matrix is not symmetric within tolerance")
    sym = (m + m.T) / 2.0
    w, v = np.linalg.eigh(sym)
    order = np.argsort(w)[::-1]
    return SymEigResult(
        eigenvalues=w[order],
        eigenvectors=_fix_column_signs(v[:, order]),
    )


class SpdFactor:
    """Cholesky factor of an SPD matrix, reusable across right-hand sides."""

    def __init__(self, a):
        m = as_matrix(a)
        if m.shape[0] != m.shape[1]:
            raise InvalidInput(f"SPD factor needs a square matrix, got {m.shape}")
        try:
            self._cho = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy raises its own
            raise NotPositiveDefinite(str(exc)) from exc
        except scipy.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from exc
        self.shape = m.shape

    @property
    def lower(self):
        """The lower-triangular Cholesky factor L with A = L L^T."""
        return np.tril(self._cho[0])

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        squeeze = b.ndim == 1
        rhs = b.reshape(-1, 1) if squeeze else b
        if rhs.shape[0] != self.shape[0]:
            raise InvalidInput(
                f"right-hand side has {rhs.shape[0]} rows, factor expects {self.shape[0]}"
            )
        x = scipy.linalg.cho_solve(self._cho, rhs, check_finite=False)
        return x[:, 0] if squeeze else x


def spd_factor(a):
    """Factor a symmetric positive definite matrix for repeated solves."""
    return SpdFactor(a)


def solve_spd(a, b):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``.

    Raises NotPositiveDefinite when the Cholesky factorization fails,
    signalling the caller must regularize.
    """
    return SpdFactor(a).solve(b)
