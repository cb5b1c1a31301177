"""Dense linear-algebra primitives every other module builds on.

All functions are pure: inputs are never modified, workspaces are per call,
and results are deterministic for identical inputs (the randomized SVD path
draws its test matrix from a fixed Philox stream).  Matrices are dense,
real, row-major float64 arrays; a "data matrix" is an n x d array with one
sample per row.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import tolerances as tol
from .errors import DataError, NumericalError

__all__ = [
    "SvdResult",
    "EigPairs",
    "as_matrix",
    "svd",
    "two_inf_norm",
    "frobenius_norm",
    "spectral_norm",
    "inf_operator_norm",
    "project_rows",
    "sym_eig_smallest",
]

DENSE_SVD_MAX_DIM = 512      # exact LAPACK SVD whenever min(n, d) <= this
RANDOMIZED_OVERSAMPLE = 10
RANDOMIZED_POWER_ITERS = 4
_RANGE_FINDER_KEY = 0x53F1D9C4B82E6A07  # fixed stream keeps svd() deterministic


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite 2-D float64 array and return it."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    if n < 1 or d < 1:
        raise DataError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Top-k singular triplets; singular values sorted non-increasing."""

    left_vectors: np.ndarray     # (n, k)
    singular_values: np.ndarray  # (k,)
    right_vectors: np.ndarray    # (d, k)


@dataclass(frozen=True)
class EigPairs:
    """k eigenpairs of a symmetric matrix; eigenvalues ascending."""

    eigenvalues: np.ndarray   # (k,)
    eigenvectors: np.ndarray  # (n, k), orthonormal columns


def svd(a, k: int) -> SvdResult:
    """Top-k singular value decomposition of a dense matrix.

    Uses an exact LAPACK factorization when ``min(n, d)`` is at most
    ``DENSE_SVD_MAX_DIM`` (or when the requested k plus oversampling covers
    the whole spectrum), and a randomized subspace iteration with
    oversampling ``RANDOMIZED_OVERSAMPLE`` and ``RANDOMIZED_POWER_ITERS``
    power steps otherwise.  Singular vectors are defined up to column sign
    (and up to rotation inside a tied block); compare projectors, not raw
    columns.
    """
    A = as_matrix(a)
    n, d = A.shape
    m = min(n, d)
    if not 1 <= k <= m:
        raise DataError(f"k must be in [1, {m}], got {k}")
    if m <= DENSE_SVD_MAX_DIM or k + RANDOMIZED_OVERSAMPLE >= m:
        try:
            u, s, vt = np.linalg.svd(A, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"dense SVD did not converge: {exc}") from exc
        return SvdResult(u[:, :k].copy(), s[:k].copy(), vt[:k].T.copy())
    return _randomized_svd(A, k)


def _randomized_svd(A: np.ndarray, k: int) -> SvdResult:
    n, d = A.shape
    ell = min(k + RANDOMIZED_OVERSAMPLE, min(n, d))
    rng = np.random.Generator(np.random.Philox(key=_RANGE_FINDER_KEY))
    try:
        q, _ = np.linalg.qr(A @ rng.standard_normal((d, ell)))
        for _ in range(RANDOMIZED_POWER_ITERS):
            w, _ = np.linalg.qr(A.T @ q)
            q, _ = np.linalg.qr(A @ w)
        ub, s, vt = np.linalg.svd(q.T @ A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"randomized SVD did not converge: {exc}") from exc
    return SvdResult((q @ ub)[:, :k], s[:k].copy(), vt[:k].T.copy())


def two_inf_norm(a) -> float:
    """Largest row l2 norm: the uniform (2 -> infinity) error norm."""
    A = as_matrix(a)
    return float(np.sqrt((A * A).sum(axis=1).max()))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a), "fro"))


def spectral_norm(a) -> float:
    """Largest singular value (l2 operator norm)."""
    return float(np.linalg.norm(as_matrix(a), 2))


def inf_operator_norm(a) -> float:
    """Largest row l1 sum (operator norm from l-inf to l-inf)."""
    A = as_matrix(a)
    return float(np.abs(A).sum(axis=1).max())


def project_rows(a, v_r) -> np.ndarray:
    """Project every row of ``a`` onto the column span of ``v_r``.

    ``v_r`` must be d x r with orthonormal columns; the result is
    ``a @ v_r @ v_r.T`` and the operation is idempotent.
    """
    A = as_matrix(a)
    V = as_matrix(v_r, "projection basis")
    if V.shape[0] != A.shape[1]:
        raise DataError(
            f"projection basis has {V.shape[0]} rows, expected {A.shape[1]}"
        )
    r = V.shape[1]
    if np.linalg.norm(V.T @ V - np.eye(r)) > tol.BASIS_INPUT_ATOL * max(1, r):
        raise DataError("projection basis columns are not orthonormal")
    return (A @ V) @ V.T


def sym_eig_smallest(s_mat, k: int) -> EigPairs:
    """k smallest eigenpairs of a symmetric matrix, eigenvalues ascending.

    The input may be asymmetric up to ``SYMMETRY_ATOL`` (relative to its
    largest entry); it is symmetrized internally before factorization.
    """
    S = as_matrix(s_mat, "symmetric matrix")
    n, m = S.shape
    if n != m:
        raise DataError(f"matrix must be square, got shape {S.shape}")
    if not 1 <= k <= n:
        raise DataError(f"k must be in [1, {n}], got {k}")
    scale = max(1.0, float(np.abs(S).max()))
    if float(np.abs(S - S.T).max()) > tol.SYMMETRY_ATOL * scale:
        raise DataError("matrix is not symmetric within tolerance")
    S = 0.5 * (S + S.T)
    try:
        w, v = scipy.linalg.eigh(S, subset_by_index=(0, k - 1))
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    return EigPairs(w, v)
