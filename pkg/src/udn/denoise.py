"""Rank-r spectral denoising, rank selection, and the spectral-gap check.

Denoising projects each noisy row onto the span of the top-r right singular
vectors of the noisy matrix.  The gap check compares the r-th singular
value of the clean matrix (or a proxy) against 1 + c1 * sigma * (sqrt(n) +
sqrt(d)); below that threshold the r-th signal direction competes with the
noise bulk and the projection degrades.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .linalg import RANDOMIZED_OVERSAMPLE, as_matrix, project_rows, svd

__all__ = [
    "DenoiseResult",
    "SpectralGapReport",
    "pca_denoise",
    "select_rank",
    "spectral_gap_check",
]

DEFAULT_EIGENGAP_MAX_RANK = 20
RANK_THRESHOLD_FACTOR = 1.5  # heuristic: midway between noise edge and signal


@dataclass(frozen=True)
class DenoiseResult:
    """Denoised matrix plus the projection basis that produced it."""

    Xhat: np.ndarray             # (n, d) = Z V_r V_r^T
    V_r: np.ndarray              # (d, r) orthonormal columns
    singular_values: np.ndarray  # leading computed singular values of Z
    rank_used: int
    tied_at_cut: bool            # sigma_r == sigma_{r+1} within round-off


@dataclass(frozen=True)
class SpectralGapReport:
    lambda_r: float
    threshold: float  # 1 + c1 * sigma * (sqrt(n) + sqrt(d))
    c1: float
    satisfied: bool


def pca_denoise(z, rank: int) -> DenoiseResult:
    """Project rows of ``z`` onto the span of its top-``rank`` right singular vectors.

    Deterministic given ``z`` up to the usual sign/tied-subspace ambiguity
    of singular vectors.  When the singular values are tied at the cut the
    retained basis is an arbitrary but deterministic basis of the top-r
    subspace and the result is flagged.
    """
    Z = as_matrix(z)
    n, d = Z.shape
    m = min(n, d)
    if not 1 <= rank <= m:
        raise DataError(f"rank must be in [1, {m}], got {rank}")
    k = min(m, rank + RANDOMIZED_OVERSAMPLE)
    res = svd(Z, k)
    s = res.singular_values
    v_r = res.right_vectors[:, :rank]
    tied = bool(rank < s.size and (s[rank - 1] - s[rank]) <= 1e-12 * max(s[0], 1.0))
    return DenoiseResult(
        Xhat=project_rows(Z, v_r),
        V_r=v_r,
        singular_values=s,
        rank_used=rank,
        tied_at_cut=tied,
    )


def select_rank(z, sigma_hint: float | None = None, max_rank: int | None = None) -> int:
    """Choose a projection rank from the spectrum of ``z``.

    With ``sigma_hint``, counts singular values above
    ``RANK_THRESHOLD_FACTOR * sigma * (sqrt(n) + sqrt(d))`` (returns 0 with a
    warning when nothing clears it).  Without a hint, returns the k <=
    ``max_rank`` maximizing the consecutive singular-value ratio.
    """
    Z = as_matrix(z)
    n, d = Z.shape
    m = min(n, d)
    if sigma_hint is not None:
        if sigma_hint < 0.0:
            raise DataError("sigma_hint must be nonnegative")
        threshold = RANK_THRESHOLD_FACTOR * sigma_hint * (math.sqrt(n) + math.sqrt(d))
        k = min(m, 32)
        s = svd(Z, k).singular_values
        while int((s > threshold).sum()) == k and k < m:
            k = min(m, 2 * k)
            s = svd(Z, k).singular_values
        rank = int((s > threshold).sum())
        if rank == 0:
            warnings.warn(
                "no singular value clears the noise threshold; returning rank 0",
                RuntimeWarning,
                stacklevel=2,
            )
        return rank
    if max_rank is None:
        max_rank = min(DEFAULT_EIGENGAP_MAX_RANK, m - 1)
    if not 1 <= max_rank <= m - 1:
        raise DataError(f"max_rank must be in [1, {m - 1}], got {max_rank}")
    s = svd(Z, max_rank + 1).singular_values
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = s[:-1] / s[1:]
    ratios[~np.isfinite(ratios) & (s[:-1] == 0.0)] = 0.0  # trailing zero block
    return int(np.argmax(ratios)) + 1


def spectral_gap_check(x_or_proxy, rank: int, sigma: float, c1: float = 1.0) -> SpectralGapReport:
    """Compare the rank-th singular value against 1 + c1*sigma*(sqrt(n)+sqrt(d))."""
    X = as_matrix(x_or_proxy)
    n, d = X.shape
    if sigma < 0.0:
        raise DataError("sigma must be nonnegative")
    if not 1 <= rank <= min(n, d):
        raise DataError(f"rank must be in [1, {min(n, d)}], got {rank}")
    lam = float(svd(X, rank).singular_values[-1])
    threshold = 1.0 + c1 * sigma * (math.sqrt(n) + math.sqrt(d))
    return SpectralGapReport(
        lambda_r=lam, threshold=threshold, c1=c1, satisfied=bool(lam > threshold)
    )
