"""Downstream consumers of denoised data: k-means clustering with a margin
checker, the Gaussian-kernel normalized graph Laplacian with its Fiedler
pair, label agreement metrics, the averaged-error comparison matrix, and a
least-squares loss-gap check.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DataError, NumericalError
from .linalg import as_matrix, inf_operator_norm, sym_eig_smallest, two_inf_norm

__all__ = [
    "Clustering",
    "AssumptionReport",
    "LaplacianResult",
    "kmeans",
    "check_cluster_assumption",
    "normalized_laplacian",
    "gaussian_kernel_matrix",
    "laplacian_inf_distance",
    "sign_cluster",
    "adjusted_rand_index",
    "clustering_accuracy",
    "make_average_error_matrix",
    "erm_gap_check",
]

DEFAULT_KMEANS_RESTARTS = 10
DEFAULT_KMEANS_MAX_ITERS = 100


@dataclass(frozen=True)
class Clustering:
    """K-means output.  ``loss`` is the mean squared distance to the assigned
    center, i.e. (1/n) sum_k sum_{i in C_k} ||X_i - m_k||^2."""

    labels: np.ndarray        # (n,) ints in [0, K)
    centers: np.ndarray       # (K, d)
    loss: float
    iterations: int
    loss_history: np.ndarray  # loss after each Lloyd update, non-increasing


def _assign(X, centers):
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2


def _loss(X, centers, labels) -> float:
    diff = X - centers[labels]
    return float((diff * diff).sum() / X.shape[0])


def _kmeans_pp_seed(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:  # all remaining mass on duplicates: pick uniformly
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[j] = X[idx]
        d2 = np.minimum(d2, ((X - centers[j]) ** 2).sum(axis=1))
    return centers


def _lloyd(X, centers, max_iters):
    n, k = X.shape[0], centers.shape[0]
    labels, _ = _assign(X, centers)
    history = []
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        for j in range(k):
            mask = labels == j
            if mask.any():
                centers[j] = X[mask].mean(axis=0)
            else:
                # deterministic rescue: farthest point from its current center
                far = ((X - centers[labels]) ** 2).sum(axis=1).argmax()
                centers[j] = X[far]
                labels[far] = j
        new_labels, _ = _assign(X, centers)
        loss = _loss(X, centers, new_labels)
        if history and loss > history[-1] + tol.KMEANS_LOSS_SLACK * (1.0 + history[-1]):
            raise NumericalError("k-means loss increased between iterations")
        history.append(loss)
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return labels, centers, history, iterations


def kmeans(
    x,
    k: int,
    rng,
    max_iters: int = DEFAULT_KMEANS_MAX_ITERS,
    restarts: int = DEFAULT_KMEANS_RESTARTS,
) -> Clustering:
    """Lloyd iterations from distance-weighted seeding, best of ``restarts``.

    The per-iteration loss is checked to be non-increasing; an empty cluster
    is re-seeded at the point farthest from its assigned center.
    """
    X = as_matrix(x)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"k must be in [1, {n}], got {k}")
    if max_iters < 1 or restarts < 1:
        raise DataError("max_iters and restarts must be >= 1")
    best = None
    for child in rng.spawn(restarts):
        centers = _kmeans_pp_seed(X, k, child)
        labels, centers, history, iterations = _lloyd(X, centers.copy(), max_iters)
        loss = history[-1]
        if best is None or loss < best.loss:
            best = Clustering(
                labels=labels,
                centers=centers,
                loss=loss,
                iterations=iterations,
                loss_history=np.asarray(history),
            )
    return best


@dataclass(frozen=True)
class AssumptionReport:
    """Observed cluster geometry and the resulting margin verdict.

    ``margin_ok`` records whether the minimum center gap clears
    ``2 * (delta + eps + 2 * sqrt(2 * (delta^2 + eps^2) / c0))``, the
    condition under which minimizing the k-means loss on data within uniform
    error eps of the clean points recovers every label.
    """

    observed_min_frac: float        # c0: smallest cluster share
    observed_max_radius: float      # delta: largest within-cluster radius
    observed_min_center_gap: float  # c_m; nan when fewer than two clusters
    c0_ok: bool
    delta_ok: bool
    cm_ok: bool
    margin_ok: bool
    single_cluster: bool


def check_cluster_assumption(
    x,
    labels,
    epsilon: float,
    c0_min: float | None = None,
    delta_max: float | None = None,
    cm_min: float | None = None,
) -> AssumptionReport:
    """Measure cluster geometry (around empirical centers) and the margin.

    Optional thresholds turn the c0/delta/c_m observations into pass flags;
    a missing threshold passes vacuously.
    """
    X = as_matrix(x)
    labels = np.asarray(labels)
    if labels.shape != (X.shape[0],):
        raise DataError("labels must be a 1-D array matching the row count")
    if epsilon < 0.0:
        raise DataError("epsilon must be nonnegative")
    uniq, inverse = np.unique(labels, return_inverse=True)
    k = uniq.size
    n = X.shape[0]
    fracs = np.bincount(inverse, minlength=k) / n
    centers = np.vstack([X[inverse == j].mean(axis=0) for j in range(k)])
    radius = max(
        float(np.linalg.norm(X[inverse == j] - centers[j], axis=1).max())
        for j in range(k)
    )
    single = k < 2
    if single:
        gap = float("nan")
        margin_ok = False
    else:
        diffs = centers[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diffs * diffs).sum(axis=2))
        gap = float(dist[np.triu_indices(k, 1)].min())
        c0 = float(fracs.min())
        margin_ok = bool(
            gap
            > 2.0 * (radius + epsilon + 2.0 * math.sqrt(2.0 * (radius**2 + epsilon**2) / c0))
        )
    return AssumptionReport(
        observed_min_frac=float(fracs.min()),
        observed_max_radius=radius,
        observed_min_center_gap=gap,
        c0_ok=bool(c0_min is None or fracs.min() >= c0_min),
        delta_ok=bool(delta_max is None or radius <= delta_max),
        cm_ok=bool(not single and (cm_min is None or gap >= cm_min)),
        margin_ok=margin_ok,
        single_cluster=single,
    )


def gaussian_kernel_matrix(x, bandwidth: float) -> np.ndarray:
    """Dense kernel matrix exp(-||x_i - x_j||^2 / (2 b^2)) with unit diagonal."""
    X = as_matrix(x)
    if bandwidth <= 0.0:
        raise DataError("bandwidth must be positive")
    sq = (X * X).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.clip(d2, 0.0, None, out=d2)
    A = np.exp(-d2 / (2.0 * bandwidth**2))
    A = 0.5 * (A + A.T)
    np.fill_diagonal(A, 1.0)
    return A


@dataclass(frozen=True)
class LaplacianResult:
    """Normalized Laplacian I - D^{-1/2} A D^{-1/2} with its Fiedler pair."""

    L: np.ndarray             # (n, n) symmetric
    degrees: np.ndarray       # (n,) positive row sums of the kernel matrix
    fiedler_value: float      # second smallest eigenvalue
    fiedler_vector: np.ndarray  # (n,) unit norm


def normalized_laplacian(x, bandwidth: float) -> LaplacianResult:
    """Gaussian-kernel normalized Laplacian and its Fiedler eigenpair.

    Kernel self-similarity is kept on the diagonal and counted in the
    degrees, so degrees are at least 1 and the construction never divides by
    zero.
    """
    A = gaussian_kernel_matrix(x, bandwidth)
    n = A.shape[0]
    if n < 2:
        raise DataError("need at least two rows for a Fiedler pair")
    degrees = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    L = -(inv_sqrt[:, None] * A * inv_sqrt[None, :])
    L[np.diag_indices(n)] += 1.0
    L = 0.5 * (L + L.T)
    pairs = sym_eig_smallest(L, 2)
    return LaplacianResult(
        L=L,
        degrees=degrees,
        fiedler_value=float(pairs.eigenvalues[1]),
        fiedler_vector=pairs.eigenvectors[:, 1],
    )


def laplacian_inf_distance(l1, l2) -> float:
    """Max-row-l1 distance between two Laplacians of equal shape."""
    A = as_matrix(l1, "first Laplacian")
    B = as_matrix(l2, "second Laplacian")
    if A.shape != B.shape:
        raise DataError(f"shape mismatch: {A.shape} vs {B.shape}")
    return inf_operator_norm(A - B)


def sign_cluster(v) -> np.ndarray:
    """Two-way labels from the signs of a vector; zeros go to class 1."""
    vec = np.asarray(v, dtype=float)
    if vec.ndim != 1:
        raise DataError("expected a 1-D vector")
    return (vec >= 0.0).astype(int)


def _comb2(counts):
    counts = np.asarray(counts, dtype=float)
    return counts * (counts - 1.0) / 2.0


def adjusted_rand_index(a, b) -> float:
    """Chance-adjusted pair-counting agreement between two labelings.

    1 for identical partitions (up to renaming), about 0 for independent
    random labelings; symmetric and invariant to label permutations.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1:
        raise DataError("labelings must be 1-D")
    if a.shape != b.shape:
        raise DataError("labelings must have equal length")
    n = a.size
    if n < 2:
        raise DataError("need at least two samples")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    ka, kb = ia.max() + 1, ib.max() + 1
    table = np.zeros((ka, kb))
    np.add.at(table, (ia, ib), 1.0)
    sum_ij = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = n * (n - 1.0) / 2.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:  # both partitions trivial: perfect agreement
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def clustering_accuracy(labels, truth) -> float:
    """Two-class agreement maximized over the label swap."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    if labels.shape != truth.shape:
        raise DataError("labelings must have equal length")
    hit = float((labels == truth).mean())
    return max(hit, 1.0 - hit)


def make_average_error_matrix(x, z, xhat, fraction: float, rng) -> np.ndarray:
    """Concentrate the average error of ``xhat`` onto a random row subset.

    Picks ceil(fraction * n) rows I and returns X off I and
    ``alpha X + (1 - alpha) Z`` on I, with alpha solving
    ``(1 - alpha)^2 sum_I ||Z_i - X_i||^2 = sum_i ||X_i - Xhat_i||^2`` so the
    result matches the mean squared row error of ``xhat`` exactly.  When the
    target exceeds the available noise energy alpha clamps to 0 with a
    warning; when the selected rows carry no noise but the target is nonzero
    the construction is infeasible and raises.
    """
    X = as_matrix(x, "clean matrix")
    Z = as_matrix(z, "noisy matrix")
    H = as_matrix(xhat, "denoised matrix")
    if X.shape != Z.shape or X.shape != H.shape:
        raise DataError("all three matrices must share a shape")
    if not 0.0 < fraction < 1.0:
        raise DataError("fraction must lie in (0, 1)")
    n = X.shape[0]
    m = math.ceil(fraction * n)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    target = float(((H - X) ** 2).sum())
    denom = float(((Z[idx] - X[idx]) ** 2).sum())
    if denom == 0.0:
        if target > 0.0:
            raise DataError(
                "selected rows carry no noise; cannot match a nonzero average error"
            )
        alpha = 1.0
    else:
        ratio = target / denom
        if ratio > 1.0:
            warnings.warn(
                "average error of the denoised matrix exceeds the noise energy "
                "on the selected rows; clamping alpha to 0",
                RuntimeWarning,
                stacklevel=2,
            )
            alpha = 0.0
        else:
            alpha = 1.0 - math.sqrt(ratio)
    out = X.copy()
    out[idx] = alpha * X[idx] + (1.0 - alpha) * Z[idx]
    return out


def erm_gap_check(x, xhat, y):
    """Least-squares loss gap between fits on clean and denoised designs.

    Fits theta on ``x`` and theta_hat on ``xhat`` with squared loss
    F = (theta.T x - y)^2 / 2, evaluates both on the clean-data risk, and
    returns ``(gap, 2 * L * eps)`` where eps is the uniform row error of the
    denoised design and L is the largest observed gradient norm
    |residual| * ||theta|| over both designs and both fits.
    """
    X = as_matrix(x, "clean design")
    H = as_matrix(xhat, "denoised design")
    if X.shape != H.shape:
        raise DataError("designs must share a shape")
    yv = np.asarray(y, dtype=float)
    if yv.shape != (X.shape[0],) or not np.all(np.isfinite(yv)):
        raise DataError("y must be a finite vector matching the row count")
    d = X.shape[1]
    if np.linalg.matrix_rank(X) < d or np.linalg.matrix_rank(H) < d:
        raise DataError("designs must have full column rank")
    theta = np.linalg.lstsq(X, yv, rcond=None)[0]
    theta_hat = np.linalg.lstsq(H, yv, rcond=None)[0]

    def clean_risk(th):
        resid = X @ th - yv
        return float(0.5 * (resid * resid).mean())

    gap = abs(clean_risk(theta_hat) - clean_risk(theta))
    eps = two_inf_norm(H - X)
    lipschitz = max(
        float(np.abs(design @ th - yv).max()) * float(np.linalg.norm(th))
        for design in (X, H)
        for th in (theta, theta_hat)
    )
    return gap, 2.0 * lipschitz * eps
