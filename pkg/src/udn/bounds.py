"""Uniform-error bound evaluators, the leave-one-out residual, and the
single-segment lower-bound machinery.

The bound evaluators plug concrete (n, d, sigma, lambda_r) into the
theoretical error expressions with every unpinned constant collapsed to a
single calibration parameter c2.  They are trend evaluators, not certified
inequalities: tests check shape and ordering with generous slack.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, ndtr

from .errors import DataError
from .linalg import as_matrix, svd
from .rng import make_rng, seed_for

__all__ = [
    "BoundReport",
    "LowerBoundThresholds",
    "MonteCarloLowerBound",
    "theorem1_bounds",
    "leave_one_out_residual",
    "bayes_t_estimator",
    "bayes_t_estimator_sigma_squared_form",
    "lower_bound_thresholds",
    "lower_bound_montecarlo",
]

#: Standard normal CDF at -1, via the complementary error function.
PHI_MINUS_ONE = float(0.5 * math.erfc(1.0 / math.sqrt(2.0)))

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated uniform-error upper bounds for one (n, d, sigma, lambda_r)."""

    general_bound: float    # two-term minimum plus the correction term
    regime_bound: float     # simplified form for d >= n or d < n
    canonical_bound: float  # c2 * sigma * log(n)
    constants_used: dict
    regime: str             # "d_large" when d >= n else "d_small"


def theorem1_bounds(n: int, d: int, sigma: float, lambda_r: float, c2: float = 1.0) -> BoundReport:
    """Evaluate the uniform-error upper bounds at the given problem size.

    The general bound is
    ``c2 * min(sigma*(sqrt(n)+sqrt(d))/lam + n*sigma*sqrt(log n)/lam^2,
    sigma/lam^2 * (sqrt(n*d) + n*sqrt(log n)))`` plus the correction term
    ``Gamma * (1 + sigma*(sqrt(d)+sqrt(log n))) / lam^2`` with
    ``Gamma = c2*sigma/lam^2 * sqrt(log n) * (n + sigma^2*n*sqrt(n) +
    sigma^2*d*sqrt(n)) * (1 + sigma*sqrt(log n))``.
    """
    if n < 1 or d < 1:
        raise DataError("n and d must be >= 1")
    if sigma < 0.0:
        raise DataError("sigma must be nonnegative")
    if lambda_r <= 0.0:
        raise DataError("lambda_r must be positive")
    ln = math.log(n)
    sln = math.sqrt(ln)
    lam = float(lambda_r)
    term_a = sigma * (math.sqrt(n) + math.sqrt(d)) / lam + n * sigma * sln / lam**2
    term_b = sigma / lam**2 * (math.sqrt(n * d) + n * sln)
    gamma = (
        c2 * sigma / lam**2
        * sln
        * (n + sigma**2 * n * math.sqrt(n) + sigma**2 * d * math.sqrt(n))
        * (1.0 + sigma * sln)
    )
    general = c2 * min(term_a, term_b) + gamma / lam**2 * (
        1.0 + sigma * (math.sqrt(d) + sln)
    )
    if d >= n:
        ratio = d / n
        regime = c2 * (
            math.sqrt(ratio) * sigma * (1.0 + ratio * sigma**3 * sln + ratio * sigma**4 * ln)
            + sln * sigma
        )
        tag = "d_large"
    else:
        regime = c2 * sln * sigma * (1.0 + sigma**4 * math.sqrt(d * ln / n))
        tag = "d_small"
    return BoundReport(
        general_bound=float(general),
        regime_bound=float(regime),
        canonical_bound=float(c2 * sigma * ln),
        constants_used={"c2": float(c2)},
        regime=tag,
    )


def leave_one_out_residual(z, index: int, rank: int) -> float:
    """Component of the full-data top-``rank`` right singular vectors outside
    the leave-one-row-out top-``rank`` subspace.

    Returns ``max_{k <= rank} || (I - W W^T) v_k ||`` where the ``v_k`` come
    from the full matrix and ``W`` spans the top subspace with row ``index``
    deleted.
    """
    Z = as_matrix(z)
    n, d = Z.shape
    if n < 2:
        raise DataError("need at least two rows to leave one out")
    if not 0 <= index < n:
        raise DataError(f"row index {index} out of range [0, {n})")
    if not 1 <= rank <= min(n - 1, d):
        raise DataError(f"rank must be in [1, {min(n - 1, d)}], got {rank}")
    v_full = svd(Z, rank).right_vectors
    v_loo = svd(np.delete(Z, index, axis=0), rank).right_vectors
    resid = v_full - v_loo @ (v_loo.T @ v_full)
    return float(np.sqrt((resid * resid).sum(axis=0).max()))


def _phi_ratio(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """(phi(alpha) - phi(beta)) / (Phi(beta) - Phi(alpha)) for beta > alpha.

    Evaluated through the scaled complementary error function when the
    interval sits in one tail, so the ratio stays finite even when both CDF
    values underflow.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    out = np.empty(np.broadcast(alpha, beta).shape)
    a = np.broadcast_to(alpha, out.shape)
    b = np.broadcast_to(beta, out.shape)

    right = a >= 0.0          # whole interval in the upper tail
    left = b <= 0.0           # whole interval in the lower tail
    mid = ~(right | left)

    if right.any():
        ar, br = a[right], b[right]
        w = np.exp(0.5 * (ar * ar - br * br))  # <= 1
        den = 0.5 * (erfcx(ar / math.sqrt(2.0)) - w * erfcx(br / math.sqrt(2.0)))
        out[right] = (1.0 - w) / (_SQRT_2PI * den)
    if left.any():
        al, bl = -b[left], -a[left]  # 0 <= al <= bl
        w = np.exp(0.5 * (al * al - bl * bl))
        den = 0.5 * (erfcx(al / math.sqrt(2.0)) - w * erfcx(bl / math.sqrt(2.0)))
        out[left] = -(1.0 - w) / (_SQRT_2PI * den)
    if mid.any():
        am, bm = a[mid], b[mid]
        num = np.exp(-0.5 * am * am) - np.exp(-0.5 * bm * bm)
        out[mid] = num / (_SQRT_2PI * (ndtr(bm) - ndtr(am)))
    return out


def bayes_t_estimator(z_proj, v_norm: float, sigma: float):
    """Posterior mean of the curve parameter t given one projected observation.

    In the single-segment model a row is (t + 1) v plus isotropic Gaussian
    noise, t uniform on [0, 1]; conditioning on ``z_proj = row . v / ||v||``
    makes t + 1 a normal with mean ``z_proj/||v||`` and scale ``sigma/||v||``
    truncated to [1, 2], whose mean this evaluates.  Scalar in, scalar out;
    arrays are mapped elementwise.
    """
    if v_norm <= 0.0:
        raise DataError("v_norm must be positive")
    if sigma <= 0.0:
        raise DataError("sigma must be positive")
    z = np.asarray(z_proj, dtype=float)
    scalar = z.ndim == 0
    mu = z / v_norm
    s = sigma / v_norm
    alpha = (1.0 - mu) / s
    beta = (2.0 - mu) / s
    t_hat = mu - 1.0 + s * _phi_ratio(alpha, beta)
    return float(t_hat) if scalar else t_hat


def bayes_t_estimator_sigma_squared_form(z_proj, v_norm: float, sigma: float):
    """Variant closed form with a squared scale prefactor and flipped ratio sign.

    This transcription of the posterior mean appears plausible but is biased:
    it disagrees with direct quadrature of the posterior except near the
    midpoint.  It is retained so tests can measure that bias explicitly
    rather than hide it; use :func:`bayes_t_estimator` for the exact value.
    """
    if v_norm <= 0.0:
        raise DataError("v_norm must be positive")
    if sigma <= 0.0:
        raise DataError("sigma must be positive")
    z = np.asarray(z_proj, dtype=float)
    scalar = z.ndim == 0
    mu = z / v_norm
    s = sigma / v_norm
    alpha = (1.0 - mu) / s
    beta = (2.0 - mu) / s
    t_hat = mu - 1.0 - s * s * _phi_ratio(alpha, beta)
    return float(t_hat) if scalar else t_hat


@dataclass(frozen=True)
class LowerBoundThresholds:
    """Noise and sample-size thresholds beyond which no estimator can keep
    the expected squared uniform error below epsilon^2."""

    sigma_threshold: float  # 4 * epsilon / sqrt(Phi(-1))
    n_threshold: float      # d * sigma^2 / (5 * epsilon^2)
    epsilon: float


def lower_bound_thresholds(epsilon: float, d: int, sigma: float) -> LowerBoundThresholds:
    if d < 1:
        raise DataError("d must be >= 1")
    if sigma <= 0.0:
        raise DataError("sigma must be positive")
    if not 0.0 < epsilon < d / 4.0:
        raise DataError(f"epsilon must lie in (0, d/4) = (0, {d / 4.0})")
    return LowerBoundThresholds(
        sigma_threshold=4.0 * epsilon / math.sqrt(PHI_MINUS_ONE),
        n_threshold=d * sigma**2 / (5.0 * epsilon**2),
        epsilon=float(epsilon),
    )


@dataclass(frozen=True)
class MonteCarloLowerBound:
    """Mean of the per-trial worst-row squared error of the oracle estimator."""

    mean: float
    stderr: float
    values: np.ndarray  # (trials,)


def lower_bound_montecarlo(
    d: int, n: int, sigma: float, trials: int, seed: int
) -> MonteCarloLowerBound:
    """Simulate the single-segment model and apply the direction-aware
    posterior-mean estimator per row.

    Each trial draws a direction v ~ N(0, I/d) and parameters t ~ U[0, 1];
    Gaussian noise enters the estimator only through its projection on v, so
    that projection is drawn directly as N(0, sigma^2).  The recorded value
    is ``max_i |t_hat_i - t_i|^2 ||v||^2``, an optimistic proxy for the
    squared uniform error of any estimator on the same draws.  Deterministic
    given ``seed``; trials use split streams.
    """
    if trials < 1:
        raise DataError("trials must be >= 1")
    if d < 1 or n < 1:
        raise DataError("n and d must be >= 1")
    if sigma < 0.0:
        raise DataError("sigma must be nonnegative")
    values = np.empty(trials)
    for trial in range(trials):
        rng = make_rng(seed_for(seed, trial))
        v = rng.standard_normal(d) / math.sqrt(d)
        t = rng.uniform(0.0, 1.0, n)
        v_norm = float(np.linalg.norm(v))
        z = (t + 1.0) * v_norm + sigma * rng.standard_normal(n)
        if sigma == 0.0:
            t_hat = np.clip(z / v_norm - 1.0, 0.0, 1.0)
        else:
            t_hat = bayes_t_estimator(z, v_norm, sigma)
        values[trial] = float(((t_hat - t) ** 2).max() * v_norm**2)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloLowerBound(mean=mean, stderr=stderr, values=values)
