"""Synthetic data: zigzag curves, a separated two-class model, and noise.

A zigzag curve is a piecewise-linear path on R unit-direction segments
parameterized over [0, 1], centered so it has zero mean under a uniform
parameter, which also places it inside the closed unit ball (its arc length
is exactly 1, so no point can be farther than 1 from the mean).  The
two-class model shifts two independently drawn curves into opposite slabs
along the first intrinsic coordinate and embeds them into ambient dimension
d with an orthonormal matrix, so sampled rows keep norm at most 1.
"""

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DataError, NumericalError
from .linalg import as_matrix
from .matrixio import save_labels_csv, save_matrix_binary, save_matrix_csv
from .rng import make_rng

__all__ = [
    "ZigzagCurve",
    "TwoClassZigzagModel",
    "NoiseSpec",
    "LabeledSample",
    "generate_zigzag",
    "sample_curve",
    "make_two_class_model",
    "sample_two_class",
    "orthonormal_embedding",
    "add_noise",
    "curve_covariance",
    "curve_covariance_bound",
]

NOISE_FAMILIES = ("gaussian", "rademacher", "uniform")

_MIN_DIRECTION_GRAM_DET = 1e-3


@dataclass(frozen=True)
class ZigzagCurve:
    """Piecewise-linear path with unit-norm segment directions.

    ``evaluate(t)`` returns the raw path (anchor plus accumulated segments)
    minus ``mean_offset``.  Curves from :func:`generate_zigzag` have zero
    mean; curves stored inside a two-class model carry the class slab shift
    inside ``mean_offset``, so their mean sits at the slab center.
    """

    breakpoints: np.ndarray  # (R+1,), 0 = t_1 < ... < t_{R+1} = 1
    anchor: np.ndarray       # (r,), raw position of the first corner
    directions: np.ndarray   # (R, r), unit-norm rows
    intrinsic_dim: int
    mean_offset: np.ndarray  # (r,), subtracted from the raw path
    rho: float               # minimum segment length the curve was built with

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        dirs = np.asarray(self.directions, dtype=float)
        anchor = np.asarray(self.anchor, dtype=float)
        offset = np.asarray(self.mean_offset, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "mean_offset", offset)
        if bp.ndim != 1 or bp.size < 2:
            raise DataError("breakpoints must be a 1-D array with >= 2 entries")
        if abs(bp[0]) > 1e-12 or abs(bp[-1] - 1.0) > 1e-12:
            raise DataError("breakpoints must start at 0 and end at 1")
        gaps = np.diff(bp)
        if np.any(gaps < self.rho - 1e-12):
            raise DataError("breakpoint gaps fall below the stored rho")
        if dirs.ndim != 2 or dirs.shape[0] != bp.size - 1:
            raise DataError("directions must be (segments, intrinsic_dim)")
        if dirs.shape[1] != self.intrinsic_dim:
            raise DataError("direction width must equal intrinsic_dim")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > tol.UNIT_NORM_ATOL):
            raise DataError("segment directions must have unit norm")
        if anchor.shape != (self.intrinsic_dim,) or offset.shape != anchor.shape:
            raise DataError("anchor and mean_offset must be length intrinsic_dim")

    @property
    def segment_count(self) -> int:
        return self.directions.shape[0]

    def corners_raw(self) -> np.ndarray:
        """Raw corner points (R+1, r): anchor plus accumulated segments."""
        gaps = np.diff(self.breakpoints)
        steps = gaps[:, None] * self.directions
        out = np.empty((self.segment_count + 1, self.intrinsic_dim))
        out[0] = self.anchor
        np.cumsum(steps, axis=0, out=out[1:])
        out[1:] += self.anchor
        return out

    def corners(self) -> np.ndarray:
        """Corner points after the mean offset is removed."""
        return self.corners_raw() - self.mean_offset

    @property
    def mean(self) -> np.ndarray:
        """Mean of the evaluated curve under t ~ Uniform[0, 1] (closed form)."""
        return _path_mean(self.breakpoints, self.corners_raw(), self.directions) - self.mean_offset

    def evaluate(self, t):
        """Evaluate the centered path at parameter(s) t in [0, 1]."""
        ts = np.asarray(t, dtype=float)
        scalar = ts.ndim == 0
        ts = np.atleast_1d(ts)
        if not np.all(np.isfinite(ts)) or np.any(ts < 0.0) or np.any(ts > 1.0):
            raise DataError("curve parameter must lie in [0, 1]")
        idx = np.searchsorted(self.breakpoints, ts, side="right") - 1
        idx = np.clip(idx, 0, self.segment_count - 1)
        corners = self.corners_raw()
        pts = corners[idx] + (ts - self.breakpoints[idx])[:, None] * self.directions[idx]
        pts -= self.mean_offset
        return pts[0] if scalar else pts


def _path_mean(breakpoints, corners_raw, directions) -> np.ndarray:
    """Exact mean of the raw piecewise-linear path under t ~ Uniform[0, 1]."""
    gaps = np.diff(breakpoints)
    return (
        (gaps[:, None] * corners_raw[:-1]).sum(axis=0)
        + 0.5 * (gaps[:, None] ** 2 * directions).sum(axis=0)
    )


def _conditional_spacings(segments: int, rho: float, rng) -> np.ndarray:
    """Uniform spacings of [0, 1] conditioned on every gap being >= rho.

    Equivalent in distribution to rejection sampling of sorted uniforms but
    without the unbounded retry loop: shift-and-scale maps unconditioned
    spacings onto the constrained simplex exactly.
    """
    if segments == 1:
        return np.ones(1)
    cuts = np.sort(rng.uniform(0.0, 1.0, segments - 1))
    spacings = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    return rho + (1.0 - segments * rho) * spacings


def _draw_directions(segments: int, intrinsic_dim: int, rng, max_tries: int = 1000) -> np.ndarray:
    def draw(count):
        v = rng.standard_normal((count, intrinsic_dim))
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        nrm[nrm == 0.0] = 1.0
        return v / nrm

    dirs = draw(segments)
    for _ in range(max_tries):
        head = dirs[:intrinsic_dim]
        if np.linalg.det(head @ head.T) >= _MIN_DIRECTION_GRAM_DET:
            return dirs
        dirs = dirs.copy()
        dirs[:intrinsic_dim] = draw(intrinsic_dim)
    raise NumericalError("could not draw a well-conditioned direction set")


def generate_zigzag(segments: int, intrinsic_dim: int, rho: float, rng) -> ZigzagCurve:
    """Draw a centered zigzag curve with ``segments`` unit-norm segments.

    Breakpoint gaps are uniform spacings conditioned on a minimum length of
    ``rho``; the first ``intrinsic_dim`` directions are redrawn until their
    Gram determinant clears a floor, which forces the span dimension.  The
    curve is centered analytically, which also bounds every point by norm 1.
    """
    if segments < 1:
        raise DataError("segments must be >= 1")
    if not 1 <= intrinsic_dim <= segments:
        raise DataError("intrinsic_dim must be in [1, segments]")
    if rho <= 0.0:
        raise DataError("rho must be positive")
    if segments * rho > 1.0 + 1e-12:
        raise DataError(
            f"infeasible: {segments} segments of minimum length {rho} exceed [0, 1]"
        )
    gaps = _conditional_spacings(segments, rho, rng)
    breakpoints = np.concatenate(([0.0], np.cumsum(gaps)))
    breakpoints[-1] = 1.0
    directions = _draw_directions(segments, intrinsic_dim, rng)
    anchor = np.zeros(intrinsic_dim)
    corners_raw = np.vstack([anchor, anchor + np.cumsum(gaps[:, None] * directions, axis=0)])
    mean_offset = _path_mean(breakpoints, corners_raw, directions)
    curve = ZigzagCurve(
        breakpoints=breakpoints,
        anchor=anchor,
        directions=directions,
        intrinsic_dim=intrinsic_dim,
        mean_offset=mean_offset,
        rho=rho,
    )
    # centered arc of length 1 cannot leave the unit ball
    max_norm = float(np.linalg.norm(curve.corners(), axis=1).max())
    if max_norm > 1.0 + 1e-9:
        raise NumericalError(f"centered curve left the unit ball (norm {max_norm})")
    return curve


def sample_curve(curve: ZigzagCurve, t):
    """Evaluate ``curve`` at parameter(s) t in [0, 1]."""
    return curve.evaluate(t)


def curve_covariance(curve: ZigzagCurve) -> np.ndarray:
    """Covariance of the evaluated curve under t ~ Uniform[0, 1], in closed form.

    Per segment with centered start c, direction v and length g, the second
    moment contributes g*c*c' + (g^2/2)*(c*v' + v*c') + (g^3/3)*v*v'.
    """
    gaps = np.diff(curve.breakpoints)
    mean = curve.mean
    starts = curve.corners()[:-1] - mean
    dirs = curve.directions
    r = curve.intrinsic_dim
    sigma = np.zeros((r, r))
    for g, c, v in zip(gaps, starts, dirs):
        cv = np.outer(c, v)
        sigma += g * np.outer(c, c) + 0.5 * g * g * (cv + cv.T) + (g ** 3 / 3.0) * np.outer(v, v)
    return sigma


def curve_covariance_bound(curve: ZigzagCurve):
    """(r-th largest eigenvalue of the curve covariance, rho^3/3 - rho^4/4).

    The second value is the per-direction variance floor implied by the
    minimum segment length; the covariance eigenvalue dominates it times the
    squared smallest singular value of the direction matrix.
    """
    evals = np.linalg.eigvalsh(curve_covariance(curve))  # ascending, length r
    lam_r = float(evals[0])
    floor = curve.rho ** 3 / 3.0 - curve.rho ** 4 / 4.0
    return lam_r, floor


@dataclass(frozen=True)
class NoiseSpec:
    """I.i.d. zero-mean noise with entry standard deviation sigma."""

    family: str
    sigma: float
    seed: int

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise DataError(
                f"unknown noise family {self.family!r}; choose from {NOISE_FAMILIES}"
            )
        if not np.isfinite(self.sigma) or self.sigma < 0.0:
            raise DataError("sigma must be a finite nonnegative number")


def add_noise(x, spec: NoiseSpec) -> np.ndarray:
    """Return ``x`` plus i.i.d. noise drawn per ``spec`` (exact copy at sigma 0)."""
    X = as_matrix(x)
    if spec.sigma == 0.0:
        return X.copy()
    rng = make_rng(spec.seed)
    if spec.family == "gaussian":
        noise = spec.sigma * rng.standard_normal(X.shape)
    elif spec.family == "rademacher":
        noise = spec.sigma * (2.0 * rng.integers(0, 2, X.shape) - 1.0)
    elif spec.family == "uniform":
        half = spec.sigma * math.sqrt(3.0)
        noise = rng.uniform(-half, half, X.shape)
    else:  # pragma: no cover - NoiseSpec already validates
        raise DataError(f"unknown noise family {spec.family!r}")
    return X + noise


def orthonormal_embedding(d: int, r: int, rng) -> np.ndarray:
    """d x r matrix with orthonormal columns (QR of an i.i.d. normal matrix)."""
    if d < r:
        raise DataError(f"ambient dimension {d} is smaller than intrinsic {r}")
    if r < 1:
        raise DataError("intrinsic dimension must be >= 1")
    q, rmat = np.linalg.qr(rng.standard_normal((d, r)))
    signs = np.sign(np.diag(rmat))
    signs[signs == 0.0] = 1.0
    return q * signs


@dataclass(frozen=True)
class TwoClassZigzagModel:
    """Two zigzag curves in opposite slabs plus an orthonormal embedding.

    Curve 0 lives in {first intrinsic coordinate <= -separation/2}, curve 1
    in the mirrored slab; the shifts are symmetric so the balanced mixture
    stays centered.
    """

    curve0: ZigzagCurve
    curve1: ZigzagCurve
    separation: float
    embedding: np.ndarray  # (d, r)
    ambient_dim: int

    def __post_init__(self):
        emb = np.asarray(self.embedding, dtype=float)
        object.__setattr__(self, "embedding", emb)
        if self.separation < 0.0:
            raise DataError("separation must be nonnegative")
        r = self.curve0.intrinsic_dim
        if self.curve1.intrinsic_dim != r:
            raise DataError("both curves must share the intrinsic dimension")
        if emb.shape != (self.ambient_dim, r):
            raise DataError(f"embedding must be ({self.ambient_dim}, {r})")
        defect = np.linalg.norm(emb.T @ emb - np.eye(r))
        if defect > tol.EMBEDDING_ORTHO_ATOL * max(1, r):
            raise DataError("embedding columns are not orthonormal")
        top0 = float(self.curve0.corners()[:, 0].max())
        bot1 = float(self.curve1.corners()[:, 0].min())
        if top0 > -self.separation / 2 + 1e-9 or bot1 < self.separation / 2 - 1e-9:
            raise DataError("curves do not respect the separating slabs")

    @property
    def intrinsic_dim(self) -> int:
        return self.curve0.intrinsic_dim


def make_two_class_model(
    ambient_dim: int,
    rng,
    segments: int = 10,
    intrinsic_dim: int = 3,
    rho: float = 0.05,
    separation: float = 0.2,
    max_tries: int = 200,
) -> TwoClassZigzagModel:
    """Draw two curves, push them into opposite slabs, embed into ambient_dim.

    Curves are redrawn until the shifted pair fits inside the unit ball,
    which keeps every sampled row at norm <= 1.
    """
    e1 = np.zeros(intrinsic_dim)
    e1[0] = 1.0
    for _ in range(max_tries):
        c0 = generate_zigzag(segments, intrinsic_dim, rho, rng)
        c1 = generate_zigzag(segments, intrinsic_dim, rho, rng)
        k0 = c0.corners()
        k1 = c1.corners()
        shift = separation / 2.0 + max(float(k0[:, 0].max()), -float(k1[:, 0].min()))
        worst = max(
            float(np.linalg.norm(k0 - shift * e1, axis=1).max()),
            float(np.linalg.norm(k1 + shift * e1, axis=1).max()),
        )
        if worst <= 1.0:
            break
    else:
        raise NumericalError(
            f"no curve pair with separation {separation} fit the unit ball "
            f"in {max_tries} tries"
        )
    curve0 = dataclasses.replace(c0, mean_offset=c0.mean_offset + shift * e1)
    curve1 = dataclasses.replace(c1, mean_offset=c1.mean_offset - shift * e1)
    embedding = orthonormal_embedding(ambient_dim, intrinsic_dim, rng)
    return TwoClassZigzagModel(curve0, curve1, separation, embedding, ambient_dim)


@dataclass(frozen=True)
class LabeledSample:
    """Clean sampled data with class labels and curve parameters."""

    X: np.ndarray          # (n, d) ambient coordinates, rows have norm <= 1
    labels: np.ndarray     # (n,) in {0, 1}
    times: np.ndarray      # (n,) in [0, 1]
    intrinsic: np.ndarray  # (n, r) pre-embedding coordinates


def sample_two_class(model: TwoClassZigzagModel, n: int, rng) -> LabeledSample:
    """Draw n rows: label ~ Bernoulli(1/2), time ~ Uniform[0, 1], embedded point."""
    if n < 1:
        raise DataError("n must be >= 1")
    labels = rng.integers(0, 2, n)
    times = rng.uniform(0.0, 1.0, n)
    intrinsic = np.empty((n, model.intrinsic_dim))
    mask = labels == 0
    if mask.any():
        intrinsic[mask] = model.curve0.evaluate(times[mask])
    if (~mask).any():
        intrinsic[~mask] = model.curve1.evaluate(times[~mask])
    X = intrinsic @ model.embedding.T
    return LabeledSample(X=X, labels=labels, times=times, intrinsic=intrinsic)


def export_sample(sample: LabeledSample, matrix_path, labels_path, binary: bool = False) -> None:
    """Write the sample matrix (CSV or UDMX binary) plus a label,time sidecar."""
    if binary:
        save_matrix_binary(matrix_path, sample.X)
    else:
        save_matrix_csv(matrix_path, sample.X)
    save_labels_csv(labels_path, sample.labels, sample.times)


def curve_to_dict(curve: ZigzagCurve) -> dict:
    return {
        "breakpoints": curve.breakpoints.tolist(),
        "anchor": curve.anchor.tolist(),
        "directions": curve.directions.tolist(),
        "intrinsic_dim": curve.intrinsic_dim,
        "mean_offset": curve.mean_offset.tolist(),
        "rho": curve.rho,
    }


def curve_from_dict(payload: dict) -> ZigzagCurve:
    return ZigzagCurve(
        breakpoints=np.asarray(payload["breakpoints"], dtype=float),
        anchor=np.asarray(payload["anchor"], dtype=float),
        directions=np.asarray(payload["directions"], dtype=float),
        intrinsic_dim=int(payload["intrinsic_dim"]),
        mean_offset=np.asarray(payload["mean_offset"], dtype=float),
        rho=float(payload["rho"]),
    )


def model_to_dict(model: TwoClassZigzagModel) -> dict:
    return {
        "curve0": curve_to_dict(model.curve0),
        "curve1": curve_to_dict(model.curve1),
        "separation": model.separation,
        "embedding": model.embedding.tolist(),
        "ambient_dim": model.ambient_dim,
    }


def model_from_dict(payload: dict) -> TwoClassZigzagModel:
    return TwoClassZigzagModel(
        curve0=curve_from_dict(payload["curve0"]),
        curve1=curve_from_dict(payload["curve1"]),
        separation=float(payload["separation"]),
        embedding=np.asarray(payload["embedding"], dtype=float),
        ambient_dim=int(payload["ambient_dim"]),
    )


def save_model_json(path, model: TwoClassZigzagModel) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model_json(path) -> TwoClassZigzagModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
