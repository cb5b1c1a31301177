"""Config-driven experiment runner.

Each experiment expands a parameter grid into independent tasks, gives every
task its own counter-derived seed, and gathers rows into a long-format table
(parameters, metric, value, trial, seed).  Rows are assembled in task order
and formatted with round-trip float repr, so the CSV bytes are identical for
identical configs regardless of worker count.

Experiment ids:

* ``fig1b``        - smallest-signal singular value of clean two-class data
                     against sample size, at fixed curve pair.
* ``fig1c``        - uniform error of noisy vs denoised data across ambient
                     dimension at fixed n/d ratio.
* ``fig2a``        - Fiedler-vector traces for clean, denoised, and
                     error-concentrated data at two noise levels.
* ``fig2b``        - spectral-clustering agreement across a noise sweep.
* ``loo``          - leave-one-row-out singular-subspace residuals.
* ``lower_bound``  - oracle-estimator Monte Carlo floor for the worst-row
                     squared error.
"""

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__ as _pkg_version
from .bounds import PHI_MINUS_ONE, leave_one_out_residual, lower_bound_montecarlo
from .datagen import NoiseSpec, add_noise, make_two_class_model, sample_two_class
from .denoise import pca_denoise, spectral_gap_check
from .downstream import (
    adjusted_rand_index,
    clustering_accuracy,
    make_average_error_matrix,
    normalized_laplacian,
    sign_cluster,
)
from .errors import ConfigError
from .linalg import svd, two_inf_norm
from .rng import make_rng, seed_for

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentOutput",
    "run_fig1b",
    "run_fig1c",
    "run_fig2a",
    "run_fig2b",
    "run_loo",
    "run_lower_bound",
    "run_experiment",
    "run_all",
    "seed_for",
]

EXPERIMENTS = ("fig1b", "fig1c", "fig2a", "fig2b", "loo", "lower_bound")
_EXPERIMENT_IDS = {name: idx + 1 for idx, name in enumerate(EXPERIMENTS)}

_DESK_DEFAULTS = {
    "fig1b": {"n_values": (100, 400, 1600, 4900), "trials": 3},
    "fig1c": {"d_values": (200, 1000, 5000), "sigma_values": (0.025, 0.05, 0.1), "trials": 20},
    "fig2a": {"d_values": (1000,), "n_values": (200,), "sigma_values": (0.0075, 0.05), "trials": 1},
    "fig2b": {
        "d_values": (1000,),
        "n_values": (200,),
        # log-spaced 1-2-5 ladder: keeps the 0.05 and 0.1 levels on-grid
        "sigma_values": (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0),
        "trials": 20,
    },
    "loo": {"n_values": (200, 500), "sigma_values": (0.05,), "trials": 1},
    "lower_bound": {"d_values": (1000,), "n_values": (100,), "sigma_values": (0.5,), "trials": 200},
}

_PAPER_OVERRIDES = {
    "fig1c": {"d_values": (100, 1000, 10000)},
    "fig2a": {"d_values": (5000,), "n_values": (1000,)},
    "fig2b": {"d_values": (5000,), "n_values": (1000,)},
}


@dataclass
class ExperimentConfig:
    """Parameters for one experiment run; unset grids fall back to defaults.

    ``experiment`` may also be ``"all"``, which expands to every experiment
    when passed to :func:`run_all`.
    """

    experiment: str = "fig1c"
    base_seed: int = 20260809
    trials: int | None = None
    output_dir: str = "."
    n_values: tuple | None = None
    d_values: tuple | None = None
    sigma_values: tuple | None = None
    n_over_d: float = 0.1
    rank: int = 3
    segments: int = 10
    intrinsic_dim: int = 3
    rho: float = 0.05
    separation: float = 0.2
    bandwidth: float = math.sqrt(0.005)
    fraction: float = 0.1
    c1: float = 1.0
    c2: float = 1.0
    loo_rows: int = 20
    paper_scale: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**payload)
        for key in ("n_values", "d_values", "sigma_values"):
            val = getattr(cfg, key)
            if val is not None:
                setattr(cfg, key, tuple(val))
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(payload)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("n_values", "d_values", "sigma_values"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def resolved(self, experiment: str | None = None) -> "ExperimentConfig":
        """Copy with grids and trial counts filled in for one experiment."""
        name = experiment or self.experiment
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
        cfg = dataclasses.replace(self, experiment=name)
        defaults = dict(_DESK_DEFAULTS[name])
        if self.paper_scale:
            defaults.update(_PAPER_OVERRIDES.get(name, {}))
        for key, value in defaults.items():
            if getattr(cfg, key) is None:
                setattr(cfg, key, value)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        name = self.experiment
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
        if self.trials is None or self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.rank < 1:
            raise ConfigError("rank must be >= 1")
        if not 0.0 < self.fraction < 1.0:
            raise ConfigError("fraction must lie in (0, 1)")
        if self.bandwidth <= 0.0:
            raise ConfigError("bandwidth must be positive")
        if self.n_over_d <= 0.0:
            raise ConfigError("n_over_d must be positive")
        if not 1 <= self.intrinsic_dim <= self.segments:
            raise ConfigError("intrinsic_dim must be in [1, segments]")
        for key in ("n_values", "d_values", "sigma_values"):
            grid = getattr(self, key)
            if grid is not None and len(grid) == 0:
                raise ConfigError(f"{key} must not be empty")
        if self.sigma_values is not None and any(s <= 0.0 for s in self.sigma_values):
            raise ConfigError("sigma grid entries must be positive")
        if name == "fig1b":
            if not self.n_values:
                raise ConfigError("fig1b needs an n grid")
            if min(self.n_values) <= self.intrinsic_dim:
                raise ConfigError("sample sizes must exceed the intrinsic dimension")
        if name == "fig1c":
            if not self.d_values:
                raise ConfigError("fig1c needs a d grid")
            for d in self.d_values:
                n = max(2, round(self.n_over_d * d))
                if self.rank > min(n, d):
                    raise ConfigError(f"rank {self.rank} exceeds min(n, d) at d={d}")
        if name in ("fig2a", "fig2b"):
            if not (self.d_values and self.n_values and self.sigma_values):
                raise ConfigError(f"{name} needs d, n, and sigma grids")
            if self.rank > min(min(self.n_values), min(self.d_values)):
                raise ConfigError("rank exceeds min(n, d)")
        if name == "loo":
            if not self.n_values:
                raise ConfigError("loo needs an n grid (square matrices n = d)")
            if self.loo_rows < 1:
                raise ConfigError("loo_rows must be >= 1")
            if self.rank > min(self.n_values) - 1:
                raise ConfigError("rank exceeds min(n) - 1")
        if name == "lower_bound" and not (self.d_values and self.n_values):
            raise ConfigError("lower_bound needs d and n grids")


@dataclass
class ExperimentOutput:
    experiment: str
    columns: tuple
    rows: list
    manifest: dict

    def csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{self.experiment}.csv"
        with open(path, "w", newline="\n") as fh:
            fh.write(self.csv_text())
        return path


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _map_tasks(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(task) for task in tasks]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _manifest(cfg: ExperimentConfig, columns, rows, started: float, extra: dict | None = None) -> dict:
    out = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "columns": list(columns),
        "row_count": len(rows),
        "wall_time_s": round(time.perf_counter() - started, 3),
        "versions": {
            "udn": _pkg_version,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    if extra:
        out.update(extra)
    return out


def _draw_instance(cfg: ExperimentConfig, d: int, n: int, sigma: float, seed: int):
    """Model, clean sample, and noisy matrix for one derived seed."""
    rng = make_rng(seed)
    model = make_two_class_model(
        d,
        rng,
        segments=cfg.segments,
        intrinsic_dim=cfg.intrinsic_dim,
        rho=cfg.rho,
        separation=cfg.separation,
    )
    sample = sample_two_class(model, n, rng)
    noisy = add_noise(sample.X, NoiseSpec("gaussian", sigma, seed=seed_for(seed, 1)))
    return model, sample, noisy


def run_fig1b(config: ExperimentConfig) -> ExperimentOutput:
    """Smallest-signal singular value of clean data against sample size.

    One curve pair is drawn from the base seed and held fixed; for each n
    the clean intrinsic sample is drawn and the r-th largest singular value
    recorded together with its ratio to sqrt(n).
    """
    started = time.perf_counter()
    cfg = config.resolved("fig1b")
    exp_id = _EXPERIMENT_IDS["fig1b"]
    r = cfg.intrinsic_dim
    model_rng = make_rng(seed_for(cfg.base_seed, 0, exp_id))
    model = make_two_class_model(
        r, model_rng, segments=cfg.segments, intrinsic_dim=r,
        rho=cfg.rho, separation=cfg.separation,
    )
    tasks = [
        (n, trial, seed_for(cfg.base_seed, 1 + idx, exp_id))
        for idx, (n, trial) in enumerate(
            (n, t) for n in cfg.n_values for t in range(cfg.trials)
        )
    ]

    def work(task):
        n, trial, seed = task
        sample = sample_two_class(model, n, make_rng(seed))
        lam = float(svd(sample.intrinsic, r).singular_values[-1])
        return [
            ("fig1b", n, trial, seed, "lambda_r", lam),
            ("fig1b", n, trial, seed, "lambda_r_over_sqrt_n", lam / math.sqrt(n)),
        ]

    rows = [row for chunk in _map_tasks(work, tasks, cfg.workers) for row in chunk]
    columns = ("experiment", "n", "trial", "seed", "metric", "value")
    return ExperimentOutput("fig1b", columns, rows, _manifest(cfg, columns, rows, started))


def run_fig1c(config: ExperimentConfig) -> ExperimentOutput:
    """Uniform error of noisy vs denoised data across ambient dimension.

    For each (d, sigma, trial) cell a fresh model is drawn with n rows set
    by the n/d ratio; the cell records both normalized uniform errors plus
    the signal-vs-noise gap diagnostic of the clean matrix (logged, never
    fatal).
    """
    started = time.perf_counter()
    cfg = config.resolved("fig1c")
    exp_id = _EXPERIMENT_IDS["fig1c"]
    cells = [
        (d, sigma, trial)
        for d in cfg.d_values
        for sigma in cfg.sigma_values
        for trial in range(cfg.trials)
    ]
    tasks = [
        (d, sigma, trial, seed_for(cfg.base_seed, idx, exp_id))
        for idx, (d, sigma, trial) in enumerate(cells)
    ]

    def work(task):
        d, sigma, trial, seed = task
        n = max(2, round(cfg.n_over_d * d))
        _, sample, noisy = _draw_instance(cfg, d, n, sigma, seed)
        denoised = pca_denoise(noisy, cfg.rank).Xhat
        gap = spectral_gap_check(sample.X, cfg.rank, sigma, cfg.c1)
        base = ("fig1c", d, n, sigma, trial, seed)
        return [
            base + ("uniform_err_over_sigma_noisy", two_inf_norm(noisy - sample.X) / sigma),
            base + ("uniform_err_over_sigma_denoised", two_inf_norm(denoised - sample.X) / sigma),
            base + ("lambda_r", gap.lambda_r),
            base + ("gap_threshold", gap.threshold),
            base + ("gap_satisfied", 1.0 if gap.satisfied else 0.0),
        ]

    rows = [row for chunk in _map_tasks(work, tasks, cfg.workers) for row in chunk]
    columns = ("experiment", "d", "n", "sigma", "trial", "seed", "metric", "value")
    return ExperimentOutput("fig1c", columns, rows, _manifest(cfg, columns, rows, started))


def _orient_to(vector: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Flip ``vector`` so its correlation with ``reference`` is nonnegative."""
    return -vector if float(vector @ reference) < 0.0 else vector


def run_fig2a(config: ExperimentConfig) -> ExperimentOutput:
    """Fiedler-vector traces for clean, denoised, and error-concentrated data.

    Samples are ordered by class then curve parameter; eigenvector signs are
    aligned to the clean trace (itself oriented to the labels) before the
    pointwise differences are recorded.
    """
    started = time.perf_counter()
    cfg = config.resolved("fig2a")
    exp_id = _EXPERIMENT_IDS["fig2a"]
    d, n = cfg.d_values[0], cfg.n_values[0]
    tasks = [
        (sigma, trial, seed_for(cfg.base_seed, idx, exp_id))
        for idx, (sigma, trial) in enumerate(
            (s, t) for s in cfg.sigma_values for t in range(cfg.trials)
        )
    ]

    def work(task):
        sigma, trial, seed = task
        _, sample, noisy = _draw_instance(cfg, d, n, sigma, seed)
        denoised = pca_denoise(noisy, cfg.rank).Xhat
        concentrated = make_average_error_matrix(
            sample.X, noisy, denoised, cfg.fraction, make_rng(seed_for(seed, 2))
        )
        corrupted = (np.abs(concentrated - sample.X).sum(axis=1) > 0.0).astype(int)
        eta_clean = normalized_laplacian(sample.X, cfg.bandwidth).fiedler_vector
        eta_clean = _orient_to(eta_clean, sample.labels - 0.5)
        eta_den = _orient_to(
            normalized_laplacian(denoised, cfg.bandwidth).fiedler_vector, eta_clean
        )
        eta_avg = _orient_to(
            normalized_laplacian(concentrated, cfg.bandwidth).fiedler_vector, eta_clean
        )
        order = np.lexsort((sample.times, sample.labels))
        rows = []
        for pos, i in enumerate(order):
            base = (
                "fig2a", sigma, trial, seed, pos, int(i),
                int(sample.labels[i]), float(sample.times[i]), int(corrupted[i]),
            )
            rows.append(base + ("eta_clean", float(eta_clean[i])))
            rows.append(base + ("eta_denoised", float(eta_den[i])))
            rows.append(base + ("eta_avg", float(eta_avg[i])))
            rows.append(base + ("abs_diff_denoised", abs(float(eta_den[i] - eta_clean[i]))))
            rows.append(base + ("abs_diff_avg", abs(float(eta_avg[i] - eta_clean[i]))))
        return rows

    rows = [row for chunk in _map_tasks(work, tasks, cfg.workers) for row in chunk]
    columns = (
        "experiment", "sigma", "trial", "seed", "order_index", "row_index",
        "label", "time", "corrupted", "metric", "value",
    )
    extra = {"d": d, "n": n}
    return ExperimentOutput("fig2a", columns, rows, _manifest(cfg, columns, rows, started, extra))


def run_fig2b(config: ExperimentConfig) -> ExperimentOutput:
    """Spectral-clustering agreement across a noise sweep.

    Per (sigma, trial): sign-cluster the Fiedler vector of the clean,
    denoised, and error-concentrated matrices and record chance-adjusted
    agreement plus raw two-class accuracy against the true labels.
    """
    started = time.perf_counter()
    cfg = config.resolved("fig2b")
    exp_id = _EXPERIMENT_IDS["fig2b"]
    d, n = cfg.d_values[0], cfg.n_values[0]
    tasks = [
        (sigma, trial, seed_for(cfg.base_seed, idx, exp_id))
        for idx, (sigma, trial) in enumerate(
            (s, t) for s in cfg.sigma_values for t in range(cfg.trials)
        )
    ]

    def work(task):
        sigma, trial, seed = task
        _, sample, noisy = _draw_instance(cfg, d, n, sigma, seed)
        denoised = pca_denoise(noisy, cfg.rank).Xhat
        concentrated = make_average_error_matrix(
            sample.X, noisy, denoised, cfg.fraction, make_rng(seed_for(seed, 2))
        )
        base = ("fig2b", d, n, sigma, trial, seed)
        rows = []
        for name, matrix in (
            ("clean", sample.X), ("denoised", denoised), ("avg", concentrated)
        ):
            pred = sign_cluster(normalized_laplacian(matrix, cfg.bandwidth).fiedler_vector)
            rows.append(base + (f"ari_{name}", adjusted_rand_index(pred, sample.labels)))
            rows.append(base + (f"accuracy_{name}", clustering_accuracy(pred, sample.labels)))
        return rows

    rows = [row for chunk in _map_tasks(work, tasks, cfg.workers) for row in chunk]
    columns = ("experiment", "d", "n", "sigma", "trial", "seed", "metric", "value")
    return ExperimentOutput("fig2b", columns, rows, _manifest(cfg, columns, rows, started))


def run_loo(config: ExperimentConfig) -> ExperimentOutput:
    """Leave-one-row-out singular-subspace residuals on square instances.

    For each n = d cell, draws one noisy instance per trial, removes
    ``loo_rows`` random rows one at a time, and records each residual next
    to the slack reference rate 10 * sigma * sqrt(d log n) / lambda_r^2
    computed from the clean matrix.
    """
    started = time.perf_counter()
    cfg = config.resolved("loo")
    exp_id = _EXPERIMENT_IDS["loo"]
    tasks = [
        (size, sigma, trial, seed_for(cfg.base_seed, idx, exp_id))
        for idx, (size, sigma, trial) in enumerate(
            (s, sg, t)
            for s in cfg.n_values
            for sg in cfg.sigma_values
            for t in range(cfg.trials)
        )
    ]

    def work(task):
        size, sigma, trial, seed = task
        _, sample, noisy = _draw_instance(cfg, size, size, sigma, seed)
        lam = float(svd(sample.X, cfg.rank).singular_values[-1])
        bound = 10.0 * sigma * math.sqrt(size * math.log(size)) / lam**2
        picker = make_rng(seed_for(seed, 3))
        removed = picker.choice(size, size=min(cfg.loo_rows, size), replace=False)
        rows = []
        for row_idx in sorted(int(i) for i in removed):
            resid = leave_one_out_residual(noisy, row_idx, cfg.rank)
            base = ("loo", size, size, sigma, trial, seed, row_idx)
            rows.append(base + ("loo_residual", resid))
            rows.append(base + ("residual_bound", bound))
        return rows

    rows = [row for chunk in _map_tasks(work, tasks, cfg.workers) for row in chunk]
    columns = (
        "experiment", "n", "d", "sigma", "trial", "seed", "removed_row", "metric", "value",
    )
    return ExperimentOutput("loo", columns, rows, _manifest(cfg, columns, rows, started))


def run_lower_bound(config: ExperimentConfig) -> ExperimentOutput:
    """Monte Carlo floor for the worst-row squared error of any estimator."""
    started = time.perf_counter()
    cfg = config.resolved("lower_bound")
    exp_id = _EXPERIMENT_IDS["lower_bound"]
    d, n = cfg.d_values[0], cfg.n_values[0]
    sigma = cfg.sigma_values[0] if cfg.sigma_values else 0.5
    run_seed = seed_for(cfg.base_seed, 0, exp_id)
    result = lower_bound_montecarlo(d, n, sigma, cfg.trials, seed=run_seed)
    rows = [
        ("lower_bound", d, n, sigma, trial, seed_for(run_seed, trial),
         "max_row_sq_error", float(value))
        for trial, value in enumerate(result.values)
    ]
    columns = ("experiment", "d", "n", "sigma", "trial", "seed", "metric", "value")
    extra = {
        "mean": result.mean,
        "stderr": result.stderr,
        "event_floor": PHI_MINUS_ONE * sigma**2 / 16.0,
    }
    return ExperimentOutput("lower_bound", columns, rows, _manifest(cfg, columns, rows, started, extra))


_RUNNERS = {
    "fig1b": run_fig1b,
    "fig1c": run_fig1c,
    "fig2a": run_fig2a,
    "fig2b": run_fig2b,
    "loo": run_loo,
    "lower_bound": run_lower_bound,
}


def run_experiment(config: ExperimentConfig) -> ExperimentOutput:
    if config.experiment not in _RUNNERS:
        raise ConfigError(
            f"unknown experiment {config.experiment!r}; choose from {EXPERIMENTS}"
        )
    return _RUNNERS[config.experiment](config)


def run_all(config: ExperimentConfig, out_dir=None) -> list:
    """Run the selected experiment(s) and write CSVs plus a manifest.

    ``config.experiment`` may be a single name or ``"all"``.  Returns the
    list of :class:`ExperimentOutput`.
    """
    names = EXPERIMENTS if config.experiment == "all" else (config.experiment,)
    target = Path(out_dir if out_dir is not None else config.output_dir)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {target}: {exc}") from exc
    if not target.is_dir():
        raise ConfigError(f"output path {target} is not a directory")
    outputs = []
    manifest = {}
    for name in names:
        cfg = dataclasses.replace(config, experiment=name)
        output = _RUNNERS[name](cfg)
        output.write(target)
        manifest[name] = output.manifest
        outputs.append(output)
    with open(target / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outputs
