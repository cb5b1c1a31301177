"""Command-line interface.

Subcommands: generate, denoise, metrics, cluster, laplacian, bounds,
experiment.  Exit codes: 0 on success, 2 on configuration/usage errors,
3 on numerical or data failures.
"""

import argparse
import json
import sys
from pathlib import Path

from .bounds import (
    PHI_MINUS_ONE,
    leave_one_out_residual,
    lower_bound_montecarlo,
    lower_bound_thresholds,
    theorem1_bounds,
)
from .datagen import (
    NoiseSpec,
    add_noise,
    export_sample,
    make_two_class_model,
    sample_two_class,
    save_model_json,
)
from .denoise import pca_denoise, spectral_gap_check
from .downstream import (
    adjusted_rand_index,
    check_cluster_assumption,
    clustering_accuracy,
    kmeans,
    laplacian_inf_distance,
    normalized_laplacian,
    sign_cluster,
)
from .errors import ConfigError, DataError, NumericalError
from .experiments import ExperimentConfig, run_all
from .matrixio import (
    load_labels_csv,
    load_matrix_binary,
    load_matrix_csv,
    save_labels_csv,
    save_matrix_binary,
    save_matrix_csv,
)
from .metrics import error_report
from .rng import make_rng


def _load_matrix(path):
    path = Path(path)
    if path.suffix.lower() in (".bin", ".udmx"):
        return load_matrix_binary(path)
    return load_matrix_csv(path)


def _save_matrix(path, a):
    path = Path(path)
    if path.suffix.lower() in (".bin", ".udmx"):
        save_matrix_binary(path, a)
    else:
        save_matrix_csv(path, a)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_generate(args) -> int:
    rng = make_rng(args.seed)
    model = make_two_class_model(
        args.d,
        rng,
        segments=args.segments,
        intrinsic_dim=args.intrinsic_dim,
        rho=args.rho,
        separation=args.separation,
    )
    sample = sample_two_class(model, args.n, rng)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = "bin" if args.binary else "csv"
    export_sample(sample, out / f"X.{ext}", out / "labels.csv", binary=args.binary)
    if args.sigma > 0.0:
        noisy = add_noise(sample.X, NoiseSpec(args.family, args.sigma, seed=args.seed ^ 1))
        _save_matrix(out / f"Z.{ext}", noisy)
    save_model_json(out / "model.json", model)
    return 0


def _cmd_denoise(args) -> int:
    Z = _load_matrix(args.input)
    result = pca_denoise(Z, args.rank)
    _save_matrix(args.output, result.Xhat)
    report = {
        "n": Z.shape[0],
        "d": Z.shape[1],
        "rank_used": result.rank_used,
        "tied_at_cut": result.tied_at_cut,
        "singular_values": result.singular_values.tolist(),
    }
    if args.sigma is not None:
        gap = spectral_gap_check(result.Xhat, args.rank, args.sigma, args.c1)
        report["gap_check"] = {
            "lambda_r": gap.lambda_r,
            "threshold": gap.threshold,
            "c1": gap.c1,
            "satisfied": gap.satisfied,
            "proxy": "top singular values of the noisy input",
        }
    _write_json(args.report, report)
    return 0


def _cmd_metrics(args) -> int:
    ref = _load_matrix(args.a)
    est = _load_matrix(args.b)
    report = error_report(ref, est).to_dict()
    if not args.per_row:
        report.pop("per_row_errors")
    _write_json(args.out, report)
    return 0


def _cmd_cluster(args) -> int:
    X = _load_matrix(args.input)
    result = kmeans(X, args.k, make_rng(args.seed))
    if args.out_labels:
        save_labels_csv(args.out_labels, result.labels)
    report = {
        "k": args.k,
        "loss": result.loss,
        "iterations": result.iterations,
    }
    if args.truth:
        truth, _ = load_labels_csv(args.truth)
        report["ari"] = adjusted_rand_index(result.labels, truth)
        if args.k == 2:
            report["accuracy"] = clustering_accuracy(result.labels, truth)
        check = check_cluster_assumption(X, truth, args.epsilon)
        report["assumption"] = {
            "observed_min_frac": check.observed_min_frac,
            "observed_max_radius": check.observed_max_radius,
            "observed_min_center_gap": check.observed_min_center_gap,
            "margin_ok": check.margin_ok,
            "single_cluster": check.single_cluster,
        }
    _write_json(args.report, report)
    return 0


def _cmd_laplacian(args) -> int:
    X = _load_matrix(args.input)
    result = normalized_laplacian(X, args.bandwidth)
    labels = sign_cluster(result.fiedler_vector)
    if args.out_labels:
        save_labels_csv(args.out_labels, labels)
    report = {
        "bandwidth": args.bandwidth,
        "fiedler_value": result.fiedler_value,
        "fiedler_vector": result.fiedler_vector.tolist(),
    }
    if args.truth:
        truth, _ = load_labels_csv(args.truth)
        report["ari"] = adjusted_rand_index(labels, truth)
        report["accuracy"] = clustering_accuracy(labels, truth)
    if args.compare:
        other = normalized_laplacian(_load_matrix(args.compare), args.bandwidth)
        report["laplacian_inf_distance"] = laplacian_inf_distance(result.L, other.L)
    _write_json(args.report, report)
    return 0


def _cmd_bounds(args) -> int:
    if args.mode == "theorem1":
        if None in (args.n, args.d, args.sigma, args.lambda_r):
            raise ConfigError("theorem1 mode needs --n, --d, --sigma, --lambda-r")
        rep = theorem1_bounds(args.n, args.d, args.sigma, args.lambda_r, args.c2)
        _write_json(
            args.out,
            {
                "mode": "theorem1",
                "general_bound": rep.general_bound,
                "regime_bound": rep.regime_bound,
                "canonical_bound": rep.canonical_bound,
                "regime": rep.regime,
                "constants_used": rep.constants_used,
            },
        )
    elif args.mode == "loo":
        if args.input is None or args.row is None:
            raise ConfigError("loo mode needs --input and --row")
        Z = _load_matrix(args.input)
        resid = leave_one_out_residual(Z, args.row, args.rank)
        _write_json(
            args.out,
            {"mode": "loo", "row": args.row, "rank": args.rank, "residual": resid},
        )
    else:  # lower
        if None in (args.n, args.d, args.sigma):
            raise ConfigError("lower mode needs --n, --d, --sigma")
        result = lower_bound_montecarlo(args.d, args.n, args.sigma, args.trials, args.seed)
        payload = {
            "mode": "lower",
            "mean": result.mean,
            "stderr": result.stderr,
            "trials": args.trials,
            "event_floor": PHI_MINUS_ONE * args.sigma**2 / 16.0,
        }
        if args.epsilon is not None:
            thresholds = lower_bound_thresholds(args.epsilon, args.d, args.sigma)
            payload["thresholds"] = {
                "sigma_threshold": thresholds.sigma_threshold,
                "n_threshold": thresholds.n_threshold,
                "epsilon": thresholds.epsilon,
            }
        if args.csv:
            with open(args.csv, "w", newline="\n") as fh:
                fh.write("trial,value\n")
                for trial, value in enumerate(result.values):
                    fh.write(f"{trial},{float(value)!r}\n")
        _write_json(args.out, payload)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    run_all(config, out_dir=args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udn",
        description="Spectral matrix denoising with uniform error tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw two-class zigzag data")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=1000)
    p.add_argument("--segments", type=int, default=10)
    p.add_argument("--intrinsic-dim", type=int, default=3)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--separation", type=float, default=0.2)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--family", default="gaussian",
                   choices=("gaussian", "rademacher", "uniform"))
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("denoise", help="rank-r spectral denoising")
    p.add_argument("--input", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("metrics", help="error report between two matrices")
    p.add_argument("--a", required=True, help="reference matrix")
    p.add_argument("--b", required=True, help="estimate matrix")
    p.add_argument("--per-row", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("cluster", help="k-means clustering")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", default=None)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out-labels", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("laplacian", help="Fiedler vector and sign labels")
    p.add_argument("--input", required=True)
    p.add_argument("--bandwidth", type=float, required=True)
    p.add_argument("--truth", default=None)
    p.add_argument("--compare", default=None)
    p.add_argument("--out-labels", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_laplacian)

    p = sub.add_parser("bounds", help="bound evaluators and the Monte Carlo floor")
    p.add_argument("--mode", required=True, choices=("theorem1", "loo", "lower"))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--lambda-r", dest="lambda_r", type=float, default=None)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--input", default=None)
    p.add_argument("--row", type=int, default=None)
    p.add_argument("--rank", type=int, default=3)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("experiment", help="run a config-driven experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
