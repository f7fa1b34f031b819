"""
Command-line interface: generate the sinc data, fit and apply single models, run the benchmark
suites and export evidence and cross-validation curves.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import pandas as pd

from .benchmark import (
    SUITE_METHODS,
    FittedMethod,
    bandwidth_value,
    fit_bayesian_kernel,
    fit_bayesian_mknn,
    fit_kernel_loocv,
    fit_neighbors_loocv,
    k_candidates,
    kernel_from_bayesian,
    mknn_from_bayesian,
    run_benchmark,
)
from .classical import KernelRegressor, KnnRegressor, MknnRegressor, bandwidth_from_values
from .config import (
    DEFAULT_FOLDS,
    DEFAULT_SEED,
    SINC_SUITE,
    GridConfig,
    ScaleConfig,
    SuiteConfig,
)
from .crossvalidation import loocv_k
from .dataset import SINC_DATASETS, Dataset, read_inputs, sinc_benchmark
from .evidence import bandwidth_evidence_curve, best_index, select_k
from .exceptions import (
    DataFormatError,
    DimensionMismatchError,
    HyperparameterError,
    NotPositiveDefiniteError,
)
from .functions import init
from .gpr import GPRModel, SEHypers
from .laplacian import KernelWeights, LaplacianModel, MutualKnn
from .serialization import Serialization

logger = init(__name__, logger_level=logging.INFO)

PACKAGE = "tno.regression.nonparametric"
PACKAGE_ERRORS = (
    DataFormatError,
    DimensionMismatchError,
    HyperparameterError,
    NotPositiveDefiniteError,
    OSError,
)
METHODS = ("kr", "bkr", "knn", "mknn", "bmknn", "gpr")
SELECTIONS = ("evidence", "loocv", "fixed")
ALLOWED_SELECTIONS = {
    "kr": ("loocv", "evidence", "fixed"),
    "bkr": ("evidence", "fixed"),
    "knn": ("loocv", "fixed"),
    "mknn": ("loocv", "evidence", "fixed"),
    "bmknn": ("evidence", "fixed"),
    "gpr": ("fixed",),
}
CURVES = ("evidence-bandwidth", "evidence-k", "loocv-k")


def parse_floats(text: str) -> tuple[float, ...]:
    """
    :param text: comma-separated numbers
    :raise argparse.ArgumentTypeError: an entry is not a number
    :return: the numbers
    """
    try:
        return tuple(float(value) for value in text.split(",") if value.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}"
        ) from exc


def set_log_level(level: str) -> None:
    """
    Apply a logging level to every logger of the package.

    :param level: name of the level
    """
    names = [PACKAGE] + [
        name for name in logging.root.manager.loggerDict if name.startswith(PACKAGE + ".")
    ]
    for name in names:
        logging.getLogger(name).setLevel(level)


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    defaults = GridConfig()
    parser.add_argument("--grid-lo", type=float, default=defaults.lo, help="smallest bandwidth")
    parser.add_argument("--grid-hi", type=float, default=defaults.hi, help="largest bandwidth")
    parser.add_argument(
        "--grid-points", type=int, default=defaults.points, help="number of log-spaced bandwidths"
    )


def _add_scale_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma0", type=float, help="weight scale (initial value when optimized)")
    parser.add_argument("--sigma", type=float, help="noise scale (initial value when optimized)")
    parser.add_argument(
        "--fix-scales",
        action="store_true",
        help="hold sigma0 and sigma fixed during evidence maximization",
    )


def build_parser() -> argparse.ArgumentParser:
    """
    :return: the parser of the command line
    """
    parser = argparse.ArgumentParser(
        prog="nonparametric-regression",
        description="Kernel, k-NN and mutual k-NN regression with Bayesian extensions.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level of the package",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen_data = commands.add_parser("gen-data", help="write the sinc training and test sets")
    gen_data.add_argument("name", choices=sorted(SINC_DATASETS))
    gen_data.add_argument("--out", type=Path, required=True, help="output directory")

    fit = commands.add_parser("fit", help="select hyperparameters and store a model")
    fit.add_argument("--method", choices=METHODS, required=True)
    fit.add_argument("--selection", choices=SELECTIONS, required=True)
    fit.add_argument("--train", type=Path, required=True, help="training CSV x1,...,xd,y")
    fit.add_argument("--out", type=Path, required=True, help="model file (.json or .msgpack)")
    fit.add_argument("--bandwidth", type=float, help="shared bandwidth")
    fit.add_argument("--bandwidths", type=parse_floats, help="one bandwidth per dimension")
    fit.add_argument("--multi-bandwidth", action="store_true", help="one bandwidth per dimension")
    fit.add_argument("--k", type=int, help="number of neighbors")
    fit.add_argument("--kmax", type=int, default=SINC_SUITE.k_max, help="largest candidate k")
    _add_scale_options(fit)
    _add_grid_options(fit)
    fit.add_argument("--v0", type=float, help="GPR vertical scale")
    fit.add_argument("--v1", type=float, help="GPR noise variance")
    fit.add_argument("--lengthscales", type=parse_floats, help="GPR inverse lengthscales")
    fit.add_argument("--workers", type=int, default=1, help="concurrent evaluations")

    predict = commands.add_parser("predict", help="apply a stored model")
    predict.add_argument("--model", type=Path, required=True)
    predict.add_argument("--inputs", type=Path, required=True, help="CSV with header x1,...,xd")
    predict.add_argument("--out", type=Path, required=True, help="predictions CSV")

    benchmark = commands.add_parser("benchmark", help="run a benchmark suite")
    benchmark.add_argument("suite", choices=list(SUITE_METHODS))
    benchmark.add_argument("--data", type=Path, help="yacht hydrodynamics data file")
    benchmark.add_argument("--seed", type=int, default=DEFAULT_SEED)
    benchmark.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    benchmark.add_argument("--out", type=Path, required=True, help="output directory")
    benchmark.add_argument("--workers", type=int, default=1, help="concurrent folds")

    curve = commands.add_parser("curve", help="export an evidence or cross-validation trace")
    curve.add_argument("kind", choices=CURVES)
    curve.add_argument("--train", type=Path, required=True)
    curve.add_argument("--out", type=Path, required=True, help="trace CSV")
    curve.add_argument("--estimator", choices=["knn", "mknn"], default="mknn")
    curve.add_argument("--multi-bandwidth", action="store_true")
    curve.add_argument("--kmax", type=int, default=SINC_SUITE.k_max)
    _add_scale_options(curve)
    _add_grid_options(curve)
    curve.add_argument("--workers", type=int, default=1)
    return parser


def suite_config(args: argparse.Namespace, kernel: bool) -> SuiteConfig:
    """
    Settings of a single fit; missing scales default to the sinc initialization.

    :param args: parsed arguments
    :param kernel: whether the scales belong to the kernel weights (else to mutual k-NN)
    :return: the settings
    """
    preset = SINC_SUITE.kernel_scales if kernel else SINC_SUITE.knn_scales
    scales = ScaleConfig(
        preset.sigma0 if args.sigma0 is None else args.sigma0,
        preset.sigma if args.sigma is None else args.sigma,
        optimize=not args.fix_scales,
    )
    return SuiteConfig(
        kernel_scales=scales,
        knn_scales=scales,
        k_max=args.kmax,
        grid=GridConfig(args.grid_lo, args.grid_hi, args.grid_points),
    )


def fixed_bandwidth(
    parser: argparse.ArgumentParser, args: argparse.Namespace, d: int
) -> KernelWeights:
    """
    :param parser: parser, to report usage errors
    :param args: parsed arguments
    :param d: input dimension
    :return: kernel weights at the bandwidth given on the command line
    """
    if args.bandwidths is not None:
        values: tuple[float, ...] = args.bandwidths
        if len(values) == 1:
            values = values * d
        bandwidth = bandwidth_from_values(values, multi=True)
    elif args.bandwidth is not None:
        bandwidth = bandwidth_from_values([args.bandwidth], multi=False)
    else:
        parser.error("--selection fixed requires --bandwidth or --bandwidths")
    sigma0 = SINC_SUITE.kernel_scales.sigma0 if args.sigma0 is None else args.sigma0
    return KernelWeights(bandwidth, sigma0)


def fixed_k(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    """
    :param parser: parser, to report usage errors
    :param args: parsed arguments
    :return: k given on the command line
    """
    if args.k is None:
        parser.error("--selection fixed requires --k")
    return int(args.k)


def fit_model(
    parser: argparse.ArgumentParser, args: argparse.Namespace, train: Dataset
) -> FittedMethod:
    """
    Select hyperparameters for one method/selection pair and fit the model.

    :param parser: parser, to report usage errors
    :param args: parsed arguments
    :param train: training set
    :return: the fitted method
    """
    method, selection = args.method, args.selection
    if selection not in ALLOWED_SELECTIONS[method]:
        parser.error(f"--method {method} does not support --selection {selection}")
    kernel_config = suite_config(args, kernel=True)
    knn_config = suite_config(args, kernel=False)
    multi = args.multi_bandwidth
    if method in ("kr", "bkr") and selection == "fixed":
        weights = fixed_bandwidth(parser, args, train.d)
        hyperparameters = {"bandwidth": bandwidth_value(weights.bandwidth)}
        if method == "kr":
            return FittedMethod("KR", KernelRegressor(train, weights.bandwidth), hyperparameters)
        sigma = kernel_config.kernel_scales.sigma
        return FittedMethod(
            "BKR",
            LaplacianModel(train, weights, sigma),
            hyperparameters | {"sigma0": weights.sigma0, "sigma": sigma},
        )
    if method in ("knn", "mknn", "bmknn") and selection == "fixed":
        k = fixed_k(parser, args)
        if method == "knn":
            return FittedMethod("kNN", KnnRegressor(train, k), {"k": k})
        if method == "mknn":
            return FittedMethod("MkNN", MknnRegressor(train, k), {"k": k})
        scales = knn_config.knn_scales
        return FittedMethod(
            "BMkNN",
            LaplacianModel(train, MutualKnn(k, scales.sigma0), scales.sigma),
            {"k": k, "sigma0": scales.sigma0, "sigma": scales.sigma},
        )
    if method == "gpr":
        if args.v0 is None or args.v1 is None or args.lengthscales is None:
            parser.error("--method gpr requires --v0, --v1 and --lengthscales")
        lengthscales = args.lengthscales
        if len(lengthscales) == 1:
            lengthscales = lengthscales * train.d
        model = GPRModel(train, SEHypers(args.v0, args.v1, lengthscales))
        return FittedMethod(
            "GPR", model, model.hyp.serialize() | {"log_evidence": model.log_evidence()}
        )

    recipes: dict[tuple[str, str], Callable[[], FittedMethod]] = {
        ("kr", "loocv"): lambda: fit_kernel_loocv(train, kernel_config, multi, args.workers),
        ("kr", "evidence"): lambda: kernel_from_bayesian(
            fit_bayesian_kernel(train, kernel_config, multi)
        ),
        ("bkr", "evidence"): lambda: fit_bayesian_kernel(train, kernel_config, multi),
        ("knn", "loocv"): lambda: fit_neighbors_loocv(train, knn_config, "knn"),
        ("mknn", "loocv"): lambda: fit_neighbors_loocv(train, knn_config, "mknn"),
        ("mknn", "evidence"): lambda: mknn_from_bayesian(
            fit_bayesian_mknn(train, knn_config, args.workers)
        ),
        ("bmknn", "evidence"): lambda: fit_bayesian_mknn(train, knn_config, args.workers),
    }
    return recipes[method, selection]()


def cmd_gen_data(args: argparse.Namespace) -> None:
    """
    Write train.csv and test.csv of a sinc experiment.

    :param args: parsed arguments
    """
    train, test = sinc_benchmark(args.name)
    args.out.mkdir(parents=True, exist_ok=True)
    train.to_csv(args.out / "train.csv")
    test.to_csv(args.out / "test.csv")
    logger.info(f"Wrote {train.n} training and {test.n} test rows to {args.out}")


def cmd_fit(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    """
    Fit a model, store it and print a one-line JSON report.

    :param parser: parser, to report usage errors
    :param args: parsed arguments
    """
    train = Dataset.read_csv(args.train)
    fitted = fit_model(parser, args, train)
    Serialization.save(fitted.model, args.out)
    report = {
        "method": args.method,
        "selection": args.selection,
        "estimator": fitted.method,
        "n": train.n,
        "d": train.d,
        "hyperparameters": fitted.hyperparameters,
        "model": str(args.out),
    }
    print(json.dumps(report, default=Serialization.serialize))


def cmd_predict(args: argparse.Namespace) -> None:
    """
    Write the predictions of a stored model; Bayesian and Gaussian process models add the
    predictive variance.

    :param args: parsed arguments
    :raise DataFormatError: the model file does not hold a regression model
    """
    model = Serialization.load(args.model)
    if not isinstance(
        model, (KernelRegressor, KnnRegressor, MknnRegressor, LaplacianModel, GPRModel)
    ):
        raise DataFormatError(f"{args.model} does not hold a regression model.")
    queries = read_inputs(args.inputs, model.train.d)
    frame = pd.DataFrame()
    if isinstance(model, (LaplacianModel, GPRModel)):
        means, variances = model.predict_distribution(queries)
        frame["mean"] = means
        frame["variance"] = variances
    else:
        frame["mean"] = model.predict(queries)
    frame.to_csv(args.out, index=False, float_format="%.17g")


def cmd_benchmark(args: argparse.Namespace) -> None:
    """
    Run a benchmark suite and write its report files.

    :param args: parsed arguments
    """
    report = run_benchmark(args.suite, args.data, args.seed, args.folds, args.workers)
    report.write(args.out)
    logger.info(f"Wrote the {args.suite} report to {args.out}")


def curve_frame(
    hyperparameters: Sequence[float], scores: Sequence[float], best: int, evidence: bool
) -> pd.DataFrame:
    """
    :param hyperparameters: hyperparameter values of the trace
    :param scores: score per value
    :param best: index of the optimum
    :param evidence: whether the scores are log evidences, which adds the evidence relative to
        its maximum
    :return: the trace rows followed by a row marking the optimum
    """
    frame = pd.DataFrame(
        {
            "row": ["trace"] * len(scores) + ["optimum"],
            "hyperparameter": [*hyperparameters, hyperparameters[best]],
            "score": [*scores, scores[best]],
        }
    )
    if evidence:
        with np.errstate(invalid="ignore"):
            frame["relative_evidence"] = np.exp(frame["score"] - scores[best])
    return frame


def cmd_curve(args: argparse.Namespace) -> None:
    """
    Export the log evidence over the bandwidth grid or over k, or the leave-one-out score over k.

    :param args: parsed arguments
    """
    train = Dataset.read_csv(args.train)
    config = suite_config(args, kernel=args.kind == "evidence-bandwidth")
    if args.kind == "evidence-bandwidth":
        scales = config.kernel_scales
        trace = bandwidth_evidence_curve(
            train,
            list(config.grid.values()),
            scales.sigma0,
            scales.sigma,
            multi=args.multi_bandwidth,
            workers=args.workers,
        )
        values, scores = [h for h, _ in trace], [score for _, score in trace]
        frame = curve_frame(values, scores, best_index(scores, maximize=True), evidence=True)
    elif args.kind == "evidence-k":
        scales = config.knn_scales
        selection = select_k(
            train,
            k_candidates(train.n, config.k_max),
            scales.sigma0,
            scales.sigma,
            optimize_scales=scales.optimize,
            config=config.optimizer,
            workers=args.workers,
        )
        values = [float(k) for k, _ in selection.trace]
        scores = [score for _, score in selection.trace]
        frame = curve_frame(values, scores, values.index(selection.k), evidence=True)
    else:
        cross_validation = loocv_k(train, k_candidates(train.n, config.k_max), args.estimator)
        values = [float(k) for k, _ in cross_validation.trace]
        scores = [score for _, score in cross_validation.trace]
        frame = curve_frame(values, scores, values.index(cross_validation.k), evidence=False)
    frame.to_csv(args.out, index=False, float_format="%.17g")


def main(argv: Sequence[str] | None = None) -> int:
    """
    Entry point of the command line.

    :param argv: arguments, defaults to sys.argv[1:]
    :return: exit code; 0 on success, 1 on data or runtime errors (usage errors exit with 2)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    set_log_level(args.log_level)
    commands: dict[str, Callable[[], Any]] = {
        "gen-data": lambda: cmd_gen_data(args),
        "fit": lambda: cmd_fit(parser, args),
        "predict": lambda: cmd_predict(args),
        "benchmark": lambda: cmd_benchmark(args),
        "curve": lambda: cmd_curve(args),
    }
    try:
        commands[args.command]()
    except PACKAGE_ERRORS as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
