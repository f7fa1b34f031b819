"""
Benchmark suites on the sinc and yacht hydrodynamics data: hyperparameter selection recipes
for every compared method, the fold loop and the report files.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from time import perf_counter
from typing import Any, Callable, Union

import numpy as np
import numpy.typing as npt
import pandas as pd

from .classical import BandwidthSpec, KernelRegressor, KnnRegressor, MknnRegressor, SingleBandwidth
from .config import DEFAULT_FOLDS, DEFAULT_SEED, SINC_SUITE, YACHT_SUITE, SuiteConfig
from .crossvalidation import (
    Estimator,
    loocv_bandwidth,
    loocv_bandwidth_per_dimension,
    loocv_k,
    single_bandwidth_grid,
)
from .dataset import (
    SINC_DATASETS,
    Dataset,
    apply_normalizer,
    fit_normalizer,
    kfold,
    load_yacht,
    sinc_benchmark,
)
from .evidence import HyperParams, bandwidth_candidate, evidence_ascent, select_k
from .exceptions import HyperparameterError
from .functions import init, map_in_executor
from .gpr import GPRModel
from .laplacian import KernelWeights, LaplacianModel, MutualKnn

logger = init(__name__, logger_level=logging.INFO)

Regressor = Union[KernelRegressor, KnnRegressor, MknnRegressor, LaplacianModel, GPRModel]

STD_CONVENTION = "sample standard deviation over folds (ddof=1)"

SUITE_METHODS: dict[str, tuple[str, ...]] = {
    "sinc": ("KR-CV", "BKR", "KR-B", "kNN-CV", "MkNN-CV", "BMkNN", "MkNN-B"),
    "yacht-single": ("KR-CV", "BKR", "KR-B"),
    "yacht-multi": ("KR-CV", "BKR", "KR-B"),
    "yacht-knn": ("kNN-CV", "MkNN-CV", "BMkNN", "MkNN-B"),
}


@dataclass(frozen=True)
class FittedMethod:
    """
    A fitted estimator together with the hyperparameters that were selected for it.
    """

    method: str
    model: Regressor
    hyperparameters: dict[str, Any]


def bandwidth_value(bandwidth: BandwidthSpec) -> float | list[float]:
    """
    :param bandwidth: bandwidth specification
    :return: the bandwidth as plain number, or list of numbers per dimension
    """
    if isinstance(bandwidth, SingleBandwidth):
        return bandwidth.h
    return list(bandwidth.h)


def k_candidates(n: int, k_max: int) -> list[int]:
    """
    :param n: number of training points
    :param k_max: largest k of interest
    :raise HyperparameterError: fewer than two training points
    :return: 1, ..., min(k_max, n - 1)
    """
    if n < 2:
        raise HyperparameterError("Selecting k requires at least two training points.")
    return list(range(1, min(k_max, n - 1) + 1))


def fit_kernel_loocv(
    train: Dataset, config: SuiteConfig, multi: bool, workers: int = 1
) -> FittedMethod:
    """
    Kernel regression with the leave-one-out bandwidth.

    :param train: training set
    :param config: suite settings
    :param multi: one bandwidth per dimension (coordinate descent) instead of a shared one
    :param workers: number of concurrent grid evaluations
    :return: the fitted method
    """
    grid = list(config.grid.values())
    if multi:
        selection = loocv_bandwidth_per_dimension(train, grid, config.sweeps, workers)
    else:
        selection = loocv_bandwidth(train, single_bandwidth_grid(grid), workers)
    return FittedMethod(
        "KR-CV",
        KernelRegressor(train, selection.bandwidth),
        {"bandwidth": bandwidth_value(selection.bandwidth), "loocv": selection.score},
    )


def fit_bayesian_kernel(train: Dataset, config: SuiteConfig, multi: bool) -> FittedMethod:
    """
    Bayesian kernel regression with evidence-maximizing hyperparameters. The scales are
    optimized together with the bandwidth(s) or held fixed, as the suite prescribes.

    :param train: training set
    :param config: suite settings
    :param multi: one bandwidth per dimension instead of a shared one
    :raise NotPositiveDefiniteError: the precision cannot be factorized at the start
    :return: the fitted method
    """
    scales = config.kernel_scales
    template = KernelWeights(bandwidth_candidate(1.0, train.d, multi), scales.sigma0)
    initial = HyperParams(
        scales.sigma0,
        scales.sigma,
        fixed_sigma0=not scales.optimize,
        fixed_sigma=not scales.optimize,
    )
    result = evidence_ascent(train, template, initial, config.optimizer, config.grid)
    params = result.params
    return FittedMethod(
        "BKR",
        LaplacianModel(train, params.spec(), params.sigma),
        params.describe()
        | {
            "log_evidence": result.log_evidence,
            "iterations": result.iterations,
            "converged": result.converged,
        },
    )


def kernel_from_bayesian(bayesian: FittedMethod) -> FittedMethod:
    """
    Classical kernel regression at the bandwidth selected by the evidence.

    :param bayesian: fitted Bayesian kernel regression
    :raise HyperparameterError: the fitted model does not use kernel weights
    :return: the fitted method
    """
    model = bayesian.model
    if not (isinstance(model, LaplacianModel) and isinstance(model.spec, KernelWeights)):
        raise HyperparameterError(f"{bayesian.method} does not hold kernel weights.")
    return FittedMethod(
        "KR-B",
        KernelRegressor(model.train, model.spec.bandwidth),
        {"bandwidth": bandwidth_value(model.spec.bandwidth)},
    )


def fit_neighbors_loocv(train: Dataset, config: SuiteConfig, estimator: Estimator) -> FittedMethod:
    """
    k-NN or mutual k-NN regression with the leave-one-out k.

    :param train: training set
    :param config: suite settings
    :param estimator: "knn" or "mknn"
    :return: the fitted method
    """
    selection = loocv_k(train, k_candidates(train.n, config.k_max), estimator)
    hyperparameters = {"k": selection.k, "loocv": selection.score}
    if estimator == "knn":
        return FittedMethod("kNN-CV", KnnRegressor(train, selection.k), hyperparameters)
    return FittedMethod("MkNN-CV", MknnRegressor(train, selection.k), hyperparameters)


def fit_bayesian_mknn(train: Dataset, config: SuiteConfig, workers: int = 1) -> FittedMethod:
    """
    Bayesian mutual k-NN regression with the evidence-maximizing k (and scales, when the suite
    optimizes them).

    :param train: training set
    :param config: suite settings
    :param workers: number of concurrent evaluations over k
    :return: the fitted method
    """
    scales = config.knn_scales
    selection = select_k(
        train,
        k_candidates(train.n, config.k_max),
        scales.sigma0,
        scales.sigma,
        optimize_scales=scales.optimize,
        config=config.optimizer,
        workers=workers,
    )
    return FittedMethod(
        "BMkNN",
        LaplacianModel(train, MutualKnn(selection.k, selection.sigma0), selection.sigma),
        {
            "k": selection.k,
            "sigma0": selection.sigma0,
            "sigma": selection.sigma,
            "log_evidence": selection.log_evidence,
        },
    )


def mknn_from_bayesian(bayesian: FittedMethod) -> FittedMethod:
    """
    Classical mutual k-NN regression at the k selected by the evidence.

    :param bayesian: fitted Bayesian mutual k-NN regression
    :raise HyperparameterError: the fitted model does not use mutual k-NN weights
    :return: the fitted method
    """
    model = bayesian.model
    if not (isinstance(model, LaplacianModel) and isinstance(model.spec, MutualKnn)):
        raise HyperparameterError(f"{bayesian.method} does not hold mutual k-NN weights.")
    return FittedMethod("MkNN-B", MknnRegressor(model.train, model.spec.k), {"k": model.spec.k})


@dataclass(frozen=True, eq=False)
class FoldResult:
    """
    Test predictions of one method on one fold.
    """

    method: str
    dataset: str
    fold: int
    hyperparameters: dict[str, Any]
    indices: npt.NDArray[np.int_]
    targets: npt.NDArray[np.float64]
    predictions: npt.NDArray[np.float64]
    seconds: float

    @property
    def mse(self) -> float:
        """
        :return: mean squared test error
        """
        return float(np.mean((self.targets - self.predictions) ** 2))


@dataclass(frozen=True)
class Task:
    """
    One train/test split of a suite.
    """

    dataset: str
    fold: int
    train: Dataset
    test: Dataset
    indices: tuple[int, ...]


def run_methods(
    task: Task, methods: tuple[str, ...], config: SuiteConfig, multi: bool
) -> list[FoldResult]:
    """
    Fit every method on the training part of a task and predict its test part.

    :param task: the split
    :param methods: names of the methods, in report order
    :param config: suite settings
    :param multi: one bandwidth per dimension for the kernel methods
    :return: one result per method
    """
    recipes: dict[str, Callable[[dict[str, FittedMethod]], FittedMethod]] = {
        "KR-CV": lambda _: fit_kernel_loocv(task.train, config, multi),
        "BKR": lambda _: fit_bayesian_kernel(task.train, config, multi),
        "KR-B": lambda fitted: kernel_from_bayesian(fitted["BKR"]),
        "kNN-CV": lambda _: fit_neighbors_loocv(task.train, config, "knn"),
        "MkNN-CV": lambda _: fit_neighbors_loocv(task.train, config, "mknn"),
        "BMkNN": lambda _: fit_bayesian_mknn(task.train, config),
        "MkNN-B": lambda fitted: mknn_from_bayesian(fitted["BMkNN"]),
    }
    fitted: dict[str, FittedMethod] = {}
    results = []
    for method in methods:
        start = perf_counter()
        fitted[method] = recipes[method](fitted)
        predictions = fitted[method].model.predict(task.test.inputs)
        seconds = perf_counter() - start
        result = FoldResult(
            method,
            task.dataset,
            task.fold,
            fitted[method].hyperparameters,
            np.asarray(task.indices, dtype=np.int_),
            task.test.targets,
            np.asarray(predictions, dtype=np.float64),
            seconds,
        )
        logger.info(
            f"{task.dataset} fold {task.fold}: {method} mse={result.mse:.6g} "
            f"({seconds:.2f} s)"
        )
        results.append(result)
    return results


@dataclass(frozen=True)
class MethodRecord:
    """
    Summary of one method on one dataset over all folds.
    """

    method: str
    dataset: str
    hyperparameters: list[dict[str, Any]]
    fold_mse: list[float]
    mse_mean: float
    mse_std: float | None
    seconds: float = field(compare=False)


@dataclass(frozen=True)
class BenchmarkReport:
    """
    Outcome of a benchmark suite.
    """

    suite: str
    records: list[MethodRecord]
    metadata: dict[str, Any]
    results: list[FoldResult] = field(repr=False, compare=False)

    def to_dict(self) -> dict[str, Any]:
        """
        :return: the report as plain data; wall times are left out so that the report only
            depends on the data and the seed
        """
        return {
            "suite": self.suite,
            "metadata": self.metadata,
            "records": [
                {
                    "method": record.method,
                    "dataset": record.dataset,
                    "mse_mean": record.mse_mean,
                    "mse_std": record.mse_std,
                    "fold_mse": record.fold_mse,
                    "hyperparameters": record.hyperparameters,
                }
                for record in self.records
            ],
        }

    def timings(self) -> dict[str, float]:
        """
        :return: total wall time in seconds per dataset and method
        """
        return {f"{record.dataset}/{record.method}": record.seconds for record in self.records}

    def table(self) -> pd.DataFrame:
        """
        :return: one row per method; sinc suites get a column per dataset, folded suites the
            mean and standard deviation of the test error
        """
        frame = pd.DataFrame(
            [
                {
                    "method": record.method,
                    "dataset": record.dataset,
                    "mse_mean": record.mse_mean,
                    "mse_std": record.mse_std,
                }
                for record in self.records
            ]
        )
        if self.suite == "sinc":
            methods = list(dict.fromkeys(frame["method"]))
            pivot = frame.pivot(index="method", columns="dataset", values="mse_mean")
            return pivot.loc[methods].reset_index().rename_axis(columns=None)
        return frame.drop(columns="dataset")

    def predictions(self) -> pd.DataFrame:
        """
        :return: every test prediction with its target
        """
        return pd.DataFrame(
            [
                {
                    "suite": self.suite,
                    "dataset": result.dataset,
                    "method": result.method,
                    "fold": result.fold,
                    "index": int(index),
                    "target": float(target),
                    "prediction": float(prediction),
                }
                for result in self.results
                for index, target, prediction in zip(
                    result.indices, result.targets, result.predictions
                )
            ],
            columns=["suite", "dataset", "method", "fold", "index", "target", "prediction"],
        )

    def write(self, out: Path | str) -> None:
        """
        Write report.json, timings.json, table.csv and predictions.csv into a directory.

        :param out: output directory, created when missing
        """
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.json").write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        (directory / "timings.json").write_text(
            json.dumps(self.timings(), indent=2) + "\n", encoding="utf-8"
        )
        self.table().to_csv(directory / "table.csv", index=False, float_format="%.17g")
        self.predictions().to_csv(
            directory / "predictions.csv", index=False, float_format="%.17g"
        )


def summarize(suite: str, results: list[FoldResult], metadata: dict[str, Any]) -> BenchmarkReport:
    """
    Collect fold results per dataset and method, in order of first appearance.

    :param suite: suite name
    :param results: all fold results
    :param metadata: report metadata
    :return: the report
    """
    keys = list(dict.fromkeys((result.dataset, result.method) for result in results))
    records = []
    for dataset, method in keys:
        group = sorted(
            (r for r in results if r.dataset == dataset and r.method == method),
            key=lambda r: r.fold,
        )
        fold_mse = [r.mse for r in group]
        records.append(
            MethodRecord(
                method,
                dataset,
                [r.hyperparameters for r in group],
                fold_mse,
                float(np.mean(fold_mse)),
                float(np.std(fold_mse, ddof=1)) if len(fold_mse) > 1 else None,
                float(sum(r.seconds for r in group)),
            )
        )
    return BenchmarkReport(suite, records, metadata, results)


def sinc_tasks() -> list[Task]:
    """
    :return: the train/test splits of both sinc experiments
    """
    tasks = []
    for name in SINC_DATASETS:
        train, test = sinc_benchmark(name)
        tasks.append(Task(name, 0, train, test, tuple(range(test.n))))
    return tasks


def yacht_tasks(data: Dataset, folds: int, seed: int) -> tuple[list[Task], list[int]]:
    """
    Seeded k-fold splits with the inputs normalized by statistics of the training part.

    :param data: the yacht data
    :param folds: number of folds
    :param seed: seed of the fold assignment
    :return: the splits and the fold index of every data point
    """
    assignment = kfold(data.n, folds, seed)
    tasks = []
    for fold in range(assignment.n_folds):
        train_indices, test_indices = assignment.split(fold)
        train, test = data.subset(train_indices), data.subset(test_indices)
        normalizer = fit_normalizer(train)
        tasks.append(
            Task(
                data.name,
                fold,
                apply_normalizer(normalizer, train),
                apply_normalizer(normalizer, test),
                tuple(int(index) for index in test_indices),
            )
        )
    return tasks, [int(value) for value in assignment.folds]


def run_benchmark(
    suite: str,
    data: Path | str | None = None,
    seed: int = DEFAULT_SEED,
    folds: int = DEFAULT_FOLDS,
    workers: int = 1,
    config: SuiteConfig | None = None,
) -> BenchmarkReport:
    """
    Run a benchmark suite.

    :param suite: "sinc", "yacht-single", "yacht-multi" or "yacht-knn"
    :param data: yacht data file, required for the yacht suites
    :param seed: seed of the fold assignment
    :param folds: number of folds of the yacht suites
    :param workers: number of splits processed concurrently
    :param config: suite settings, defaulting to the preset of the suite
    :raise HyperparameterError: unknown suite
    :raise FileNotFoundError: a yacht suite without (existing) data file
    :return: the report
    """
    # pylint: disable=import-outside-toplevel,cyclic-import
    from tno.regression.nonparametric import __version__

    if suite not in SUITE_METHODS:
        raise HyperparameterError(f"Unknown suite {suite!r}.")
    metadata: dict[str, Any] = {"seed": seed, "version": __version__, "std": STD_CONVENTION}
    if suite == "sinc":
        config = config or SINC_SUITE
        tasks = sinc_tasks()
        metadata |= {"folds": 1, "fold_assignment": None, "normalization": None}
    else:
        config = config or YACHT_SUITE
        if data is None:
            raise FileNotFoundError(f"The {suite} suite requires the yacht data file (--data).")
        tasks, assignment = yacht_tasks(load_yacht(data), folds, seed)
        metadata |= {
            "folds": len(tasks),
            "fold_assignment": assignment,
            "normalization": "inputs, z-score with training-fold mean and population std",
        }
    metadata["k_max"] = config.k_max
    run = partial(
        run_methods, methods=SUITE_METHODS[suite], config=config, multi=suite == "yacht-multi"
    )
    nested = map_in_executor(run, tasks, workers)
    return summarize(suite, [result for results in nested for result in results], metadata)
