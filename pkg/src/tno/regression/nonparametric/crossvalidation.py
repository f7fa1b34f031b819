"""
Leave-one-out cross-validation of the bandwidth of kernel regression and of k for k-NN and
mutual k-NN regression.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Literal, Sequence

import numpy as np
import numpy.typing as npt

from .classical import (
    BandwidthSpec,
    PerDimBandwidth,
    SingleBandwidth,
    nearest_order,
    neighbor_ranks,
    pairwise_distances,
)
from .dataset import Dataset
from .evidence import best_index, check_k_range
from .exceptions import HyperparameterError
from .functions import init, map_in_executor
from .laplacian import kernel_graph

logger = init(__name__, logger_level=logging.INFO)

Estimator = Literal["knn", "mknn"]


@dataclass(frozen=True)
class BandwidthSelection:
    """
    Bandwidth with the smallest leave-one-out score.

    :param bandwidth: selected bandwidth
    :param score: its mean squared leave-one-out error
    :param trace: (bandwidth, score) for every evaluated candidate
    """

    bandwidth: BandwidthSpec
    score: float
    trace: tuple[tuple[BandwidthSpec, float], ...]


@dataclass(frozen=True)
class KCrossValidation:
    """
    Number of neighbors with the smallest leave-one-out score.

    :param k: selected k
    :param score: its mean squared leave-one-out error
    :param trace: (k, score) for every candidate, in increasing k
    """

    k: int
    score: float
    trace: tuple[tuple[int, float], ...]


def loo_kernel_predictions(data: Dataset, bw: BandwidthSpec) -> npt.NDArray[np.float64]:
    """
    Kernel regression estimate at every training input from the other training points.

    :param data: training set
    :param bw: bandwidth specification
    :return: length-n vector, 0 where all remaining weights vanish
    """
    weights = kernel_graph(data.inputs, bw)
    totals = weights.sum(axis=1)
    numerators = weights @ data.targets
    safe = np.where(totals > 0, totals, 1.0)
    return np.where(totals > 0, numerators / safe, 0.0)


def loo_kernel_score(data: Dataset, bw: BandwidthSpec) -> float:
    """
    :param data: training set
    :param bw: bandwidth specification
    :return: mean squared leave-one-out error
    """
    residuals = data.targets - loo_kernel_predictions(data, bw)
    return float(np.mean(residuals**2))


def _best_bandwidth(scored: Sequence[tuple[BandwidthSpec, float]]) -> tuple[BandwidthSpec, float]:
    """
    :param scored: (bandwidth, score) pairs
    :return: the pair with the smallest score, ties to the lexicographically smallest bandwidth
    """
    return min(scored, key=lambda pair: (pair[1], pair[0].values))


def loocv_bandwidth(
    data: Dataset, grid: Sequence[BandwidthSpec], workers: int = 1
) -> BandwidthSelection:
    """
    Select the bandwidth of kernel regression by leave-one-out cross-validation over a grid.

    :param data: training set
    :param grid: candidate bandwidths
    :param workers: number of concurrent evaluations
    :raise HyperparameterError: empty grid
    :return: the selection
    """
    if len(grid) == 0:
        raise HyperparameterError("The bandwidth grid is empty.")
    scores = map_in_executor(partial(loo_kernel_score, data), list(grid), workers)
    trace = tuple(zip(grid, scores))
    bandwidth, score = _best_bandwidth(trace)
    logger.debug(f"Leave-one-out bandwidth {bandwidth.values} with score {score:.6g}")
    return BandwidthSelection(bandwidth, score, trace)


def loocv_bandwidth_per_dimension(
    data: Dataset, grid: Sequence[float], sweeps: int = 3, workers: int = 1
) -> BandwidthSelection:
    """
    Leave-one-out search of one bandwidth per dimension by coordinate descent: start from the
    best bandwidth shared by all dimensions, then repeatedly optimize one dimension at a time
    over the grid.

    :param data: training set
    :param grid: candidate bandwidths for every dimension
    :param sweeps: maximal number of passes over the dimensions
    :param workers: number of concurrent evaluations
    :raise HyperparameterError: empty grid
    :return: the selection; the trace holds every evaluated candidate in evaluation order
    """
    start = loocv_bandwidth(data, [PerDimBandwidth((h,) * data.d) for h in grid], workers)
    current, score = start.bandwidth, start.score
    trace = list(start.trace)
    for sweep in range(sweeps):
        previous = current
        for m in range(data.d):
            candidates = [
                PerDimBandwidth(current.values[:m] + (float(h),) + current.values[m + 1 :])
                for h in grid
            ]
            scores = map_in_executor(partial(loo_kernel_score, data), candidates, workers)
            scored = list(zip(candidates, scores))
            trace.extend(scored)
            # keep the current point unless a candidate is strictly better
            best, best_score = _best_bandwidth(scored)
            if best_score < score:
                current, score = best, best_score
        logger.debug(f"Sweep {sweep + 1}: bandwidths {current.values}, score {score:.6g}")
        if current == previous:
            break
    return BandwidthSelection(PerDimBandwidth(current.values), score, tuple(trace))


def loo_neighbor_predictions(
    data: Dataset, k_values: Sequence[int], estimator: Estimator
) -> dict[int, npt.NDArray[np.float64]]:
    """
    k-NN or mutual k-NN estimate at every training input from the other training points.

    Leaving x_i out and querying at x_i, a training point x_j is a mutual neighbor when it is
    among the k nearest of x_i and fewer than k points other than x_i and x_j are closer to
    x_j than x_i is.

    :param data: training set
    :param k_values: numbers of neighbors, each in [1, n - 1]
    :param estimator: "knn" or "mknn"
    :return: per k, the length-n vector of leave-one-out estimates
    """
    distances = pairwise_distances(data.inputs)
    k_max = max(k_values)
    order = nearest_order(distances)[:, :k_max]
    targets = data.targets[order]
    if estimator == "knn":
        sums = np.cumsum(targets, axis=1)
        return {k: sums[:, k - 1] / k for k in k_values}
    ranks = neighbor_ranks(distances)
    reverse = ranks[order, np.arange(data.n)[:, None]]
    result = {}
    for k in k_values:
        members = reverse[:, :k] < k
        counts = members.sum(axis=1)
        totals = (targets[:, :k] * members).sum(axis=1)
        result[k] = np.where(counts > 0, totals / np.maximum(counts, 1), 0.0)
    return result


def loocv_k(data: Dataset, k_range: Sequence[int], estimator: Estimator) -> KCrossValidation:
    """
    Select k of k-NN or mutual k-NN regression by leave-one-out cross-validation.

    :param data: training set
    :param k_range: candidate numbers of neighbors
    :param estimator: "knn" or "mknn"
    :raise HyperparameterError: empty range, a candidate outside [1, n - 1] or an unknown
        estimator
    :return: the selection, ties going to the smaller k
    """
    if estimator not in ("knn", "mknn"):
        raise HyperparameterError(f"Unknown estimator {estimator!r}.")
    candidates = check_k_range(k_range, data.n)
    predictions = loo_neighbor_predictions(data, candidates, estimator)
    scores = [float(np.mean((data.targets - predictions[k]) ** 2)) for k in candidates]
    best = best_index(scores, maximize=False)
    logger.debug(f"Leave-one-out {estimator} k={candidates[best]} with score {scores[best]:.6g}")
    return KCrossValidation(candidates[best], scores[best], tuple(zip(candidates, scores)))


def single_bandwidth_grid(grid: Sequence[float]) -> list[BandwidthSpec]:
    """
    :param grid: bandwidth values
    :return: the values as shared bandwidths
    """
    return [SingleBandwidth(float(h)) for h in grid]
