"""
Classical nonparametric regression: Nadaraya-Watson kernel regression, k-NN regression and
mutual k-NN regression, plus the neighbor machinery they share.

Neighbor searches are brute force. Ties in distance are broken by ascending data index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .exceptions import DimensionMismatchError, HyperparameterError
from .functions import init

logger = init(__name__, logger_level=logging.INFO)


@dataclass(frozen=True)
class SingleBandwidth:
    """
    One bandwidth shared by all input dimensions.
    """

    h: float

    def __post_init__(self) -> None:
        """
        :raise HyperparameterError: non-positive bandwidth
        """
        if not np.isfinite(self.h) or self.h <= 0:
            raise HyperparameterError(f"Bandwidth must be strictly positive, got {self.h}.")
        object.__setattr__(self, "h", float(self.h))

    @property
    def values(self) -> tuple[float, ...]:
        """
        :return: the free bandwidth values
        """
        return (self.h,)

    def scale(self, d: int) -> npt.NDArray[np.float64]:
        """
        :param d: input dimension
        :return: per-dimension divisor of the displacements
        """
        return np.full(d, self.h)

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized bandwidth
        """
        return {"h": self.h}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> SingleBandwidth:
        r"""
        :param obj: serialized bandwidth
        :param \**_kwargs: optional extra keyword arguments
        :return: the bandwidth
        """
        return SingleBandwidth(obj["h"])


@dataclass(frozen=True)
class PerDimBandwidth:
    """
    An individual bandwidth for every input dimension (diagonal bandwidth matrix).
    """

    h: tuple[float, ...]

    def __post_init__(self) -> None:
        """
        :raise HyperparameterError: empty or non-positive bandwidths
        """
        values = tuple(float(value) for value in self.h)
        if not values or any(not np.isfinite(value) or value <= 0 for value in values):
            raise HyperparameterError(f"Bandwidths must be strictly positive, got {values}.")
        object.__setattr__(self, "h", values)

    @property
    def values(self) -> tuple[float, ...]:
        """
        :return: the free bandwidth values
        """
        return self.h

    def scale(self, d: int) -> npt.NDArray[np.float64]:
        """
        :param d: input dimension
        :raise DimensionMismatchError: number of bandwidths differs from d
        :return: per-dimension divisor of the displacements
        """
        if len(self.h) != d:
            raise DimensionMismatchError(
                f"Got {len(self.h)} bandwidths for data of dimension d={d}."
            )
        return np.asarray(self.h, dtype=np.float64)

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized bandwidths
        """
        return {"h": list(self.h)}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> PerDimBandwidth:
        r"""
        :param obj: serialized bandwidths
        :param \**_kwargs: optional extra keyword arguments
        :return: the bandwidths
        """
        return PerDimBandwidth(tuple(obj["h"]))


BandwidthSpec = Union[SingleBandwidth, PerDimBandwidth]


def bandwidth_from_values(values: Sequence[float], multi: bool) -> BandwidthSpec:
    """
    :param values: one bandwidth, or one per dimension
    :param multi: build a per-dimension specification even for a single value
    :return: the matching bandwidth specification
    """
    if multi or len(values) > 1:
        return PerDimBandwidth(tuple(values))
    return SingleBandwidth(values[0])


@dataclass(frozen=True, eq=False)
class NeighborSet:
    """
    Indices into a dataset ordered by increasing distance, and the matching distances.
    """

    indices: npt.NDArray[np.int_]
    distances: npt.NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def gaussian_kernel(z: npt.ArrayLike) -> float:
    """
    Gaussian kernel exp(-||z||^2).

    :param z: (scaled) displacement vector
    :return: kernel value in (0, 1]
    """
    vector = np.atleast_1d(np.asarray(z, dtype=np.float64))
    return float(np.exp(-np.sum(vector**2)))


def kernel_matrix(
    queries: npt.NDArray[np.float64],
    inputs: npt.NDArray[np.float64],
    bw: BandwidthSpec,
) -> npt.NDArray[np.float64]:
    """
    Kernel values between every query and every training input.

    :param queries: m x d matrix
    :param inputs: n x d matrix
    :param bw: bandwidth specification
    :return: m x n matrix of kernel values
    """
    scale = bw.scale(inputs.shape[1])
    return np.exp(-cdist(queries / scale, inputs / scale, "sqeuclidean"))


def kernel_weights(x: npt.ArrayLike, data: Dataset, bw: BandwidthSpec) -> npt.NDArray[np.float64]:
    """
    Kernel weight of every training point for a query.

    :param x: query vector
    :param data: training set
    :param bw: bandwidth specification
    :return: length-n vector of weights
    """
    query = data.check_query(x)
    return kernel_matrix(query[None, :], data.inputs, bw)[0]


def weighted_average(weights: npt.NDArray[np.float64], targets: npt.NDArray[np.float64]) -> float:
    """
    Weighted average of the targets, 0 when all weights vanish.

    :param weights: nonnegative weights
    :param targets: target values
    :return: the average
    """
    total = weights.sum()
    if total == 0:
        return 0.0
    return float(weights @ targets / total)


def kernel_regress(x: npt.ArrayLike, data: Dataset, bw: BandwidthSpec) -> float:
    """
    Nadaraya-Watson estimate at a query.

    :param x: query vector
    :param data: training set
    :param bw: bandwidth specification
    :return: kernel-weighted average of the targets (0 if the weights underflow)
    """
    return weighted_average(kernel_weights(x, data, bw), data.targets)


def _check_k(k: int, n: int) -> None:
    """
    :param k: number of neighbors
    :param n: number of candidate points
    :raise HyperparameterError: k outside [1, n]
    """
    if not 1 <= k <= n:
        raise HyperparameterError(f"k must lie in [1, {n}], got {k}.")


def query_distances(x: npt.ArrayLike, data: Dataset) -> npt.NDArray[np.float64]:
    """
    :param x: query vector
    :param data: training set
    :return: Euclidean distance from the query to every training input
    """
    query = data.check_query(x)
    return cdist(query[None, :], data.inputs)[0]


def pairwise_distances(inputs: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """
    Euclidean distances between training inputs, with an infinite diagonal so that a point is
    never its own neighbor.

    :param inputs: n x d matrix
    :return: n x n symmetric distance matrix
    """
    distances = cdist(inputs, inputs)
    np.fill_diagonal(distances, np.inf)
    return distances


def nearest_order(distances: npt.NDArray[np.float64]) -> npt.NDArray[np.int_]:
    """
    Indices sorted by increasing distance, ties by ascending index.

    :param distances: distances along the last axis
    :return: sorting indices along the last axis
    """
    return np.argsort(distances, axis=-1, kind="stable")


def neighbor_ranks(distances: npt.NDArray[np.float64]) -> npt.NDArray[np.int_]:
    """
    R[j, i] counts the points l other than j with d(x_j, x_l) < d(x_j, x_i). Point x_i is among
    the k nearest neighbors of x_j, ties included, exactly when R[j, i] < k.

    :param distances: distance matrix with infinite diagonal
    :return: n x n matrix of ranks
    """
    ordered = np.sort(distances, axis=1)
    return np.stack(
        [np.searchsorted(row, values, side="left") for row, values in zip(ordered, distances)]
    )


def knn_indices(
    x: npt.ArrayLike, data: Dataset, k: int, exclude: int | None = None
) -> NeighborSet:
    """
    The k nearest training points of a query.

    :param x: query vector
    :param data: training set
    :param k: number of neighbors
    :param exclude: optional index of a training point that may not be selected
    :raise HyperparameterError: k outside [1, n] (n reduced by one when excluding)
    :return: the neighbors, nearest first
    """
    distances = query_distances(x, data)
    available = data.n
    if exclude is not None:
        distances[exclude] = np.inf
        available -= 1
    _check_k(k, available)
    order = nearest_order(distances)[:k]
    return NeighborSet(order, distances[order])


def knn_regress(x: npt.ArrayLike, data: Dataset, k: int) -> float:
    """
    k-NN estimate: unweighted mean of the k nearest targets.

    :param x: query vector
    :param data: training set
    :param k: number of neighbors
    :return: the estimate
    """
    neighbors = knn_indices(x, data, k)
    return float(data.targets[neighbors.indices].mean())


def reverse_neighbor_mask(
    candidates: npt.NDArray[np.int_],
    query_distance: npt.NDArray[np.float64],
    train_distances: npt.NDArray[np.float64],
    k: int,
) -> npt.NDArray[np.bool_]:
    """
    For every candidate x_i, decide whether the query is among the k nearest neighbors of x_i
    within the training points other than x_i together with the query. The query counts as
    nearer than any training point at the same distance.

    :param candidates: indices of the candidate training points
    :param query_distance: distance from the query to every training point
    :param train_distances: training distance matrix with infinite diagonal
    :param k: number of neighbors
    :return: boolean mask over the candidates
    """
    closer = train_distances[candidates] < query_distance[candidates, None]
    return np.asarray(closer.sum(axis=1) < k)


def mutual_neighbors_from_distances(
    query_distance: npt.NDArray[np.float64],
    train_distances: npt.NDArray[np.float64],
    k: int,
) -> npt.NDArray[np.int_]:
    """
    Mutual k-nearest neighbors of a query given precomputed distances.

    :param query_distance: distance from the query to every training point
    :param train_distances: training distance matrix with infinite diagonal
    :param k: number of neighbors
    :return: indices of the mutual neighbors, nearest first
    """
    candidates = nearest_order(query_distance)[:k]
    return candidates[reverse_neighbor_mask(candidates, query_distance, train_distances, k)]


def mutual_neighbors(x: npt.ArrayLike, data: Dataset, k: int) -> NeighborSet:
    """
    Training points x_i among the k nearest neighbors of x for which x is in turn among the
    k nearest neighbors of x_i, searched over the other training points and x.

    :param x: query vector
    :param data: training set
    :param k: number of neighbors
    :raise HyperparameterError: k outside [1, n]
    :return: the mutual neighbors, nearest first
    """
    _check_k(k, data.n)
    distances = query_distances(x, data)
    indices = mutual_neighbors_from_distances(distances, pairwise_distances(data.inputs), k)
    return NeighborSet(indices, distances[indices])


def mknn_regress(x: npt.ArrayLike, data: Dataset, k: int) -> float:
    """
    Mutual k-NN estimate: mean target over the mutual neighbors, 0 if there are none.

    :param x: query vector
    :param data: training set
    :param k: number of neighbors
    :return: the estimate
    """
    neighbors = mutual_neighbors(x, data, k)
    if len(neighbors) == 0:
        return 0.0
    return float(data.targets[neighbors.indices].mean())


class KernelRegressor:
    """
    Fitted Nadaraya-Watson estimator.
    """

    def __init__(self, train: Dataset, bandwidth: BandwidthSpec) -> None:
        """
        :param train: training set
        :param bandwidth: bandwidth specification
        """
        bandwidth.scale(train.d)
        self.train = train
        self.bandwidth = bandwidth

    def predict(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: the estimates
        """
        matrix = check_queries(queries, self.train.d)
        weights = kernel_matrix(matrix, self.train.inputs, self.bandwidth)
        return np.array([weighted_average(row, self.train.targets) for row in weights])

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized estimator
        """
        return serialize_train(self.train) | {"bandwidth": self.bandwidth}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> KernelRegressor:
        r"""
        :param obj: serialized estimator
        :param \**_kwargs: optional extra keyword arguments
        :return: the estimator
        """
        return KernelRegressor(deserialize_train(obj), obj["bandwidth"])


class KnnRegressor:
    """
    Fitted k-NN estimator.
    """

    def __init__(self, train: Dataset, k: int) -> None:
        """
        :param train: training set
        :param k: number of neighbors
        """
        _check_k(k, train.n)
        self.train = train
        self.k = int(k)

    def predict(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: the estimates
        """
        matrix = check_queries(queries, self.train.d)
        order = nearest_order(cdist(matrix, self.train.inputs))[:, : self.k]
        return np.asarray(self.train.targets[order].mean(axis=1), dtype=np.float64)

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized estimator
        """
        return serialize_train(self.train) | {"k": self.k}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> KnnRegressor:
        r"""
        :param obj: serialized estimator
        :param \**_kwargs: optional extra keyword arguments
        :return: the estimator
        """
        return KnnRegressor(deserialize_train(obj), obj["k"])


class MknnRegressor:
    """
    Fitted mutual k-NN estimator.
    """

    def __init__(self, train: Dataset, k: int) -> None:
        """
        :param train: training set
        :param k: number of neighbors
        """
        _check_k(k, train.n)
        self.train = train
        self.k = int(k)
        self._train_distances = pairwise_distances(train.inputs)

    def predict(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: the estimates
        """
        matrix = check_queries(queries, self.train.d)
        estimates = np.zeros(matrix.shape[0])
        for row, distances in enumerate(cdist(matrix, self.train.inputs)):
            members = mutual_neighbors_from_distances(distances, self._train_distances, self.k)
            if members.size:
                estimates[row] = self.train.targets[members].mean()
        return estimates

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized estimator
        """
        return serialize_train(self.train) | {"k": self.k}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> MknnRegressor:
        r"""
        :param obj: serialized estimator
        :param \**_kwargs: optional extra keyword arguments
        :return: the estimator
        """
        return MknnRegressor(deserialize_train(obj), obj["k"])


def check_queries(queries: npt.ArrayLike, d: int) -> npt.NDArray[np.float64]:
    """
    :param queries: query matrix, or a single query vector
    :param d: input dimension of the model
    :raise DimensionMismatchError: queries do not have d columns
    :return: m x d query matrix
    """
    matrix = np.asarray(queries, dtype=np.float64)
    if matrix.ndim <= 1:
        matrix = matrix.reshape(-1, d) if matrix.size else np.empty((0, d))
    if matrix.ndim != 2 or matrix.shape[1] != d:
        raise DimensionMismatchError(f"Expected queries of dimension d={d}, got {matrix.shape}.")
    return matrix


def serialize_train(train: Dataset) -> dict[str, Any]:
    """
    :param train: training set
    :return: the training set as a dictionary of arrays
    """
    return {"name": train.name, "inputs": train.inputs, "targets": train.targets}


def deserialize_train(obj: dict[str, Any]) -> Dataset:
    """
    :param obj: dictionary produced by serialize_train
    :return: the training set
    """
    return Dataset(obj["inputs"], obj["targets"], name=obj.get("name", "dataset"))
