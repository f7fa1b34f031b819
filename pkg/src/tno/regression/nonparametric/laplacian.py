"""
Gaussian processes with a graph-Laplacian precision matrix. With kernel edge weights the
predictive mean is the Bayesian kernel regression estimate, with mutual k-NN edge weights it
is the Bayesian mutual k-NN regression estimate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from .classical import (
    BandwidthSpec,
    check_queries,
    deserialize_train,
    kernel_matrix,
    mutual_neighbors_from_distances,
    neighbor_ranks,
    pairwise_distances,
    serialize_train,
)
from .dataset import Dataset
from .exceptions import HyperparameterError
from .functions import init
from .linalg import LaplacianFactor, laplacian

logger = init(__name__, logger_level=logging.INFO)


def _check_positive(name: str, value: float) -> float:
    """
    :param name: name of the hyperparameter
    :param value: its value
    :raise HyperparameterError: value is not finite and strictly positive
    :return: the value as float
    """
    if not np.isfinite(value) or value <= 0:
        raise HyperparameterError(f"{name} must be strictly positive, got {value}.")
    return float(value)


@dataclass(frozen=True)
class KernelWeights:
    """
    Edge weight sigma0 * exp(-||H^-1 (x_i - x_j)||^2).
    """

    bandwidth: BandwidthSpec
    sigma0: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma0", _check_positive("sigma0", self.sigma0))

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized weight rule
        """
        return {"bandwidth": self.bandwidth, "sigma0": self.sigma0}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> KernelWeights:
        r"""
        :param obj: serialized weight rule
        :param \**_kwargs: optional extra keyword arguments
        :return: the weight rule
        """
        return KernelWeights(obj["bandwidth"], obj["sigma0"])


@dataclass(frozen=True)
class MutualKnn:
    """
    Edge weight sigma0 between mutual k-nearest neighbors, 0 otherwise.
    """

    k: int
    sigma0: float

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise HyperparameterError(f"k must be a positive integer, got {self.k}.")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "sigma0", _check_positive("sigma0", self.sigma0))

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized weight rule
        """
        return {"k": self.k, "sigma0": self.sigma0}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> MutualKnn:
        r"""
        :param obj: serialized weight rule
        :param \**_kwargs: optional extra keyword arguments
        :return: the weight rule
        """
        return MutualKnn(obj["k"], obj["sigma0"])


WeightSpec = Union[KernelWeights, MutualKnn]


@dataclass(frozen=True)
class Prediction:
    """
    Predictive mean and variance at a single query.
    """

    mean: float
    variance: float


def kernel_graph(
    inputs: npt.NDArray[np.float64], bandwidth: BandwidthSpec
) -> npt.NDArray[np.float64]:
    """
    Unscaled kernel weights between training inputs, zero diagonal, exactly symmetric.

    :param inputs: n x d matrix
    :param bandwidth: bandwidth specification
    :return: n x n weight matrix with sigma0 = 1
    """
    upper = np.triu(kernel_matrix(inputs, inputs, bandwidth), k=1)
    return upper + upper.T


def mutual_graph(inputs: npt.NDArray[np.float64], k: int) -> npt.NDArray[np.float64]:
    """
    Adjacency of the mutual k-NN graph within the training set, self excluded. A pair is
    joined when each point has fewer than k other points strictly closer than its partner, so
    points tied at the k-th distance all count as neighbors and equally spaced inputs form a
    chain at k = 1. With k at least n - 1 every point is a neighbor of every other point.

    :param inputs: n x d matrix
    :param k: number of neighbors
    :return: n x n 0/1 matrix
    """
    n = inputs.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    neighbor = neighbor_ranks(pairwise_distances(inputs)) < min(k, n - 1)
    return (neighbor & neighbor.T).astype(np.float64)


def build_weight_matrix(data: Dataset, spec: WeightSpec) -> npt.NDArray[np.float64]:
    """
    Edge weights of the training graph.

    :param data: training set
    :param spec: weight rule
    :return: n x n symmetric nonnegative matrix with zero diagonal
    """
    if isinstance(spec, KernelWeights):
        return spec.sigma0 * kernel_graph(data.inputs, spec.bandwidth)
    return spec.sigma0 * mutual_graph(data.inputs, spec.k)


def build_precision(weights: npt.NDArray[np.float64], sigma2: float) -> npt.NDArray[np.float64]:
    """
    Precision matrix D - W + sigma^2 I.

    :param weights: n x n symmetric nonnegative weight matrix
    :param sigma2: ridge sigma^2
    :raise HyperparameterError: sigma^2 is not strictly positive
    :return: n x n symmetric positive-definite matrix
    """
    _check_positive("sigma^2", sigma2)
    return laplacian(weights) + sigma2 * np.eye(weights.shape[0])


class LaplacianModel:
    """
    Fitted Gaussian process with precision D - W + sigma^2 I on the training targets.
    """

    def __init__(self, train: Dataset, spec: WeightSpec, sigma: float) -> None:
        """
        :param train: training set
        :param spec: weight rule
        :param sigma: noise scale, the ridge of the precision is its square
        :raise HyperparameterError: sigma is not strictly positive
        """
        if isinstance(spec, KernelWeights):
            spec.bandwidth.scale(train.d)
        self.train = train
        self.spec = spec
        self.sigma = _check_positive("sigma", sigma)
        self.weights = build_weight_matrix(train, spec)
        self.weights.setflags(write=False)
        self._train_distances = (
            pairwise_distances(train.inputs) if isinstance(spec, MutualKnn) else np.empty((0, 0))
        )

    @property
    def sigma2(self) -> float:
        """
        :return: the ridge sigma^2
        """
        return self.sigma**2

    @property
    def precision(self) -> npt.NDArray[np.float64]:
        """
        :return: the precision matrix D - W + sigma^2 I
        """
        return build_precision(self.weights, self.sigma2)

    def factorize(self) -> LaplacianFactor:
        """
        :raise NotPositiveDefiniteError: the precision could not be factorized
        :return: factorization of the precision
        """
        return LaplacianFactor.from_weights(self.weights, self.sigma2)

    def query_weight_matrix(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: m x n matrix of edge weights between queries and training points
        """
        matrix = check_queries(queries, self.train.d)
        if isinstance(self.spec, KernelWeights):
            return self.spec.sigma0 * kernel_matrix(matrix, self.train.inputs, self.spec.bandwidth)
        k = min(self.spec.k, self.train.n)
        result = np.zeros((matrix.shape[0], self.train.n))
        for row, distances in enumerate(cdist(matrix, self.train.inputs)):
            members = mutual_neighbors_from_distances(distances, self._train_distances, k)
            result[row, members] = self.spec.sigma0
        return result

    def predict_distribution(
        self, queries: npt.ArrayLike
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """
        :param queries: m x d matrix of queries
        :return: predictive means and variances
        """
        weights = self.query_weight_matrix(queries)
        denominator = weights.sum(axis=1) + self.sigma2
        return weights @ self.train.targets / denominator, 1 / denominator

    def predict(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: predictive means
        """
        return self.predict_distribution(queries)[0]

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized model without the derived matrices
        """
        return serialize_train(self.train) | {"spec": self.spec, "sigma": self.sigma}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> LaplacianModel:
        r"""
        :param obj: serialized model
        :param \**_kwargs: optional extra keyword arguments
        :return: the model, with weights recomputed
        """
        return LaplacianModel(deserialize_train(obj), obj["spec"], obj["sigma"])


def query_weights(x_new: npt.ArrayLike, model: LaplacianModel) -> npt.NDArray[np.float64]:
    """
    Edge weights between a query and the training points. For mutual k-NN weights a training
    point is connected when it is a mutual neighbor of the query.

    :param x_new: query vector
    :param model: fitted model
    :return: length-n vector
    """
    return model.query_weight_matrix(model.train.check_query(x_new)[None, :])[0]


def predict(x_new: npt.ArrayLike, model: LaplacianModel) -> Prediction:
    """
    Predictive distribution at a query: mean sum(w_i y_i) / (sum(w_i) + sigma^2) and variance
    1 / (sum(w_i) + sigma^2).

    :param x_new: query vector
    :param model: fitted model
    :return: the prediction
    """
    weights = query_weights(x_new, model)
    denominator = float(weights.sum()) + model.sigma2
    return Prediction(float(weights @ model.train.targets) / denominator, 1 / denominator)
