"""
Gaussian process regression with a squared-exponential covariance at fixed hyperparameters.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.spatial.distance import cdist

from .classical import check_queries, deserialize_train, serialize_train
from .dataset import Dataset
from .evidence import LOG_2PI
from .exceptions import DimensionMismatchError, HyperparameterError
from .functions import init
from .laplacian import Prediction
from .linalg import jitter_cholesky, logdet

logger = init(__name__, logger_level=logging.INFO)

JITTER = 1e-10


@dataclass(frozen=True)
class SEHypers:
    """
    Hyperparameters of the covariance v0 exp(-1/2 sum_m l_m (x_i^m - x_j^m)^2) + v1 delta_ij.

    :param v0: vertical scale
    :param v1: noise variance
    :param lengthscales: inverse lengthscales l_m, one per input dimension
    """

    v0: float
    v1: float
    lengthscales: tuple[float, ...]

    def __post_init__(self) -> None:
        """
        :raise HyperparameterError: a hyperparameter is not strictly positive
        """
        lengthscales = tuple(float(value) for value in self.lengthscales)
        values = (self.v0, self.v1, *lengthscales)
        if not lengthscales or any(not np.isfinite(value) or value <= 0 for value in values):
            raise HyperparameterError(
                f"All covariance hyperparameters must be strictly positive, got {values}."
            )
        object.__setattr__(self, "v0", float(self.v0))
        object.__setattr__(self, "v1", float(self.v1))
        object.__setattr__(self, "lengthscales", lengthscales)

    def scale(self, d: int) -> npt.NDArray[np.float64]:
        """
        :param d: input dimension
        :raise DimensionMismatchError: number of lengthscales differs from d
        :return: per-dimension multiplier sqrt(l_m / 2) of the displacements
        """
        if len(self.lengthscales) != d:
            raise DimensionMismatchError(
                f"Got {len(self.lengthscales)} lengthscales for data of dimension d={d}."
            )
        return np.sqrt(np.asarray(self.lengthscales) / 2)

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized hyperparameters
        """
        return {"v0": self.v0, "v1": self.v1, "lengthscales": list(self.lengthscales)}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> SEHypers:
        r"""
        :param obj: serialized hyperparameters
        :param \**_kwargs: optional extra keyword arguments
        :return: the hyperparameters
        """
        return SEHypers(obj["v0"], obj["v1"], tuple(obj["lengthscales"]))


def se_covariance(
    x_i: npt.ArrayLike, x_j: npt.ArrayLike, hyp: SEHypers, same_index: bool
) -> float:
    """
    :param x_i: first input vector
    :param x_j: second input vector
    :param hyp: covariance hyperparameters
    :param same_index: whether both vectors are the same observation, which adds the noise term
    :raise DimensionMismatchError: the vectors differ in shape
    :return: the covariance
    """
    first = np.atleast_1d(np.asarray(x_i, dtype=np.float64))
    second = np.atleast_1d(np.asarray(x_j, dtype=np.float64))
    if first.shape != second.shape:
        raise DimensionMismatchError(f"Vectors of shapes {first.shape} and {second.shape}.")
    exponent = -0.5 * float(np.sum(np.asarray(hyp.lengthscales) * (first - second) ** 2))
    return hyp.v0 * float(np.exp(exponent)) + (hyp.v1 if same_index else 0.0)


def se_matrix(
    first: npt.NDArray[np.float64], second: npt.NDArray[np.float64], hyp: SEHypers
) -> npt.NDArray[np.float64]:
    """
    Noise-free covariances between two sets of inputs.

    :param first: m x d matrix
    :param second: n x d matrix
    :param hyp: covariance hyperparameters
    :return: m x n matrix
    """
    scale = hyp.scale(second.shape[1])
    return hyp.v0 * np.exp(-cdist(first * scale, second * scale, "sqeuclidean"))


class GPRModel:
    """
    Gaussian process regression model conditioned on a training set.
    """

    def __init__(self, train: Dataset, hyp: SEHypers) -> None:
        """
        Factorize the training covariance once; on failure the diagonal is jittered by
        1e-10 v0 and the factorization retried.

        :param train: training set
        :param hyp: covariance hyperparameters
        :raise NotPositiveDefiniteError: the covariance could not be factorized
        """
        hyp.scale(train.d)
        self.train = train
        self.hyp = hyp
        covariance = se_matrix(train.inputs, train.inputs, hyp) + hyp.v1 * np.eye(train.n)
        self.factor = jitter_cholesky(covariance, JITTER * hyp.v0, "covariance")
        self.alpha = scipy.linalg.cho_solve(self.factor, train.targets)

    @property
    def prior_variance(self) -> float:
        """
        :return: prior variance v0 + v1 of a new target
        """
        return self.hyp.v0 + self.hyp.v1

    def predict_distribution(
        self, queries: npt.ArrayLike
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """
        :param queries: m x d matrix of queries
        :return: predictive means and variances
        """
        matrix = check_queries(queries, self.train.d)
        cross = se_matrix(matrix, self.train.inputs, self.hyp)
        means = cross @ self.alpha
        if matrix.shape[0] == 0:
            return means, np.empty(0)
        solved = scipy.linalg.cho_solve(self.factor, cross.T)
        variances = self.prior_variance - np.sum(cross * solved.T, axis=1)
        if np.any(variances < 0):
            warnings.warn(
                f"Clamped {int(np.sum(variances < 0))} negative predictive variances to 0.",
                RuntimeWarning,
            )
            variances = np.maximum(variances, 0.0)
        return means, variances

    def predict(self, queries: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        :param queries: m x d matrix of queries
        :return: predictive means
        """
        matrix = check_queries(queries, self.train.d)
        return se_matrix(matrix, self.train.inputs, self.hyp) @ self.alpha

    def log_evidence(self) -> float:
        """
        :return: log marginal likelihood of the training targets
        """
        quadratic = float(self.train.targets @ self.alpha)
        return -0.5 * quadratic - 0.5 * logdet(self.factor) - 0.5 * self.train.n * LOG_2PI

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized model without the factorization
        """
        return serialize_train(self.train) | {"hyp": self.hyp}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> GPRModel:
        r"""
        :param obj: serialized model
        :param \**_kwargs: optional extra keyword arguments
        :return: the model, refactorized
        """
        return GPRModel(deserialize_train(obj), obj["hyp"])


def gpr_predict(x_new: npt.ArrayLike, data: Dataset, hyp: SEHypers) -> Prediction:
    """
    Predictive distribution k^T C^-1 y, kappa - k^T C^-1 k at a query.

    :param x_new: query vector
    :param data: training set
    :param hyp: covariance hyperparameters
    :raise NotPositiveDefiniteError: the covariance could not be factorized
    :return: the prediction
    """
    query = data.check_query(x_new)
    means, variances = GPRModel(data, hyp).predict_distribution(query[None, :])
    return Prediction(float(means[0]), float(variances[0]))


def gpr_log_evidence(data: Dataset, hyp: SEHypers) -> float:
    """
    -1/2 y^T C^-1 y - 1/2 log|C| - n/2 log 2 pi.

    :param data: training set
    :param hyp: covariance hyperparameters
    :raise NotPositiveDefiniteError: the covariance could not be factorized
    :return: the log marginal likelihood
    """
    return GPRModel(data, hyp).log_evidence()
