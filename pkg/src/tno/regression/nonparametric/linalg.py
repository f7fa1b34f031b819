"""
Dense symmetric positive-definite linear algebra shared by the Laplacian and GPR models.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from .exceptions import NotPositiveDefiniteError
from .functions import init

logger = init(__name__, logger_level=logging.INFO)

CholeskyFactor = tuple[npt.NDArray[np.float64], bool]


def cholesky(matrix: npt.NDArray[np.float64], what: str = "matrix") -> CholeskyFactor:
    """
    Lower triangular factorization of a symmetric positive-definite matrix.

    :param matrix: n x n symmetric matrix
    :param what: description of the matrix used in the error message
    :raise NotPositiveDefiniteError: the factorization failed
    :return: factor in the format of scipy.linalg.cho_factor
    """
    try:
        factor = scipy.linalg.cho_factor(matrix, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exception:
        raise NotPositiveDefiniteError(
            f"Cholesky factorization of the {what} failed."
        ) from exception
    return factor


def jitter_cholesky(
    matrix: npt.NDArray[np.float64], jitter: float, what: str = "matrix"
) -> CholeskyFactor:
    """
    Factorize, and on failure retry exactly once with jitter added to the diagonal.

    :param matrix: n x n symmetric matrix
    :param jitter: value added to the diagonal for the retry
    :param what: description of the matrix used in the error message
    :raise NotPositiveDefiniteError: the jittered matrix could not be factorized either
    :return: factor in the format of scipy.linalg.cho_factor
    """
    try:
        return cholesky(matrix, what)
    except NotPositiveDefiniteError:
        logger.debug(f"Factorization of the {what} failed, retrying with jitter {jitter:g}")
    jittered = matrix + jitter * np.eye(matrix.shape[0])
    try:
        return cholesky(jittered, what)
    except NotPositiveDefiniteError as exception:
        raise NotPositiveDefiniteError(
            f"Cholesky factorization of the {what} failed, also with jitter {jitter:g}."
        ) from exception


def logdet(factor: CholeskyFactor) -> float:
    """
    Log determinant from a Cholesky factor.

    :param factor: factor returned by cholesky
    :return: twice the sum of the log diagonal of the factor
    """
    return float(2 * np.sum(np.log(np.diag(factor[0]))))


def laplacian(weights: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """
    Combinatorial Laplacian D - W. The diagonal of W does not contribute.

    :param weights: n x n symmetric nonnegative weight matrix
    :return: n x n Laplacian
    """
    offdiagonal = weights.copy()
    np.fill_diagonal(offdiagonal, 0.0)
    return np.diag(offdiagonal.sum(axis=1)) - offdiagonal


def laplacian_quadratic(weights: npt.NDArray[np.float64], y: npt.NDArray[np.float64]) -> float:
    """
    y^T (D - W) y evaluated as half the weighted sum of squared target differences.

    :param weights: n x n symmetric weight matrix
    :param y: length-n vector
    :return: nonnegative quadratic form
    """
    differences = y[:, None] - y[None, :]
    offdiagonal = weights.copy()
    np.fill_diagonal(offdiagonal, 0.0)
    return float(0.5 * np.sum(offdiagonal * differences**2))


@dataclass(frozen=True, eq=False)
class LaplacianFactor:
    """
    Factorization of a precision matrix L + sigma^2 I with L a graph Laplacian.

    Every connected component of the graph adds an exact null vector to L, which leaves
    L + sigma^2 I with eigenvalues equal to sigma^2. For very small sigma^2 these are lost in
    rounding, so the factorization works on M = L + sigma^2 I + c sum_b e_b e_b^T with e_b the
    normalized indicator of component b. The e_b are eigenvectors of M with eigenvalue
    sigma^2 + c, which makes the corrections to the log determinant and the inverse explicit.

    :param factor: Cholesky factor of M
    :param sigma2: the ridge sigma^2
    :param shift: the constant c
    :param labels: component label of every node
    :param components: number of connected components
    """

    factor: CholeskyFactor
    sigma2: float
    shift: float
    labels: npt.NDArray[np.int_]
    components: int

    @classmethod
    def from_weights(cls, weights: npt.NDArray[np.float64], sigma2: float) -> LaplacianFactor:
        """
        :param weights: n x n symmetric nonnegative weight matrix
        :param sigma2: strictly positive ridge
        :raise NotPositiveDefiniteError: the deflated matrix could not be factorized
        :return: the factorization
        """
        n = weights.shape[0]
        lap = laplacian(weights)
        components, labels = connected_components(weights > 0, directed=False)
        degree = float(np.trace(lap)) / n
        shift = degree if degree > 0 else 1.0
        indicator = np.zeros((n, components))
        indicator[np.arange(n), labels] = 1.0
        indicator /= np.sqrt(indicator.sum(axis=0))
        deflated = lap + sigma2 * np.eye(n) + shift * indicator @ indicator.T
        try:
            factor = cholesky(deflated, "precision")
        except NotPositiveDefiniteError as exception:
            raise NotPositiveDefiniteError(
                f"Cholesky factorization of the precision failed at sigma^2={sigma2:g}."
            ) from exception
        return cls(factor, sigma2, shift, labels, components)

    @property
    def n(self) -> int:
        """
        :return: matrix size
        """
        return int(self.factor[0].shape[0])

    def logdet(self) -> float:
        """
        :return: log determinant of L + sigma^2 I
        """
        correction = np.log(self.sigma2) - np.log(self.sigma2 + self.shift)
        return logdet(self.factor) + self.components * float(correction)

    def deflated_inverse(self) -> npt.NDArray[np.float64]:
        """
        :return: inverse of M, which agrees with the inverse of L + sigma^2 I on every vector
            orthogonal to the component indicators
        """
        return scipy.linalg.cho_solve(self.factor, np.eye(self.n))

    def inverse_trace(self, deflated: npt.NDArray[np.float64] | None = None) -> float:
        """
        :param deflated: optionally the precomputed inverse of M
        :return: trace of the inverse of L + sigma^2 I
        """
        if deflated is None:
            deflated = self.deflated_inverse()
        correction = 1 / self.sigma2 - 1 / (self.sigma2 + self.shift)
        return float(np.trace(deflated)) + self.components * correction


def laplacian_trace(
    deflated_inverse: npt.NDArray[np.float64], weight_derivative: npt.NDArray[np.float64]
) -> float:
    """
    tr(A dL) for a Laplacian-shaped derivative dL = diag(row sums of dW) - dW, written as
    half the sum of dW_ij (A_ii + A_jj - 2 A_ij).

    :param deflated_inverse: symmetric n x n matrix A
    :param weight_derivative: symmetric n x n derivative of the weight matrix
    :return: the trace
    """
    diagonal = np.diag(deflated_inverse)
    resistance = diagonal[:, None] + diagonal[None, :] - 2 * deflated_inverse
    offdiagonal = weight_derivative.copy()
    np.fill_diagonal(offdiagonal, 0.0)
    return float(0.5 * np.sum(offdiagonal * resistance))
