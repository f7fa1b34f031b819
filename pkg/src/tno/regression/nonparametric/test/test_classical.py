"""
This module tests kernel, k-NN and mutual k-NN regression and their neighbor searches.
"""

from __future__ import annotations

import numpy as np
import pytest

from tno.regression.nonparametric.classical import (
    KernelRegressor,
    KnnRegressor,
    MknnRegressor,
    PerDimBandwidth,
    SingleBandwidth,
    bandwidth_from_values,
    gaussian_kernel,
    kernel_regress,
    kernel_weights,
    knn_indices,
    knn_regress,
    mknn_regress,
    mutual_neighbors,
)
from tno.regression.nonparametric.dataset import Dataset
from tno.regression.nonparametric.exceptions import DimensionMismatchError, HyperparameterError
from tno.regression.nonparametric.test.random_data import random_dataset


@pytest.mark.parametrize(
    "z, expected", [([0.0, 0.0], 1.0), ([1.0], np.exp(-1)), ([1.0, 1.0], np.exp(-2))]
)
def test_gaussian_kernel(z: list[float], expected: float) -> None:
    """
    Tests the Gaussian kernel at a few displacements.

    :param z: displacement
    :param expected: expected kernel value
    """
    assert gaussian_kernel(z) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("h", [0.0, -1.0, float("nan"), float("inf")])
def test_bandwidth_must_be_positive(h: float) -> None:
    """
    Tests that invalid bandwidths are refused.

    :param h: bandwidth
    """
    with pytest.raises(HyperparameterError):
        SingleBandwidth(h)
    with pytest.raises(HyperparameterError):
        PerDimBandwidth((1.0, h))


def test_per_dimension_bandwidth_dimension() -> None:
    """
    Tests that the number of bandwidths must match the data dimension.
    """
    data = Dataset(np.zeros((2, 2)), [0.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        KernelRegressor(data, PerDimBandwidth((1.0, 1.0, 1.0)))


def test_bandwidth_from_values() -> None:
    """
    Tests building the bandwidth specification from plain values.
    """
    assert bandwidth_from_values([0.5], multi=False) == SingleBandwidth(0.5)
    assert bandwidth_from_values([0.5], multi=True) == PerDimBandwidth((0.5,))
    assert bandwidth_from_values([0.5, 2.0], multi=False) == PerDimBandwidth((0.5, 2.0))


def test_kernel_weights() -> None:
    """
    Tests the weights at a training input and at a displacement equal to the bandwidth.
    """
    data = Dataset([0.0, 2.0], [1.0, 2.0])
    weights = kernel_weights(0.0, data, SingleBandwidth(2.0))
    assert weights[0] == 1.0
    assert weights[1] == pytest.approx(np.exp(-1), rel=1e-15)


def test_single_and_per_dimension_agree(small_data: Dataset) -> None:
    """
    Tests that a shared bandwidth and equal per-dimension bandwidths give identical estimates.

    :param small_data: random two-dimensional data
    """
    query = [0.3, -0.7]
    single = kernel_weights(query, small_data, SingleBandwidth(0.8))
    per_dim = kernel_weights(query, small_data, PerDimBandwidth((0.8, 0.8)))
    np.testing.assert_array_equal(single, per_dim)
    assert kernel_regress(query, small_data, SingleBandwidth(0.8)) == kernel_regress(
        query, small_data, PerDimBandwidth((0.8, 0.8))
    )


def test_kernel_regress_edge_cases() -> None:
    """
    Tests a single training point, constant targets and underflowing weights.
    """
    single = Dataset([1.0], [3.5])
    assert kernel_regress(-4.0, single, SingleBandwidth(0.7)) == 3.5
    constant = Dataset([0.0, 1.0, 2.0], [2.0, 2.0, 2.0])
    assert kernel_regress(0.4, constant, SingleBandwidth(0.3)) == pytest.approx(2.0)
    assert kernel_regress(1000.0, constant, SingleBandwidth(0.01)) == 0.0


def test_kernel_regress_within_target_range(small_data: Dataset) -> None:
    """
    Tests that the kernel estimate is a convex combination of the targets.

    :param small_data: random two-dimensional data
    """
    rng = np.random.default_rng(5)
    for query in rng.uniform(-2, 2, size=(20, 2)):
        estimate = kernel_regress(query, small_data, SingleBandwidth(0.5))
        assert small_data.targets.min() - 1e-12 <= estimate <= small_data.targets.max() + 1e-12


def test_knn_indices() -> None:
    """
    Tests the neighbor order, a query on a data point and the tie rule.
    """
    data = Dataset([0.0, 1.0, 3.0], [0.0, 1.0, 9.0])
    neighbors = knn_indices(0.9, data, 2)
    np.testing.assert_array_equal(neighbors.indices, [1, 0])
    np.testing.assert_allclose(neighbors.distances, [0.1, 0.9])
    np.testing.assert_array_equal(knn_indices(3.0, data, 1).indices, [2])
    tied = Dataset([2.0, 0.0, 1.0], [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(knn_indices(1.0, tied, 3).indices, [2, 0, 1])


def test_knn_indices_exclude() -> None:
    """
    Tests that an excluded point is never selected and reduces the admissible k.
    """
    data = Dataset([0.0, 1.0, 3.0], [0.0, 1.0, 9.0])
    np.testing.assert_array_equal(knn_indices(0.9, data, 2, exclude=1).indices, [0, 2])
    with pytest.raises(HyperparameterError):
        knn_indices(0.9, data, 3, exclude=1)


@pytest.mark.parametrize("k", [0, 4])
def test_k_out_of_range(k: int) -> None:
    """
    Tests that k outside [1, n] is refused by every neighbor estimator.

    :param k: number of neighbors
    """
    data = Dataset([0.0, 1.0, 3.0], [0.0, 1.0, 9.0])
    with pytest.raises(HyperparameterError):
        knn_regress(0.5, data, k)
    with pytest.raises(HyperparameterError):
        mknn_regress(0.5, data, k)
    with pytest.raises(HyperparameterError):
        KnnRegressor(data, k)


def test_knn_regress() -> None:
    """
    Tests the k-NN estimate for an enumerated case and for k = n.
    """
    data = Dataset([0.0, 1.0, 3.0], [0.0, 1.0, 9.0])
    assert knn_regress(0.9, data, 2) == 0.5
    assert knn_regress(0.9, data, 3) == pytest.approx(10 / 3)


def test_knn_neighbors_grow_with_k(small_data: Dataset) -> None:
    """
    Tests that the k nearest neighbors are contained in the k + 1 nearest neighbors.

    :param small_data: random two-dimensional data
    """
    query = [0.1, 0.2]
    for k in range(1, small_data.n):
        smaller = set(knn_indices(query, small_data, k).indices)
        assert smaller <= set(knn_indices(query, small_data, k + 1).indices)


def test_mutual_neighbors_examples() -> None:
    """
    Tests mutual neighbors: a mutual pair, an empty set and the saturated set for k = n.
    """
    pair = Dataset([0.0, 1.0], [2.0, 4.0])
    np.testing.assert_array_equal(mutual_neighbors(0.4, pair, 1).indices, [0])
    assert mknn_regress(0.4, pair, 1) == 2.0

    close = Dataset([0.0, 0.1], [2.0, 4.0])
    assert len(mutual_neighbors(10.0, close, 1)) == 0
    assert mknn_regress(10.0, close, 1) == 0.0

    data = Dataset([0.0, 1.0, 3.0, 7.0], [1.0, 2.0, 3.0, 4.0])
    assert sorted(mutual_neighbors(20.0, data, 4).indices) == [0, 1, 2, 3]


def test_mutual_neighbors_subset_of_neighbors(small_data: Dataset) -> None:
    """
    Tests that the mutual neighbors are a subset of the k nearest neighbors.

    :param small_data: random two-dimensional data
    """
    rng = np.random.default_rng(11)
    for query in rng.uniform(-2, 2, size=(10, 2)):
        for k in (1, 3, 6):
            mutual = set(mutual_neighbors(query, small_data, k).indices)
            assert mutual <= set(knn_indices(query, small_data, k).indices)
            assert len(mutual) <= k


def test_estimates_within_target_range(small_data: Dataset) -> None:
    """
    Tests that k-NN and nonempty mutual k-NN estimates are averages of targets.

    :param small_data: random two-dimensional data
    """
    low, high = small_data.targets.min(), small_data.targets.max()
    rng = np.random.default_rng(13)
    for query in rng.uniform(-2, 2, size=(10, 2)):
        assert low <= knn_regress(query, small_data, 3) <= high
        if len(mutual_neighbors(query, small_data, 3)):
            assert low <= mknn_regress(query, small_data, 3) <= high


def test_permutation_invariance() -> None:
    """
    Tests that relabeling the training points does not change any estimate.
    """
    data = random_dataset(21, 15, 2)
    permutation = np.random.default_rng(1).permutation(data.n)
    shuffled = data.subset(permutation)
    query = [0.25, -0.5]
    assert kernel_regress(query, data, SingleBandwidth(0.6)) == pytest.approx(
        kernel_regress(query, shuffled, SingleBandwidth(0.6)), rel=1e-12
    )
    assert knn_regress(query, data, 4) == pytest.approx(knn_regress(query, shuffled, 4))
    assert mknn_regress(query, data, 4) == pytest.approx(mknn_regress(query, shuffled, 4))


def test_regressors_match_pointwise_estimates(small_data: Dataset) -> None:
    """
    Tests that the fitted estimators agree with the estimates at a single query.

    :param small_data: random two-dimensional data
    """
    queries = np.random.default_rng(17).uniform(-2, 2, size=(8, 2))
    bandwidth = PerDimBandwidth((0.4, 0.9))
    np.testing.assert_allclose(
        KernelRegressor(small_data, bandwidth).predict(queries),
        [kernel_regress(query, small_data, bandwidth) for query in queries],
        rtol=1e-12,
    )
    np.testing.assert_array_equal(
        KnnRegressor(small_data, 3).predict(queries),
        [knn_regress(query, small_data, 3) for query in queries],
    )
    np.testing.assert_array_equal(
        MknnRegressor(small_data, 3).predict(queries),
        [mknn_regress(query, small_data, 3) for query in queries],
    )


def test_regressor_query_dimension(small_data: Dataset) -> None:
    """
    Tests that queries of the wrong dimension are refused and no queries give no estimates.

    :param small_data: random two-dimensional data
    """
    regressor = KnnRegressor(small_data, 2)
    with pytest.raises(DimensionMismatchError):
        regressor.predict(np.zeros((3, 3)))
    assert regressor.predict(np.empty((0, 2))).shape == (0,)
