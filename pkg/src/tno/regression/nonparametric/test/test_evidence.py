"""
This module tests the log evidence, its gradient, the evidence ascent and the selection of k.
"""

from __future__ import annotations

import numpy as np
import pytest

from tno.regression.nonparametric.classical import PerDimBandwidth, SingleBandwidth
from tno.regression.nonparametric.config import GridConfig, OptimizerConfig
from tno.regression.nonparametric.dataset import Dataset, gen_sinc
from tno.regression.nonparametric.evidence import (
    LOG_2PI,
    HyperParams,
    bandwidth_evidence_curve,
    bandwidth_limits,
    best_index,
    evidence_ascent,
    evidence_gradient,
    laplacian_log_evidence,
    log_evidence,
    maximize_evidence,
    select_k,
)
from tno.regression.nonparametric.exceptions import HyperparameterError
from tno.regression.nonparametric.laplacian import (
    KernelWeights,
    LaplacianModel,
    MutualKnn,
)
from tno.regression.nonparametric.test.random_data import random_dataset


def test_log_evidence_single_point() -> None:
    """
    Tests the closed form for one point and a 1 x 1 precision.
    """
    sigma2, y = 0.3, 1.7
    expected = 0.5 * np.log(sigma2) - 0.5 * sigma2 * y**2 - 0.5 * LOG_2PI
    assert log_evidence(np.array([[sigma2]]), [y]) == pytest.approx(expected, rel=1e-14)


def test_log_evidence_identity() -> None:
    """
    Tests that zero targets under the identity precision in two dimensions give -log(2 pi).
    """
    assert log_evidence(np.eye(2), np.zeros(2)) == pytest.approx(-LOG_2PI, rel=1e-15)


def test_log_evidence_dense() -> None:
    """
    Tests the log evidence against a dense log determinant.
    """
    rng = np.random.default_rng(8)
    root = rng.standard_normal((5, 5))
    precision = root @ root.T + np.eye(5)
    y = rng.standard_normal(5)
    expected = 0.5 * np.linalg.slogdet(precision)[1] - 0.5 * y @ precision @ y - 2.5 * LOG_2PI
    assert log_evidence(precision, y) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "params",
    [
        HyperParams(1.5, 0.7, bandwidth=SingleBandwidth(0.8)),
        HyperParams(0.4, 1.2, bandwidth=PerDimBandwidth((0.5, 1.3))),
        HyperParams(2.0, 0.3, k=3),
    ],
)
def test_evidence_value_matches_dense(params: HyperParams, small_data: Dataset) -> None:
    """
    Tests that the evidence of the Laplacian process equals the dense evaluation.

    :param params: hyperparameters
    :param small_data: random two-dimensional data
    """
    model = LaplacianModel(small_data, params.spec(), params.sigma)
    expected = log_evidence(model.precision, small_data.targets)
    assert laplacian_log_evidence(small_data, params) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize(
    "params",
    [
        HyperParams(1.5, 0.7, bandwidth=SingleBandwidth(0.8)),
        HyperParams(0.4, 1.2, bandwidth=PerDimBandwidth((0.5, 1.3))),
        HyperParams(2.0, 0.3, k=3),
        HyperParams(1.5, 0.7, bandwidth=SingleBandwidth(0.8), fixed_sigma0=True),
        HyperParams(1.5, 0.7, bandwidth=PerDimBandwidth((0.6, 0.9)), fixed_bandwidth=True),
    ],
)
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_gradient_finite_differences(params: HyperParams, seed: int) -> None:
    """
    Tests the analytic gradient against central differences in the free log hyperparameters.

    :param params: hyperparameters
    :param seed: seed of the random data
    """
    data = random_dataset(seed, 9, 2)
    result = evidence_gradient(data, params)
    free = np.flatnonzero(np.logical_not(params.fixed_mask))
    assert result.gradient.shape == (free.size,)
    base = params.continuous()
    step = 1e-5
    for position, index in enumerate(free):
        offset = np.zeros_like(base)
        offset[index] = step
        upper = laplacian_log_evidence(data, params.with_continuous(base + offset))
        lower = laplacian_log_evidence(data, params.with_continuous(base - offset))
        numeric = (upper - lower) / (2 * step)
        assert result.gradient[position] == pytest.approx(numeric, rel=1e-5, abs=1e-6)


def test_gradient_on_sinc() -> None:
    """
    Tests the gradient at the sinc starting scales against central differences.
    """
    data = gen_sinc(-5.0, 5.0, 0.5)
    params = HyperParams(100.0, 1.0, bandwidth=SingleBandwidth(0.5))
    gradient = evidence_gradient(data, params).gradient
    base = params.continuous()
    for index in range(3):
        offset = np.zeros(3)
        offset[index] = 1e-6
        numeric = (
            laplacian_log_evidence(data, params.with_continuous(base + offset))
            - laplacian_log_evidence(data, params.with_continuous(base - offset))
        ) / 2e-6
        assert gradient[index] == pytest.approx(numeric, rel=1e-5, abs=1e-5)


def test_all_fixed_gives_empty_gradient(small_data: Dataset) -> None:
    """
    Tests that holding every hyperparameter fixed leaves an empty gradient.

    :param small_data: random two-dimensional data
    """
    params = HyperParams(1.0, 1.0, k=2, fixed_sigma0=True, fixed_sigma=True)
    assert evidence_gradient(small_data, params).gradient.size == 0


def test_hyperparams_validation() -> None:
    """
    Tests that invalid or inconsistent hyperparameters are refused.
    """
    with pytest.raises(HyperparameterError):
        HyperParams(0.0, 1.0, k=1)
    with pytest.raises(HyperparameterError):
        HyperParams(1.0, -1.0, k=1)
    with pytest.raises(HyperparameterError):
        HyperParams(1.0, 1.0, bandwidth=SingleBandwidth(1.0), k=1)
    with pytest.raises(HyperparameterError):
        HyperParams(1.0, 1.0).spec()
    assert HyperParams(2.0, 0.5, bandwidth=PerDimBandwidth((1.0, 3.0))).describe() == {
        "sigma0": 2.0,
        "sigma": 0.5,
        "bandwidth": [1.0, 3.0],
    }


def test_ascent_single_point() -> None:
    """
    Tests that the ascent for one point y = 2 finds the stationary point sigma = 1/2 of
    log(sigma) - 2 sigma^2.
    """
    data = Dataset([0.0], [2.0])
    initial = HyperParams(1.0, 2.0, k=1, fixed_sigma0=True)
    result = evidence_ascent(data, MutualKnn(1, 1.0), initial)
    assert result.converged
    assert result.params.sigma == pytest.approx(0.5, rel=1e-5)
    assert result.params.sigma0 == 1.0
    expected = np.log(0.5) - 0.5 - 0.5 * LOG_2PI
    assert result.log_evidence == pytest.approx(expected, rel=1e-9)


def test_ascent_without_iterations(small_data: Dataset) -> None:
    """
    Tests that an ascent capped at zero iterations returns the initial hyperparameters.

    :param small_data: random two-dimensional data
    """
    initial = HyperParams(1.0, 0.5, k=2)
    result = evidence_ascent(small_data, MutualKnn(2, 1.0), initial, OptimizerConfig(max_iter=0))
    assert result.params == initial
    assert result.iterations == 0
    assert result.trace == (result.log_evidence,)


def test_ascent_honors_fixed_parameters(small_data: Dataset) -> None:
    """
    Tests that fixed hyperparameters keep their values and that the evidence never decreases.

    :param small_data: random two-dimensional data
    """
    initial = HyperParams(
        1.5, 0.7, bandwidth=SingleBandwidth(0.8), fixed_bandwidth=True, fixed_sigma0=True
    )
    result = evidence_ascent(small_data, KernelWeights(SingleBandwidth(0.8), 1.5), initial)
    assert result.params.sigma0 == pytest.approx(1.5, rel=1e-14)
    assert isinstance(result.params.bandwidth, SingleBandwidth)
    assert result.params.bandwidth.h == pytest.approx(0.8, rel=1e-14)
    assert result.params.sigma != pytest.approx(0.7)
    assert np.all(np.diff(result.trace) >= 0)
    assert result.log_evidence == pytest.approx(laplacian_log_evidence(small_data, result.params))


def test_ascent_initial_bandwidth_from_grid(small_data: Dataset) -> None:
    """
    Tests that a missing initial bandwidth is taken from the grid and that the ascent improves
    on the grid value.

    :param small_data: random two-dimensional data
    """
    grid = GridConfig(0.1, 10.0, 9)
    curve = bandwidth_evidence_curve(small_data, list(grid.values()), 1.0, 1.0, multi=True)
    best = max(value for _, value in curve)
    template = KernelWeights(PerDimBandwidth((1.0, 1.0)), 1.0)
    initial = HyperParams(1.0, 1.0, fixed_sigma0=True)
    result = evidence_ascent(small_data, template, initial, grid=grid)
    assert isinstance(result.params.bandwidth, PerDimBandwidth)
    assert result.trace[0] == pytest.approx(best, rel=1e-12)
    assert result.log_evidence >= best


def test_maximize_evidence_keeps_stationary_point() -> None:
    """
    Tests that a start at the maximum (sigma = 1/2 for one point y = 2) is returned unchanged.
    """
    data = Dataset([0.0], [2.0])
    initial = HyperParams(1.0, 0.5, k=1, fixed_sigma0=True)
    assert maximize_evidence(data, MutualKnn(1, 1.0), initial) == initial
    result = evidence_ascent(data, MutualKnn(1, 1.0), initial)
    assert result.iterations == 0
    assert result.converged


def test_sinc_chain_evidence_maximum(sinc_two: Dataset) -> None:
    """
    Tests the maximum of the evidence over the scales of the nearest-neighbor chain of the
    sparse sinc data, and that restarting from it stays there.

    :param sinc_two: sparsely sampled sinc training set
    """
    initial = HyperParams(300.0, 3.0, k=1)
    result = evidence_ascent(sinc_two, MutualKnn(1, 300.0), initial)
    assert result.converged
    assert result.params.sigma0 == pytest.approx(11.2038, rel=1e-3)
    assert result.params.sigma == pytest.approx(1.69352, rel=1e-3)
    assert result.log_evidence == pytest.approx(0.127610, abs=1e-4)
    assert np.all(np.diff(result.trace) >= 0)

    restart = maximize_evidence(sinc_two, MutualKnn(1, 300.0), result.params)
    assert restart.sigma0 == pytest.approx(result.params.sigma0, rel=1e-4)
    assert restart.sigma == pytest.approx(result.params.sigma, rel=1e-4)


def test_bandwidth_limits() -> None:
    """
    Tests the bandwidth bounds: half the median nearest-neighbor distance ignoring duplicates,
    and a hundred times the largest distance.
    """
    inputs = np.array([[0.0], [1.0], [3.0], [7.0]])
    lower, upper = bandwidth_limits(inputs, OptimizerConfig(), floor=True)
    assert lower == pytest.approx(np.log(0.75), rel=1e-14)
    assert upper == pytest.approx(np.log(700.0), rel=1e-14)
    assert bandwidth_limits(inputs, OptimizerConfig(), floor=False) == (None, upper)
    lower, _ = bandwidth_limits(np.array([[0.0], [0.0], [2.0]]), OptimizerConfig(), floor=True)
    assert lower == pytest.approx(0.0, abs=1e-15)
    assert bandwidth_limits(np.array([[1.0, 2.0]]), OptimizerConfig(), floor=True) == (None, None)


def test_kernel_evidence_stops_at_bandwidth_floor(sinc_one: Dataset, sinc_test: Dataset) -> None:
    """
    Tests that with sigma0 free the bandwidth on the dense sinc data stays above half the input
    spacing and that the resulting Bayesian kernel regression has test error at most 1e-4.

    :param sinc_one: densely sampled sinc training set
    :param sinc_test: sinc test grid
    """
    template = KernelWeights(SingleBandwidth(1.0), 100.0)
    params = maximize_evidence(sinc_one, template, HyperParams(100.0, 1.0))
    assert isinstance(params.bandwidth, SingleBandwidth)
    assert params.bandwidth.h >= 0.1 * (1 - 1e-9)
    model = LaplacianModel(sinc_one, params.spec(), params.sigma)
    assert np.mean((model.predict(sinc_test.inputs) - sinc_test.targets) ** 2) <= 1e-4


def test_sinc_evidence_curve_has_interior_maximum() -> None:
    """
    Tests that on the dense sinc data the evidence over the bandwidth grid peaks in the
    interior.
    """
    data = gen_sinc(-5.0, 5.0, 0.2)
    curve = bandwidth_evidence_curve(data, list(GridConfig().values()), 100.0, 1.0)
    values = [value for _, value in curve]
    assert 0 < best_index(values, maximize=True) < len(values) - 1


def test_sinc_k_evidence_has_interior_maximum(sinc_one: Dataset) -> None:
    """
    Tests that on the dense sinc data the evidence over k, with optimized scales, peaks at
    k = 2 and falls off on both sides.

    :param sinc_one: densely sampled sinc training set
    """
    selection = select_k(sinc_one, range(1, 31), 300.0, 3.0, optimize_scales=True)
    values = dict(selection.trace)
    assert selection.k == 2
    assert values[1] < values[2]
    assert all(values[k + 1] < values[k] for k in range(2, 12))


def test_best_index_prefers_earliest() -> None:
    """
    Tests that ties go to the earliest candidate.
    """
    assert best_index([1.0, 3.0, 3.0], maximize=True) == 1
    assert best_index([2.0, 1.0, 1.0], maximize=False) == 1


def test_select_k(small_data: Dataset) -> None:
    """
    Tests that the selected k has the largest log evidence in the trace.

    :param small_data: random two-dimensional data
    """
    selection = select_k(small_data, range(1, 8), 1.0, 0.5)
    ks = [k for k, _ in selection.trace]
    values = [value for _, value in selection.trace]
    assert ks == list(range(1, 8))
    assert selection.k == ks[best_index(values, maximize=True)]
    assert selection.log_evidence == max(values)
    assert (selection.sigma0, selection.sigma) == (1.0, 0.5)


def test_select_k_singleton_and_invalid(small_data: Dataset) -> None:
    """
    Tests a single candidate and the refusal of empty or out-of-range candidates.

    :param small_data: random two-dimensional data
    """
    assert select_k(small_data, [4], 1.0, 0.5).k == 4
    with pytest.raises(HyperparameterError):
        select_k(small_data, [], 1.0, 0.5)
    with pytest.raises(HyperparameterError):
        select_k(small_data, [small_data.n], 1.0, 0.5)


def test_select_k_with_optimized_scales(small_data: Dataset) -> None:
    """
    Tests that optimizing the scales per k never lowers the evidence of that k.

    :param small_data: random two-dimensional data
    """
    fixed = select_k(small_data, [2, 3], 1.0, 0.5)
    optimized = select_k(small_data, [2, 3], 1.0, 0.5, optimize_scales=True)
    for (_, before), (_, after) in zip(fixed.trace, optimized.trace):
        assert after >= before
