"""
Log marginal likelihood (evidence) of the Laplacian Gaussian process, its gradient with respect
to the log hyperparameters, evidence maximization and evidence-based selection of k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .classical import BandwidthSpec, PerDimBandwidth, SingleBandwidth, pairwise_distances
from .config import GridConfig, OptimizerConfig
from .dataset import Dataset
from .exceptions import HyperparameterError, NotPositiveDefiniteError
from .functions import init, map_in_executor
from .laplacian import KernelWeights, MutualKnn, WeightSpec, build_weight_matrix
from .linalg import LaplacianFactor, cholesky, laplacian_quadratic, laplacian_trace, logdet

logger = init(__name__, logger_level=logging.INFO)

LOG_2PI = float(np.log(2 * np.pi))


@dataclass(frozen=True)
class HyperParams:
    """
    Hyperparameters of a Laplacian Gaussian process.

    The continuous block is ordered as the bandwidth(s), sigma0 and sigma and is optimized in
    log space. At most one of bandwidth (kernel weights) and k (mutual k-NN weights) is set;
    with neither, the weight rule is left to the caller.
    """

    sigma0: float
    sigma: float
    bandwidth: BandwidthSpec | None = None
    k: int | None = None
    fixed_bandwidth: bool = False
    fixed_sigma0: bool = False
    fixed_sigma: bool = False

    def __post_init__(self) -> None:
        """
        :raise HyperparameterError: invalid or inconsistent hyperparameters
        """
        for name in ("sigma0", "sigma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise HyperparameterError(f"{name} must be strictly positive, got {value}.")
            object.__setattr__(self, name, float(value))
        if self.bandwidth is not None and self.k is not None:
            raise HyperparameterError("A bandwidth and k cannot both be given.")
        if self.k is not None and self.k < 1:
            raise HyperparameterError(f"k must be at least 1, got {self.k}.")

    @property
    def fixed_mask(self) -> tuple[bool, ...]:
        """
        :return: per continuous parameter, whether it is held fixed
        """
        bandwidths = len(self.bandwidth.values) if self.bandwidth is not None else 0
        return (self.fixed_bandwidth,) * bandwidths + (self.fixed_sigma0, self.fixed_sigma)

    def continuous(self) -> npt.NDArray[np.float64]:
        """
        :return: the log of the continuous parameters
        """
        bandwidths = self.bandwidth.values if self.bandwidth is not None else ()
        return np.log(np.array([*bandwidths, self.sigma0, self.sigma]))

    def with_continuous(self, values: npt.NDArray[np.float64]) -> HyperParams:
        """
        :param values: log of the continuous parameters
        :return: copy of these hyperparameters at the given values
        """
        exponentiated = np.exp(values)
        bandwidth: BandwidthSpec | None = None
        if isinstance(self.bandwidth, SingleBandwidth):
            bandwidth = SingleBandwidth(float(exponentiated[0]))
        elif isinstance(self.bandwidth, PerDimBandwidth):
            bandwidth = PerDimBandwidth(tuple(exponentiated[:-2]))
        return replace(
            self,
            bandwidth=bandwidth,
            sigma0=float(exponentiated[-2]),
            sigma=float(exponentiated[-1]),
        )

    def spec(self) -> WeightSpec:
        """
        :raise HyperparameterError: neither a bandwidth nor k is set
        :return: the weight rule at these hyperparameters
        """
        if self.bandwidth is not None:
            return KernelWeights(self.bandwidth, self.sigma0)
        if self.k is None:
            raise HyperparameterError("Neither a bandwidth nor k is set.")
        return MutualKnn(self.k, self.sigma0)

    def describe(self) -> dict[str, object]:
        """
        :return: plain dictionary of the hyperparameter values
        """
        result: dict[str, object] = {"sigma0": self.sigma0, "sigma": self.sigma}
        if isinstance(self.bandwidth, SingleBandwidth):
            result["bandwidth"] = self.bandwidth.h
        elif isinstance(self.bandwidth, PerDimBandwidth):
            result["bandwidth"] = list(self.bandwidth.h)
        if self.k is not None:
            result["k"] = self.k
        return result


@dataclass(frozen=True, eq=False)
class EvidenceResult:
    """
    Log evidence and its gradient with respect to the free log hyperparameters.
    """

    log_evidence: float
    gradient: npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class AscentResult:
    """
    Outcome of an evidence maximization.

    :param params: final hyperparameters
    :param log_evidence: log evidence at params
    :param trace: log evidence after every iteration, starting with the initial value
    :param iterations: number of iterations
    :param converged: whether the optimizer reported convergence
    """

    params: HyperParams
    log_evidence: float
    trace: tuple[float, ...]
    iterations: int
    converged: bool


@dataclass(frozen=True)
class KSelection:
    """
    Evidence-selected number of neighbors.

    :param k: selected k
    :param log_evidence: log evidence at the selected k
    :param sigma0: sigma0 at the selected k
    :param sigma: sigma at the selected k
    :param trace: (k, log evidence) for every candidate, in increasing k
    """

    k: int
    log_evidence: float
    sigma0: float
    sigma: float
    trace: tuple[tuple[int, float], ...] = field(default=())


def log_evidence(precision: npt.NDArray[np.float64], y: npt.ArrayLike) -> float:
    """
    Log marginal likelihood of targets under a zero-mean Gaussian with the given precision:
    1/2 log|C| - 1/2 y^T C y - n/2 log 2 pi.

    :param precision: n x n symmetric positive-definite precision C
    :param y: length-n targets
    :raise NotPositiveDefiniteError: the precision could not be factorized
    :return: the log evidence
    """
    targets = np.asarray(y, dtype=np.float64)
    factor = cholesky(precision, "precision")
    quadratic = float(targets @ precision @ targets)
    return 0.5 * logdet(factor) - 0.5 * quadratic - 0.5 * targets.size * LOG_2PI


def _bandwidth_derivatives(
    inputs: npt.NDArray[np.float64], weights: npt.NDArray[np.float64], bandwidth: BandwidthSpec
) -> list[npt.NDArray[np.float64]]:
    """
    Derivatives of the kernel weights with respect to every log bandwidth.

    :param inputs: n x d training inputs
    :param weights: kernel weight matrix
    :param bandwidth: bandwidth specification
    :return: one n x n matrix per bandwidth
    """
    scaled = inputs / bandwidth.scale(inputs.shape[1])
    if isinstance(bandwidth, SingleBandwidth):
        return [2 * weights * cdist(scaled, scaled, "sqeuclidean")]
    return [
        2 * weights * (scaled[:, m, None] - scaled[None, :, m]) ** 2
        for m in range(scaled.shape[1])
    ]


def evidence_gradient(data: Dataset, params: HyperParams) -> EvidenceResult:
    """
    Log evidence of the Laplacian Gaussian process at the given hyperparameters and its
    gradient with respect to the free log hyperparameters.

    Every component is 1/2 tr(C^-1 dC) - 1/2 y^T dC y. The precision C is factorized once;
    the traces follow from triangular solves against that factor.

    :param data: training set
    :param params: hyperparameters, the fixed ones are left out of the gradient
    :raise NotPositiveDefiniteError: the precision could not be factorized
    :return: log evidence and gradient
    """
    y = data.targets
    sigma2 = params.sigma**2
    weights = build_weight_matrix(data, params.spec())
    factor = LaplacianFactor.from_weights(weights, sigma2)
    squared = float(y @ y)
    quadratic = laplacian_quadratic(weights, y)
    value = 0.5 * factor.logdet() - 0.5 * (quadratic + sigma2 * squared) - 0.5 * data.n * LOG_2PI

    mask = np.logical_not(params.fixed_mask)
    if not mask.any():
        return EvidenceResult(value, np.empty(0))
    inverse = factor.deflated_inverse()
    derivatives = (
        _bandwidth_derivatives(data.inputs, weights, params.bandwidth)
        if params.bandwidth is not None
        else []
    )
    gradient = [
        0.5 * laplacian_trace(inverse, derivative) - 0.5 * laplacian_quadratic(derivative, y)
        for derivative in derivatives
    ]
    gradient.append(0.5 * laplacian_trace(inverse, weights) - 0.5 * quadratic)
    gradient.append(sigma2 * (factor.inverse_trace(inverse) - squared))
    return EvidenceResult(value, np.asarray(gradient)[mask])


def laplacian_log_evidence(data: Dataset, params: HyperParams) -> float:
    """
    :param data: training set
    :param params: hyperparameters
    :raise NotPositiveDefiniteError: the precision could not be factorized
    :return: log evidence at the given hyperparameters
    """
    frozen = replace(params, fixed_bandwidth=True, fixed_sigma0=True, fixed_sigma=True)
    return evidence_gradient(data, frozen).log_evidence


def bandwidth_limits(
    inputs: npt.NDArray[np.float64], config: OptimizerConfig, floor: bool
) -> tuple[float | None, float | None]:
    """
    Log bounds of every bandwidth searched by the evidence maximization.

    With sigma0 free, shrinking the bandwidth while sigma0 grows tends to the nearest-neighbor
    graph, along which the evidence keeps creeping up. The lower bound then is a fraction of
    the median nearest-neighbor distance (duplicates left out). The upper bound is a multiple
    of the largest distance.

    :param inputs: n x d training inputs
    :param config: optimizer settings
    :param floor: whether to bound the bandwidths from below
    :return: lower and upper bound of the log bandwidth, None where unbounded
    """
    if inputs.shape[0] < 2:
        return None, None
    distances = pairwise_distances(inputs)
    diameter = float(distances[np.isfinite(distances)].max())
    upper = float(np.log(config.bandwidth_ceiling * diameter)) if diameter > 0 else None
    nearest = distances.min(axis=1)
    nearest = nearest[nearest > 0]
    if not floor or config.bandwidth_floor <= 0 or nearest.size == 0:
        return None, upper
    return float(np.log(config.bandwidth_floor * np.median(nearest))), upper


def search_bounds(
    data: Dataset, params: HyperParams, config: OptimizerConfig
) -> list[tuple[float | None, float | None]]:
    """
    :param data: training set
    :param params: starting hyperparameters
    :param config: optimizer settings
    :return: bounds of every log hyperparameter, in the order of HyperParams.continuous
    """
    spread = float(np.log(config.scale_range))
    bounds: list[tuple[float | None, float | None]] = [
        (value - spread, value + spread) for value in params.continuous()[-2:]
    ]
    if params.bandwidth is None:
        return bounds
    limits = bandwidth_limits(data.inputs, config, floor=not params.fixed_sigma0)
    return [limits] * len(params.bandwidth.values) + bounds


def _clip(
    values: npt.NDArray[np.float64], bounds: Sequence[tuple[float | None, float | None]]
) -> npt.NDArray[np.float64]:
    """
    :param values: log hyperparameters
    :param bounds: bounds per entry, None where unbounded
    :return: the values moved into the bounds
    """
    lower = [-np.inf if low is None else low for low, _ in bounds]
    upper = [np.inf if high is None else high for _, high in bounds]
    return np.clip(values, lower, upper)


def bandwidth_candidate(h: float, d: int, multi: bool) -> BandwidthSpec:
    """
    :param h: bandwidth value
    :param d: input dimension
    :param multi: whether every dimension gets its own (equal) bandwidth
    :return: bandwidth specification
    """
    return PerDimBandwidth((h,) * d) if multi else SingleBandwidth(h)


def _evidence_or_minus_inf(data: Dataset, params: HyperParams) -> float:
    """
    :param data: training set
    :param params: hyperparameters
    :return: log evidence, or minus infinity if the precision cannot be factorized
    """
    try:
        return laplacian_log_evidence(data, params)
    except NotPositiveDefiniteError:
        return -np.inf


def bandwidth_evidence_curve(
    data: Dataset,
    grid: Sequence[float],
    sigma0: float,
    sigma: float,
    multi: bool = False,
    workers: int = 1,
) -> list[tuple[float, float]]:
    """
    Log evidence over a grid of bandwidths at fixed scales.

    :param data: training set
    :param grid: candidate bandwidths
    :param sigma0: weight scale
    :param sigma: noise scale
    :param multi: use the bandwidth for every dimension separately
    :param workers: number of concurrent evaluations
    :raise HyperparameterError: empty grid
    :return: (bandwidth, log evidence) per grid point, in grid order
    """
    if len(grid) == 0:
        raise HyperparameterError("The bandwidth grid is empty.")
    candidates = [
        HyperParams(sigma0, sigma, bandwidth=bandwidth_candidate(h, data.d, multi)) for h in grid
    ]
    values = map_in_executor(partial(_evidence_or_minus_inf, data), candidates, workers)
    return [(float(h), float(value)) for h, value in zip(grid, values)]


def best_index(scores: Sequence[float], maximize: bool) -> int:
    """
    Index of the best score; the earliest wins ties.

    :param scores: scores in candidate order
    :param maximize: whether larger is better
    :return: index of the best score
    """
    values = np.asarray(scores, dtype=np.float64)
    return int(np.argmax(values) if maximize else np.argmin(values))


def evidence_ascent(
    data: Dataset,
    template: WeightSpec,
    initial: HyperParams,
    config: OptimizerConfig = OptimizerConfig(),
    grid: GridConfig = GridConfig(),
) -> AscentResult:
    """
    Maximize the log evidence over the free continuous hyperparameters: L-BFGS-B on the negative
    log evidence and its analytic gradient, within search_bounds.

    The weight family (and for kernel weights the bandwidth scheme) follows the template.
    Without an initial bandwidth the search starts from the evidence-best point of the
    bandwidth grid, restricted to the bandwidth bounds, at the initial scales. A starting point
    outside the bounds is moved onto them.

    :param data: training set
    :param template: weight rule fixing the family and, for mutual weights, the default k
    :param initial: initial hyperparameters and fixed flags
    :param config: optimizer settings
    :param grid: grid for the initial bandwidth
    :raise NotPositiveDefiniteError: the precision cannot be factorized at the start
    :return: the search outcome
    """
    start = initial
    if isinstance(template, KernelWeights):
        if start.bandwidth is None:
            multi = isinstance(template.bandwidth, PerDimBandwidth)
            lower, upper = bandwidth_limits(data.inputs, config, floor=not start.fixed_sigma0)
            candidates = np.unique(
                np.clip(
                    grid.values(),
                    0.0 if lower is None else np.exp(lower),
                    np.inf if upper is None else np.exp(upper),
                )
            )
            curve = bandwidth_evidence_curve(
                data, list(candidates), start.sigma0, start.sigma, multi=multi
            )
            h = curve[best_index([value for _, value in curve], maximize=True)][0]
            start = replace(start, bandwidth=bandwidth_candidate(h, data.d, multi), k=None)
            logger.debug(f"Initial bandwidth {h:g} from grid scan")
    elif start.k is None:
        start = replace(start, k=template.k, bandwidth=None)

    bounds = search_bounds(data, start, config)
    base = start.continuous()
    clipped = _clip(base, bounds)
    if not np.array_equal(clipped, base):
        logger.debug(f"Moved the starting point {start.describe()} into the search bounds")
        start, base = start.with_continuous(clipped), clipped
    mask = np.logical_not(start.fixed_mask)
    first = evidence_gradient(data, start)
    trace = [first.log_evidence]
    if not mask.any() or config.max_iter == 0:
        converged = first.gradient.size == 0 or bool(np.max(np.abs(first.gradient)) < config.gtol)
        return AscentResult(start, first.log_evidence, tuple(trace), 0, converged)

    latest: dict[str, Any] = {}

    def objective(free: npt.NDArray[np.float64]) -> tuple[float, npt.NDArray[np.float64]]:
        values = base.copy()
        values[mask] = free
        try:
            result = evidence_gradient(data, start.with_continuous(values))
        except NotPositiveDefiniteError:
            logger.debug("Rejected point: precision not positive definite")
            return np.inf, np.zeros_like(free)
        latest.update(point=free.copy(), value=result.log_evidence)
        return -result.log_evidence, -result.gradient

    def record(point: npt.NDArray[np.float64]) -> None:
        if not np.array_equal(point, latest.get("point")):
            objective(point)
        trace.append(latest["value"])
        logger.debug(f"Iteration {len(trace) - 1}: log evidence {latest['value']:.10g}")

    outcome = minimize(
        objective,
        base[mask],
        jac=True,
        method="L-BFGS-B",
        bounds=[bound for bound, free in zip(bounds, mask) if free],
        callback=record,
        options={"maxiter": config.max_iter, "gtol": config.gtol, "ftol": config.ftol},
    )
    params, value = start, first.log_evidence
    if outcome.nit > 0:
        final = base.copy()
        final[mask] = outcome.x
        params, value = start.with_continuous(final), -float(outcome.fun)
    logger.debug(
        f"Evidence maximization finished after {outcome.nit} iterations at {value:.10g} "
        f"({outcome.message})"
    )
    return AscentResult(params, value, tuple(trace), int(outcome.nit), bool(outcome.success))


def maximize_evidence(
    data: Dataset,
    template: WeightSpec,
    initial: HyperParams,
    config: OptimizerConfig = OptimizerConfig(),
    grid: GridConfig = GridConfig(),
) -> HyperParams:
    """
    :param data: training set
    :param template: weight rule fixing the family
    :param initial: initial hyperparameters and fixed flags
    :param config: optimizer settings
    :param grid: grid for the initial bandwidth
    :return: the evidence-maximizing hyperparameters
    """
    return evidence_ascent(data, template, initial, config, grid).params


def check_k_range(k_range: Sequence[int], n: int) -> list[int]:
    """
    :param k_range: candidate numbers of neighbors
    :param n: number of training points
    :raise HyperparameterError: empty range or a candidate outside [1, n - 1]
    :return: the candidates in increasing order
    """
    candidates = sorted(int(k) for k in k_range)
    if not candidates:
        raise HyperparameterError("The range of k is empty.")
    if candidates[0] < 1 or candidates[-1] > n - 1:
        raise HyperparameterError(f"k must lie in [1, {n - 1}], got {candidates}.")
    return candidates


def _k_evidence(
    data: Dataset,
    sigma0: float,
    sigma: float,
    optimize_scales: bool,
    config: OptimizerConfig,
    k: int,
) -> tuple[float, float, float]:
    """
    :param data: training set
    :param sigma0: weight scale
    :param sigma: noise scale
    :param optimize_scales: maximize over the scales starting from the given values
    :param config: optimizer settings
    :param k: number of neighbors
    :return: log evidence at k, with the scales it was reached at
    """
    fixed = not optimize_scales
    initial = HyperParams(sigma0, sigma, k=k, fixed_sigma0=fixed, fixed_sigma=fixed)
    try:
        result = evidence_ascent(data, MutualKnn(k, sigma0), initial, config)
    except NotPositiveDefiniteError:
        return -np.inf, sigma0, sigma
    return result.log_evidence, result.params.sigma0, result.params.sigma


def select_k(
    data: Dataset,
    k_range: Sequence[int],
    sigma0: float,
    sigma: float,
    optimize_scales: bool = False,
    config: OptimizerConfig = OptimizerConfig(),
    workers: int = 1,
) -> KSelection:
    """
    Select the number of mutual neighbors by maximal log evidence.

    :param data: training set
    :param k_range: candidate numbers of neighbors
    :param sigma0: weight scale (initial value when optimized)
    :param sigma: noise scale (initial value when optimized)
    :param optimize_scales: maximize the evidence over sigma0 and sigma for every k
    :param config: optimizer settings for the scales
    :param workers: number of concurrent evaluations
    :raise HyperparameterError: empty range or a candidate outside [1, n - 1]
    :return: the selection, ties going to the smaller k
    """
    candidates = check_k_range(k_range, data.n)
    evaluate = partial(_k_evidence, data, sigma0, sigma, optimize_scales, config)
    results = map_in_executor(evaluate, candidates, workers)
    best = best_index([value for value, _, _ in results], maximize=True)
    value, best_sigma0, best_sigma = results[best]
    logger.debug(f"Selected k={candidates[best]} with log evidence {value:.10g}")
    return KSelection(
        candidates[best],
        value,
        best_sigma0,
        best_sigma,
        tuple((k, result[0]) for k, result in zip(candidates, results)),
    )
