"""
Default settings of the hyperparameter searches and the benchmark suites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

DEFAULT_SEED = 42
DEFAULT_FOLDS = 10


@dataclass(frozen=True)
class GridConfig:
    """
    Log-spaced grid of candidate bandwidths, shared by every input dimension.
    """

    lo: float = 1e-2
    hi: float = 1e1
    points: int = 50

    def values(self) -> npt.NDArray[np.float64]:
        """
        Materialize the grid.

        :return: increasing array of candidate bandwidths
        """
        return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Settings of the evidence maximization, a bounded quasi-Newton search (L-BFGS-B) in the log
    hyperparameters.

    :param max_iter: iteration cap; with 0 the starting point is returned
    :param gtol: stop once the largest projected gradient component drops below this value
    :param ftol: stop once the relative change of the log evidence drops below this value
    :param scale_range: sigma0 and sigma stay within this factor of their starting values
    :param bandwidth_floor: with sigma0 free, bandwidths stay above this fraction of the median
        nearest-neighbor distance between training inputs
    :param bandwidth_ceiling: bandwidths stay below this multiple of the largest distance
        between training inputs
    """

    max_iter: int = 500
    gtol: float = 1e-6
    ftol: float = 1e-12
    scale_range: float = 1e8
    bandwidth_floor: float = 0.5
    bandwidth_ceiling: float = 100.0


@dataclass(frozen=True)
class ScaleConfig:
    """
    Scale hyperparameters (sigma0, sigma) of a Bayesian method and whether they are optimized.
    """

    sigma0: float
    sigma: float
    optimize: bool


@dataclass(frozen=True)
class SuiteConfig:
    """
    Protocol of a benchmark suite.

    :param kernel_scales: scales of Bayesian kernel regression
    :param knn_scales: scales of Bayesian mutual k-NN regression
    :param k_max: largest k considered by CV and evidence selection
    :param grid: bandwidth grid of the leave-one-out search
    :param optimizer: evidence maximization settings
    :param sweeps: coordinate-descent sweeps of the per-dimension leave-one-out search
    """

    kernel_scales: ScaleConfig
    knn_scales: ScaleConfig
    k_max: int = 30
    grid: GridConfig = field(default_factory=GridConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    sweeps: int = 3


SINC_SUITE = SuiteConfig(
    kernel_scales=ScaleConfig(sigma0=100.0, sigma=1.0, optimize=True),
    knn_scales=ScaleConfig(sigma0=300.0, sigma=3.0, optimize=False),
)
YACHT_SUITE = SuiteConfig(
    kernel_scales=ScaleConfig(sigma0=1.0, sigma=1e-7, optimize=False),
    knn_scales=ScaleConfig(sigma0=0.1, sigma=1e-5, optimize=False),
)
