"""
(De)serialization logic for the fitted estimators and their hyperparameters.
"""

from __future__ import annotations

from tno.regression.nonparametric.classical import (
    KernelRegressor,
    KnnRegressor,
    MknnRegressor,
    PerDimBandwidth,
    SingleBandwidth,
)
from tno.regression.nonparametric.dataset import Normalizer
from tno.regression.nonparametric.gpr import GPRModel, SEHypers
from tno.regression.nonparametric.laplacian import KernelWeights, LaplacianModel, MutualKnn
from tno.regression.nonparametric.serialization import Serialization

ESTIMATOR_CLASSES = (
    SingleBandwidth,
    PerDimBandwidth,
    KernelWeights,
    MutualKnn,
    SEHypers,
    Normalizer,
    KernelRegressor,
    KnnRegressor,
    MknnRegressor,
    LaplacianModel,
    GPRModel,
)


def register() -> None:
    """
    Register the estimator classes.
    """
    for obj_class in ESTIMATOR_CLASSES:
        Serialization.register_class(obj_class)
