"""
Kernel, k-nearest-neighbor and mutual k-nearest-neighbor regression with their Bayesian
extensions through graph-Laplacian Gaussian process priors.
"""

# Explicit re-export of all functionalities, such that they can be imported properly. Following
# https://www.python.org/dev/peps/pep-0484/#stub-files and
# https://mypy.readthedocs.io/en/stable/command_line.html#cmdoption-mypy-no-implicit-reexport
from tno.regression.nonparametric.classical import KernelRegressor as KernelRegressor
from tno.regression.nonparametric.classical import KnnRegressor as KnnRegressor
from tno.regression.nonparametric.classical import MknnRegressor as MknnRegressor
from tno.regression.nonparametric.classical import PerDimBandwidth as PerDimBandwidth
from tno.regression.nonparametric.classical import SingleBandwidth as SingleBandwidth
from tno.regression.nonparametric.classical import kernel_regress as kernel_regress
from tno.regression.nonparametric.classical import knn_indices as knn_indices
from tno.regression.nonparametric.classical import knn_regress as knn_regress
from tno.regression.nonparametric.classical import mknn_regress as mknn_regress
from tno.regression.nonparametric.classical import mutual_neighbors as mutual_neighbors
from tno.regression.nonparametric.crossvalidation import loocv_bandwidth as loocv_bandwidth
from tno.regression.nonparametric.crossvalidation import (
    loocv_bandwidth_per_dimension as loocv_bandwidth_per_dimension,
)
from tno.regression.nonparametric.crossvalidation import loocv_k as loocv_k
from tno.regression.nonparametric.dataset import Dataset as Dataset
from tno.regression.nonparametric.dataset import gen_sinc as gen_sinc
from tno.regression.nonparametric.dataset import load_yacht as load_yacht
from tno.regression.nonparametric.evidence import HyperParams as HyperParams
from tno.regression.nonparametric.evidence import evidence_gradient as evidence_gradient
from tno.regression.nonparametric.evidence import log_evidence as log_evidence
from tno.regression.nonparametric.evidence import maximize_evidence as maximize_evidence
from tno.regression.nonparametric.evidence import select_k as select_k
from tno.regression.nonparametric.exceptions import AnnotationError as AnnotationError
from tno.regression.nonparametric.exceptions import DataFormatError as DataFormatError
from tno.regression.nonparametric.exceptions import (
    DimensionMismatchError as DimensionMismatchError,
)
from tno.regression.nonparametric.exceptions import HyperparameterError as HyperparameterError
from tno.regression.nonparametric.exceptions import (
    NotPositiveDefiniteError as NotPositiveDefiniteError,
)
from tno.regression.nonparametric.exceptions import RepetitionError as RepetitionError
from tno.regression.nonparametric.gpr import GPRModel as GPRModel
from tno.regression.nonparametric.gpr import SEHypers as SEHypers
from tno.regression.nonparametric.gpr import gpr_log_evidence as gpr_log_evidence
from tno.regression.nonparametric.gpr import gpr_predict as gpr_predict
from tno.regression.nonparametric.laplacian import KernelWeights as KernelWeights
from tno.regression.nonparametric.laplacian import LaplacianModel as LaplacianModel
from tno.regression.nonparametric.laplacian import MutualKnn as MutualKnn
from tno.regression.nonparametric.laplacian import Prediction as Prediction
from tno.regression.nonparametric.laplacian import build_precision as build_precision
from tno.regression.nonparametric.laplacian import predict as predict
from tno.regression.nonparametric.serialization import Serialization as Serialization
from tno.regression.nonparametric.serialization import (
    SupportsSerialization as SupportsSerialization,
)

__version__ = "0.1.0"


# Register all default (de)serializers
Serialization.clear_serialization_logic(reload_defaults=True)
