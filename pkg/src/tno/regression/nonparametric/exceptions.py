"""
Collection of custom exceptions.
"""

from numpy.linalg import LinAlgError


class AnnotationError(Exception):
    """
    Raised when a (de)serialization function is incorrectly annotated.
    """


class RepetitionError(Exception):
    """
    Raised when the (de)serialization logic for a type has already been registered.
    """


class DataFormatError(ValueError):
    """
    Raised when an input file cannot be parsed into a dataset.
    """


class DimensionMismatchError(ValueError):
    """
    Raised when the dimension of a query does not match the fitted model.
    """


class HyperparameterError(ValueError):
    """
    Raised when a hyperparameter (or a search range of hyperparameters) is invalid.
    """


class NotPositiveDefiniteError(LinAlgError):
    """
    Raised when the triangular factorization of a precision or covariance matrix fails.
    """
