"""
(De)serialization logic for numpy arrays and scalars.
"""

from __future__ import annotations

from typing import Any

import numpy as np
import numpy.typing as npt

from tno.regression.nonparametric.serialization import Serialization


def numpy_serialize(obj: npt.NDArray[Any], **_kwargs: Any) -> dict[str, Any]:
    r"""
    Function for serializing numpy arrays

    :param obj: numpy array to serialize
    :param \**_kwargs: optional extra keyword arguments
    :return: serialized object
    """
    return {"values": obj.tolist(), "shape": list(obj.shape)}


def numpy_deserialize(obj: dict[str, Any], **_kwargs: Any) -> npt.NDArray[np.float64]:
    r"""
    Function for deserializing numpy arrays

    :param obj: serialized numpy array
    :param \**_kwargs: optional extra keyword arguments
    :return: deserialized array
    """
    return np.asarray(obj["values"], dtype=np.float64).reshape(obj["shape"])


def scalar_serialize(obj: np.floating[Any] | np.integer[Any], **_kwargs: Any) -> float | int:
    r"""
    Function for serializing numpy scalars as their python counterpart

    :param obj: numpy scalar to serialize
    :param \**_kwargs: optional extra keyword arguments
    :return: the python scalar
    """
    return obj.item()  # type: ignore[no-any-return]


def scalar_deserialize(obj: float | int, **_kwargs: Any) -> float | int:
    r"""
    Function for deserializing numpy scalars, which are kept as python scalars

    :param obj: python scalar
    :param \**_kwargs: optional extra keyword arguments
    :return: the same scalar
    """
    return obj


def register() -> None:
    """
    Register numpy serializers and deserializers.
    """
    Serialization.register(
        numpy_serialize, numpy_deserialize, np.ndarray.__name__, check_annotations=False
    )
    Serialization.register(
        scalar_serialize,
        scalar_deserialize,
        np.float64.__name__,
        np.int64.__name__,
        check_annotations=False,
    )
