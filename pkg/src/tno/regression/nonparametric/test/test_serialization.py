"""
This module tests storing and loading fitted models and the serialization registry.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import pytest

from tno.regression.nonparametric import (
    AnnotationError,
    DataFormatError,
    RepetitionError,
    Serialization,
)
from tno.regression.nonparametric.classical import (
    KernelRegressor,
    KnnRegressor,
    MknnRegressor,
    PerDimBandwidth,
    SingleBandwidth,
)
from tno.regression.nonparametric.dataset import Dataset, Normalizer, fit_normalizer
from tno.regression.nonparametric.gpr import GPRModel, SEHypers
from tno.regression.nonparametric.laplacian import KernelWeights, LaplacianModel, MutualKnn

QUERIES = np.random.default_rng(12).uniform(-2, 2, size=(7, 2))


def fitted_models(data: Dataset) -> list[Any]:
    """
    :param data: training set
    :return: one fitted model of every kind
    """
    return [
        KernelRegressor(data, SingleBandwidth(0.4)),
        KernelRegressor(data, PerDimBandwidth((0.3, 1.1))),
        KnnRegressor(data, 3),
        MknnRegressor(data, 4),
        LaplacianModel(data, KernelWeights(PerDimBandwidth((0.5, 0.7)), 2.0), 1e-3),
        LaplacianModel(data, MutualKnn(2, 0.1), 1e-5),
        GPRModel(data, SEHypers(1.0, 0.1, (1.0, 3.0))),
    ]


@pytest.mark.parametrize("suffix", [".json", ".msgpack", ".mpk"])
def test_models_survive_storage(small_data: Dataset, tmp_path: Path, suffix: str) -> None:
    """
    Tests that every model predicts identically after being stored and loaded.

    :param small_data: random two-dimensional data
    :param tmp_path: temporary directory
    :param suffix: file suffix selecting the encoding
    """
    for number, model in enumerate(fitted_models(small_data)):
        path = tmp_path / f"model{number}{suffix}"
        Serialization.save(model, path)
        restored = Serialization.load(path)
        assert type(restored) is type(model)
        assert restored.train.name == "small"
        np.testing.assert_array_equal(restored.predict(QUERIES), model.predict(QUERIES))


def test_json_document_layout(small_data: Dataset) -> None:
    """
    Tests that a stored model is a document with the package version and a typed object.

    :param small_data: random two-dimensional data
    """
    from tno.regression.nonparametric import __version__

    text = Serialization.dumps(KnnRegressor(small_data, 3))
    version, model = Serialization.loads(text)
    assert version == __version__
    assert isinstance(model, KnnRegressor)
    assert model.k == 3
    assert '"type": "KnnRegressor"' in text


def test_normalizer_storage(tmp_path: Path) -> None:
    """
    Tests that a normalizer is restored with its location and scale.

    :param tmp_path: temporary directory
    """
    norm = fit_normalizer(Dataset(np.array([[0.0, 1.0], [2.0, 5.0]]), [0.0, 1.0]))
    path = tmp_path / "norm.json"
    Serialization.save(norm, path)
    restored = Serialization.load(path)
    assert isinstance(restored, Normalizer)
    np.testing.assert_array_equal(restored.location, norm.location)
    np.testing.assert_array_equal(restored.scale, norm.scale)


@pytest.mark.parametrize("suffix, content", [(".json", b"{not json"), (".msgpack", b"\xc1")])
def test_garbage_file(tmp_path: Path, suffix: str, content: bytes) -> None:
    """
    Tests that a file without a document raises a data format error.

    :param tmp_path: temporary directory
    :param suffix: file suffix selecting the encoding
    :param content: file content
    """
    path = tmp_path / f"model{suffix}"
    path.write_bytes(content)
    with pytest.raises(DataFormatError):
        Serialization.load(path)


def test_document_without_object() -> None:
    """
    Tests that valid JSON without a stored object raises a data format error.
    """
    with pytest.raises(DataFormatError):
        Serialization.loads('{"version": "0.1.0"}')


def test_unregistered_type() -> None:
    """
    Tests that objects without registered logic cannot be (de)serialized.
    """

    class Unknown:
        """
        Class without serialization logic.
        """

    with pytest.raises(NotImplementedError):
        Serialization.dumps(Unknown())
    with pytest.raises(NotImplementedError):
        Serialization.deserialize({"type": "Unknown", "data": 1})


class Point:
    """
    Class with custom serialization logic.
    """

    def __init__(self, x: float) -> None:
        """
        :param x: coordinate
        """
        self.x = x

    def serialize(self, **_kwargs: Any) -> dict[str, float]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized point
        """
        return {"x": self.x}

    @staticmethod
    def deserialize(obj: dict[str, float], **_kwargs: Any) -> Point:
        r"""
        :param obj: serialized point
        :param \**_kwargs: optional extra keyword arguments
        :return: the point
        """
        return Point(obj["x"])


class BadPoint(Point):
    """
    Class whose deserializer does not announce its own type.
    """

    @staticmethod
    def deserialize(obj: dict[str, float], **_kwargs: Any) -> Point:
        r"""
        :param obj: serialized point
        :param \**_kwargs: optional extra keyword arguments
        :return: a point of the parent class
        """
        return Point(obj["x"])


def test_register_custom_class() -> None:
    """
    Tests registering a custom class, and refusing a second registration.
    """
    Serialization.register_class(Point)
    _, restored = Serialization.unpack(Serialization.pack(Point(1.5)))
    assert isinstance(restored, Point)
    assert restored.x == 1.5
    with pytest.raises(RepetitionError):
        Serialization.register_class(Point)
    Serialization.register_class(Point, overwrite=True)


def test_register_inconsistent_annotation() -> None:
    """
    Tests that a deserializer annotated with another type is refused.
    """
    with pytest.raises(AnnotationError):
        Serialization.register_class(BadPoint)
    Serialization.register_class(BadPoint, check_annotations=False, overwrite=True)


def test_clear_serialization_logic(small_data: Dataset) -> None:
    """
    Tests that clearing the registry removes the package logic until it is reloaded.

    :param small_data: random two-dimensional data
    """
    Serialization.clear_serialization_logic(reload_defaults=False)
    with pytest.raises(NotImplementedError):
        Serialization.dumps(KnnRegressor(small_data, 2))
    Serialization.clear_serialization_logic()
    restored = Serialization.loads(Serialization.dumps(KnnRegressor(small_data, 2)))[1]
    assert isinstance(restored, KnnRegressor)
