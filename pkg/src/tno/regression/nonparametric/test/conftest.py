"""
Pytest fixtures shared by the tests of tno.regression.nonparametric.

This module is not exported as pytest plugin.
"""
from __future__ import annotations

from typing import Iterator

import pytest

from tno.regression.nonparametric import serialization
from tno.regression.nonparametric.dataset import Dataset
from tno.regression.nonparametric.test.random_data import random_dataset


@pytest.fixture(autouse=True)
def mock_serialization_funcs(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """
    Give every test its own copy of the (de)serialization registry, so that registering or
    clearing logic in one test leaves the others untouched.

    :param monkeypatch: pytest fixture monkeypatch
    :return: yield control
    """
    for registry in ("SERIALIZER_FUNCS", "DESERIALIZER_FUNCS"):
        monkeypatch.setattr(serialization, registry, getattr(serialization, registry).copy())
    yield


@pytest.fixture(name="small_data")
def fixture_small_data() -> Dataset:
    """
    :return: twelve random points in two dimensions
    """
    return random_dataset(3, 12, 2, name="small")
