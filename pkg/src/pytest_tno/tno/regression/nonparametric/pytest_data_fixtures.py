"""
Pytest fixtures providing the benchmark data sets.
"""
# pylint: disable=import-outside-toplevel  # toplevel import messes up coverage results
from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import pytest

if TYPE_CHECKING:
    from tno.regression.nonparametric import Dataset

YACHT_OPTION = "--yacht-data"


def pytest_addoption(parser: pytest.Parser) -> None:
    """
    Add an option to the pytest parser that points the yacht fixtures to a local copy of the
    yacht hydrodynamics data.

    :param parser: pytest CLI parser configuration.
    """
    group = parser.getgroup("tno.regression.nonparametric")
    group.addoption(
        YACHT_OPTION,
        default=None,
        type=str,
        help="path to the yacht hydrodynamics data file; tests that need it are skipped otherwise",
    )


def yacht_path(config: pytest.Config) -> Path | None:
    """
    Determine the location of the yacht data from the pytest configuration.

    :param config: pytest configuration.
    :return: path to an existing data file, or None when not configured or missing.
    """
    option = config.getoption(YACHT_OPTION)
    if option is None:
        return None
    path = Path(option)
    return path if path.is_file() else None


@pytest.fixture(name="sinc_one", scope="session")
def fixture_sinc_one() -> Dataset:
    """
    Training set of the densely sampled sinc experiment (51 points).

    :return: the dataset
    """
    from tno.regression.nonparametric.dataset import sinc_benchmark

    return sinc_benchmark("sinc1")[0]


@pytest.fixture(name="sinc_two", scope="session")
def fixture_sinc_two() -> Dataset:
    """
    Training set of the sparsely sampled sinc experiment (21 points).

    :return: the dataset
    """
    from tno.regression.nonparametric.dataset import sinc_benchmark

    return sinc_benchmark("sinc2")[0]


@pytest.fixture(name="sinc_test", scope="session")
def fixture_sinc_test() -> Dataset:
    """
    Test grid shared by both sinc experiments (101 points).

    :return: the dataset
    """
    from tno.regression.nonparametric.dataset import sinc_benchmark

    return sinc_benchmark("sinc1")[1]


@pytest.fixture(name="yacht_file", scope="session")
def fixture_yacht_file(pytestconfig: pytest.Config) -> Path:
    """
    Location of the yacht data; skips the requesting test when unavailable.

    :param pytestconfig: pytest configuration.
    :return: path to the data file
    """
    path = yacht_path(pytestconfig)
    if path is None:
        pytest.skip(f"yacht data not available, pass {YACHT_OPTION}")
    return path


@pytest.fixture(name="yacht_data", scope="session")
def fixture_yacht_data(yacht_file: Path) -> Dataset:
    """
    The yacht hydrodynamics data set (308 records, six inputs).

    :param yacht_file: path to the data file
    :return: the dataset
    """
    from tno.regression.nonparametric.dataset import load_yacht

    return load_yacht(yacht_file)
