"""
Validates that the pytest plugins work as expected.
"""
from __future__ import annotations

import pytest

from tno.regression.nonparametric import Dataset


def test_sinc_fixtures_have_grid_sizes(
    sinc_one: Dataset, sinc_two: Dataset, sinc_test: Dataset
) -> None:
    """
    The sinc fixtures hold the training grids with spacing 0.2 and 0.5 and the shared test grid.

    :param sinc_one: densely sampled training set
    :param sinc_two: sparsely sampled training set
    :param sinc_test: test grid
    """
    assert (sinc_one.n, sinc_two.n, sinc_test.n) == (51, 21, 101)
    assert sinc_one.d == sinc_two.d == sinc_test.d == 1


def test_yacht_option_without_value_is_none(pytestconfig: pytest.Config) -> None:
    """
    Without the option the yacht location cannot be determined, unless it was passed on the
    command line of this run.

    :param pytestconfig: pytest configuration
    """
    from pytest_tno.tno.regression.nonparametric import yacht_path

    option = pytestconfig.getoption("--yacht-data")
    path = yacht_path(pytestconfig)
    if option is None:
        assert path is None
    else:
        assert path is None or path.is_file()


def test_yacht_fixture_has_six_inputs(yacht_data: Dataset) -> None:
    """
    The yacht data holds six inputs per record; skipped when the data is not available.

    :param yacht_data: yacht hydrodynamics data
    """
    assert yacht_data.d == 6
    assert yacht_data.n > 0
