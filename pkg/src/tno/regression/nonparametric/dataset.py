"""
This module contains the Dataset class together with the generators, readers, normalization and
fold splitting used by the experiments.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd

from .exceptions import DataFormatError, DimensionMismatchError, HyperparameterError
from .functions import init

logger = init(__name__, logger_level=logging.INFO)

YACHT_COLUMNS = 7
GRID_TOLERANCE = 1e-12


def _as_readonly(array: npt.ArrayLike, ndim: int) -> npt.NDArray[np.float64]:
    """
    Copy an array-like into a read-only float array of the given dimensionality.

    :param array: values to copy
    :param ndim: number of dimensions to enforce (a 1-D input is promoted to a column for 2)
    :return: read-only array
    """
    result = np.array(array, dtype=np.float64)
    if ndim == 2 and result.ndim == 1:
        result = result.reshape(-1, 1)
    result.setflags(write=False)
    return result


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    n input vectors in d dimensions together with n scalar targets.
    """

    inputs: npt.NDArray[np.float64]
    targets: npt.NDArray[np.float64]
    name: str = field(default="dataset", compare=False)

    def __post_init__(self) -> None:
        """
        Validate the shapes and values and freeze the arrays.

        :raise DataFormatError: inconsistent shapes, empty data or non-finite entries
        """
        inputs = _as_readonly(self.inputs, ndim=2)
        targets = _as_readonly(self.targets, ndim=1)
        if inputs.ndim != 2 or targets.ndim != 1:
            raise DataFormatError("Inputs must be an n x d matrix and targets a vector.")
        if inputs.shape[0] != targets.shape[0]:
            raise DataFormatError(
                f"Found {inputs.shape[0]} input rows but {targets.shape[0]} targets."
            )
        if inputs.shape[0] < 1 or inputs.shape[1] < 1:
            raise DataFormatError("A dataset needs at least one point and one dimension.")
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise DataFormatError("All inputs and targets must be finite.")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        """
        :return: number of data points
        """
        return int(self.inputs.shape[0])

    @property
    def d(self) -> int:
        """
        :return: input dimension
        """
        return int(self.inputs.shape[1])

    def subset(self, indices: Sequence[int] | npt.NDArray[np.int_]) -> Dataset:
        """
        Select a subset of the points, in the given order.

        :param indices: indices of the points to keep
        :return: a new dataset
        """
        index_array = np.asarray(indices, dtype=np.int_)
        return Dataset(self.inputs[index_array], self.targets[index_array], name=self.name)

    def check_query(self, query: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """
        Validate a query vector against the input dimension.

        :param query: query vector (a scalar is accepted when d = 1)
        :raise DimensionMismatchError: query has the wrong length
        :return: the query as a float vector
        """
        vector = np.atleast_1d(np.asarray(query, dtype=np.float64))
        if vector.ndim != 1 or vector.shape[0] != self.d:
            raise DimensionMismatchError(
                f"Expected a query of dimension d={self.d}, got shape {vector.shape}."
            )
        return vector

    def to_frame(self) -> pd.DataFrame:
        """
        :return: dataframe with columns x1, ..., xd, y
        """
        frame = pd.DataFrame(self.inputs, columns=input_columns(self.d))
        frame["y"] = self.targets
        return frame

    def to_csv(self, path: Path | str) -> None:
        """
        Write the dataset as CSV with header x1,...,xd,y.

        :param path: destination file
        """
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def read_csv(cls, path: Path | str, name: str | None = None) -> Dataset:
        """
        Read a dataset written by Dataset.to_csv.

        :param path: CSV file with a header row and a final target column "y"
        :param name: name of the dataset, defaults to the file stem
        :raise DataFormatError: the file is empty, not decodable, not parseable as CSV, its header
            lacks the target column or an entry is not numeric
        :return: the dataset
        """
        try:
            frame = pd.read_csv(path)
        except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
            raise DataFormatError(f"{path}: not a readable CSV file ({exc}).") from exc
        if "y" not in frame.columns:
            raise DataFormatError(f"{path}: missing target column 'y' in header.")
        try:
            inputs = frame.drop(columns="y").to_numpy(dtype=np.float64)
            targets = frame["y"].to_numpy(dtype=np.float64)
        except ValueError as exc:
            raise DataFormatError(f"{path}: non-numeric entry ({exc}).") from exc
        return cls(inputs, targets, name=Path(path).stem if name is None else name)


def input_columns(d: int) -> list[str]:
    """
    :param d: input dimension
    :return: the column names x1, ..., xd
    """
    return [f"x{m + 1}" for m in range(d)]


def read_inputs(path: Path | str, d: int) -> npt.NDArray[np.float64]:
    """
    Read query inputs from a CSV file with header x1,...,xd. A target column "y" is ignored and
    a completely empty file yields no queries.

    :param path: CSV file
    :param d: input dimension expected by the model
    :raise DimensionMismatchError: the file has a different number of input columns
    :raise DataFormatError: the file cannot be decoded or parsed, or an entry is not numeric
    :return: m x d matrix of queries (m may be 0)
    """
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        return np.empty((0, d), dtype=np.float64)
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataFormatError(f"{path}: not a readable CSV file ({exc}).") from exc
    columns = [column for column in frame.columns if str(column) != "y"]
    if len(columns) != d:
        raise DimensionMismatchError(
            f"{path}: found {len(columns)} input columns, the model expects d={d}."
        )
    try:
        return frame[columns].to_numpy(dtype=np.float64).reshape(len(frame), d)
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric entry ({exc}).") from exc


def sinc(x: float) -> float:
    """
    Normalized sinc function sin(pi x) / (pi x), equal to 1 at 0.

    :param x: evaluation point
    :return: sinc(x)
    """
    return float(np.sinc(x))


def gen_sinc(lo: float, hi: float, step: float, name: str = "sinc") -> Dataset:
    """
    Equally spaced one-dimensional inputs lo, lo + step, ... up to hi with sinc targets.

    The grid is built from indices (lo + i * step) rather than by repeated addition.

    :param lo: first input
    :param hi: upper end of the grid, included up to an absolute tolerance of 1e-12
    :param step: spacing
    :param name: name of the dataset
    :raise HyperparameterError: non-positive step or lo > hi
    :return: the dataset
    """
    if step <= 0 or lo > hi:
        raise HyperparameterError(f"Invalid grid lo={lo}, hi={hi}, step={step}.")
    count = int(np.floor((hi - lo + GRID_TOLERANCE) / step)) + 1
    inputs = lo + step * np.arange(count, dtype=np.float64)
    return Dataset(inputs, np.sinc(inputs), name=name)


SINC_DATASETS = {
    "sinc1": (-5.0, 5.0, 0.2),
    "sinc2": (-5.0, 5.0, 0.5),
}
SINC_TEST_GRID = (-5.01, 5.0, 0.1)


def sinc_benchmark(name: str) -> tuple[Dataset, Dataset]:
    """
    Training and test set of one of the sinc experiments.

    :param name: "sinc1" (spacing 0.2) or "sinc2" (spacing 0.5)
    :raise KeyError: unknown name
    :return: training set and the shared test set
    """
    lo, hi, step = SINC_DATASETS[name]
    train = gen_sinc(lo, hi, step, name=name)
    test = gen_sinc(*SINC_TEST_GRID, name=f"{name}-test")
    return train, test


def load_yacht(path: Path | str) -> Dataset:
    """
    Read the yacht hydrodynamics data: one record per line with six inputs followed by the
    residuary resistance. Fields are whitespace separated; a comma-separated variant is
    detected from the first non-empty line. Blank lines are skipped.

    :param path: data file
    :raise FileNotFoundError: the file does not exist
    :raise DataFormatError: the file is not UTF-8 text, or a row has the wrong number of fields
        or a non-numeric field
    :return: the dataset with d = 6
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not a UTF-8 text file ({exc}).") from exc
    first = next((line for line in lines if line.strip()), "")
    delimiter: str | None = "," if "," in first else None

    rows: list[list[float]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        tokens = [token for token in line.strip().split(delimiter) if token.strip()]
        if len(tokens) != YACHT_COLUMNS:
            raise DataFormatError(
                f"{path}: line {lineno} has {len(tokens)} fields, expected {YACHT_COLUMNS}."
            )
        try:
            rows.append([float(token) for token in tokens])
        except ValueError as exc:
            raise DataFormatError(f"{path}: line {lineno} is not numeric ({exc}).") from exc
    if not rows:
        raise DataFormatError(f"{path}: no data rows.")

    table = np.asarray(rows)
    logger.debug(f"Read {table.shape[0]} yacht records from {path}")
    return Dataset(table[:, :-1], table[:, -1], name="yacht")


@dataclass(frozen=True, eq=False)
class Normalizer:
    """
    Per-dimension affine map (x - location) / scale.
    """

    location: npt.NDArray[np.float64]
    scale: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        """
        :raise HyperparameterError: non-positive scale
        """
        object.__setattr__(self, "location", _as_readonly(self.location, ndim=1))
        object.__setattr__(self, "scale", _as_readonly(self.scale, ndim=1))
        if np.any(self.scale <= 0):
            raise HyperparameterError("Normalizer scales must be strictly positive.")

    def serialize(self, **_kwargs: Any) -> dict[str, Any]:
        r"""
        :param \**_kwargs: optional extra keyword arguments
        :return: serialized normalizer
        """
        return {"location": self.location, "scale": self.scale}

    @staticmethod
    def deserialize(obj: dict[str, Any], **_kwargs: Any) -> Normalizer:
        r"""
        :param obj: serialized normalizer
        :param \**_kwargs: optional extra keyword arguments
        :return: the normalizer
        """
        return Normalizer(obj["location"], obj["scale"])


def fit_normalizer(train: Dataset) -> Normalizer:
    """
    Per-dimension mean and (population) standard deviation of the training inputs. Constant
    dimensions get scale 1.

    :param train: training set
    :return: the fitted normalizer
    """
    location = train.inputs.mean(axis=0)
    scale = train.inputs.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return Normalizer(location, scale)


def apply_normalizer(norm: Normalizer, data: Dataset) -> Dataset:
    """
    Normalize the inputs of a dataset; the targets are left untouched.

    :param norm: fitted normalizer
    :param data: dataset to transform
    :raise DimensionMismatchError: normalizer and data disagree on d
    :return: the normalized dataset
    """
    if norm.location.shape[0] != data.d:
        raise DimensionMismatchError(
            f"Normalizer expects d={norm.location.shape[0]}, data has d={data.d}."
        )
    return Dataset((data.inputs - norm.location) / norm.scale, data.targets, name=data.name)


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """
    Fold index of every data point.
    """

    folds: npt.NDArray[np.int_]
    seed: int

    @property
    def n_folds(self) -> int:
        """
        :return: number of folds
        """
        return int(self.folds.max()) + 1

    def sizes(self) -> list[int]:
        """
        :return: number of points per fold
        """
        return [int(size) for size in np.bincount(self.folds, minlength=self.n_folds)]

    def split(self, fold: int) -> tuple[npt.NDArray[np.int_], npt.NDArray[np.int_]]:
        """
        :param fold: index of the held-out fold
        :return: sorted training indices and sorted test indices
        """
        return np.flatnonzero(self.folds != fold), np.flatnonzero(self.folds == fold)


def kfold(n: int, folds: int, seed: int) -> FoldAssignment:
    """
    Seeded shuffle of the indices dealt round-robin into folds.

    :param n: number of data points
    :param folds: number of folds
    :param seed: seed of the shuffle
    :raise HyperparameterError: not 1 < folds <= n
    :return: the fold assignment
    """
    if not 1 < folds <= n:
        raise HyperparameterError(f"Cannot split {n} points into {folds} folds.")
    permutation = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int_)
    assignment[permutation] = np.arange(n) % folds
    assignment.setflags(write=False)
    return FoldAssignment(assignment, seed)
