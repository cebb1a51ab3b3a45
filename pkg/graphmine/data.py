# -*- coding: utf-8 -*-
"""
graphmine: data

Load, standardize, synthesize and partition binary-labeled tabular datasets.
Label 1 is the minority (positive) class.
"""

import math
import logging
import dataclasses
import numpy as np
import pandas as pd
from . import utils
from .errors import (MissingColumn,
                     DuplicateColumn,
                     InvalidDataset,
                     ParseError,
                     EmptyDataset,
                     InvalidSpec,
                     UnreadableData,
                     IoError,
                     SingleClassError)

__all__ = [
    "Dataset",
    "StandardizationModel",
    "SyntheticSpec",
    "load_csv",
    "write_csv",
    "standardize",
    "generate_synthetic",
    "class_partition",
    "dataset_digest",
]

log = logging.getLogger(__name__)


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset(object):
    """
    N x d feature matrix with binary labels.

    :param features: (N, d) float64
    :param labels: (N,) int8, 1 = minority
    :param feature_names: unique names, one per column
    :param source: provenance tag, file path or synthetic spec digest
    :param clusters: optional (N,) int, -1 for majority rows, the minority
        sub-cluster id otherwise. Only synthetic datasets carry it.
    """
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    source: str = ""
    clusters: np.ndarray = None

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise EmptyDataset("features must be a non-empty N x d matrix, got shape %s"
                               % (features.shape,))
        if not np.all(np.isfinite(features)):
            raise InvalidDataset("features must be finite")
        labels = np.asarray(self.labels)
        if labels.shape != (features.shape[0],):
            raise InvalidDataset("labels must have one entry per row")
        if not np.all((labels == 0) | (labels == 1)):
            raise InvalidDataset("labels must only contain 0 and 1")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != features.shape[1]:
            raise InvalidDataset("one feature name per column is required")
        _check_unique(names)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", _frozen(labels, np.int8))
        object.__setattr__(self, "feature_names", names)
        if self.clusters is not None:
            object.__setattr__(self, "clusters", _frozen(self.clusters, np.int64))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def with_features(self, features, feature_names=None):
        """
        Copy of this dataset with another feature matrix, same rows
        """
        return Dataset(features=features,
                       labels=self.labels,
                       feature_names=feature_names or self.feature_names,
                       source=self.source,
                       clusters=self.clusters)


@dataclasses.dataclass(frozen=True, eq=False)
class StandardizationModel(object):
    """
    Per-column population mean and standard deviation.
    Constant columns have stddev 1.0 stored and are flagged, so they
    map to zeros and invert back to their mean.
    """
    means: np.ndarray
    stddevs: np.ndarray
    constant: np.ndarray

    def apply(self, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        out = (matrix - self.means) / self.stddevs
        out[:, self.constant] = 0.0
        return out

    def invert(self, matrix):
        matrix = np.asarray(matrix, dtype=np.float64)
        return matrix * self.stddevs + self.means


@dataclasses.dataclass(frozen=True)
class SyntheticSpec(object):
    n_samples: int
    n_features: int
    minority_fraction: float
    n_minority_clusters: int = 1
    cluster_spread: float = 0.5
    seed: int = 42

    @property
    def n_minority(self):
        # round half up
        return int(math.floor(self.n_samples * self.minority_fraction + 0.5))

    def validate(self):
        if int(self.n_samples) < 2:
            raise InvalidSpec("n_samples must be >= 2")
        if int(self.n_features) < 1:
            raise InvalidSpec("n_features must be >= 1")
        if not 0.0 < self.minority_fraction < 0.5:
            raise InvalidSpec("minority_fraction must be in (0, 0.5)")
        if int(self.n_minority_clusters) < 1:
            raise InvalidSpec("n_minority_clusters must be >= 1")
        if not self.cluster_spread > 0:
            raise InvalidSpec("cluster_spread must be > 0")
        if self.n_minority < self.n_minority_clusters:
            raise InvalidSpec("n_samples x minority_fraction must be >= n_minority_clusters")
        return self

    def digest(self):
        return utils.gen_sha256(utils.to_json(dataclasses.asdict(self)))[:16]


# ------------------------------------------------------------------------------

def load_csv(path, label_column="Class", drop_columns=()):
    """
    Read a comma-separated file with a header row, numeric feature
    columns and a 0/1 label column.

    :param path: file path
    :param label_column: name of the class column
    :param drop_columns: columns to ignore, ie: ["Time"]
    :return: Dataset
    """
    try:
        header = _read_header(path)
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyDataset("'%s' is empty" % path)
    except pd.errors.ParserError as ex:
        raise UnreadableData("malformed csv '%s': %s" % (path, ex))
    except (OSError, UnicodeDecodeError) as ex:
        raise UnreadableData("cannot read '%s': %s" % (path, ex))
    _check_unique(header)
    for name in [label_column] + list(drop_columns):
        if name not in header:
            raise MissingColumn(name)
    if len(frame) == 0:
        raise EmptyDataset("'%s' has no data rows" % path)

    feature_names = [c for c in header if c != label_column and c not in drop_columns]
    columns = [label_column] + feature_names
    values = np.empty((len(frame), len(columns)), dtype=np.float64)
    for j, name in enumerate(columns):
        values[:, j] = _parse_column(frame[name])

    bad = ~np.isfinite(values)
    bad[:, 0] |= np.isfinite(values[:, 0]) & (values[:, 0] != 0) & (values[:, 0] != 1)
    if bad.any():
        # row-major: first offending row, then first offending column in file order
        order = [header.index(c) for c in columns]
        cells = sorted((r, order[c]) for r, c in np.argwhere(bad))
        r, c = cells[0]
        name = header[c]
        raise ParseError(int(r) + 2, name, frame[name].iat[r])

    if not feature_names:
        raise EmptyDataset("'%s' has no feature columns" % path)

    return Dataset(features=values[:, 1:],
                   labels=values[:, 0].astype(np.int8),
                   feature_names=feature_names,
                   source=str(path))


def _read_header(path):
    """
    Column names exactly as written in the first line of the file
    """
    first = pd.read_csv(path, header=None, nrows=1, dtype=str,
                        keep_default_na=False, encoding="utf-8")
    return [str(c) for c in first.iloc[0].tolist()]


def _check_unique(names):
    seen = set()
    for name in names:
        if name in seen:
            raise DuplicateColumn(name)
        seen.add(name)


def _parse_column(series):
    """
    Parse a string column to float64 with correctly rounded decimals.
    Cells that are not numbers become NaN.
    """
    try:
        return series.to_numpy(dtype=object).astype(np.float64)
    except ValueError:
        return pd.to_numeric(series, errors="coerce").to_numpy(dtype=np.float64)


def write_csv(dataset, path, label_column="Class"):
    """
    Write a dataset as csv, features first then the label column.
    Floats are written with the shortest round-trip representation, so
    load_csv gives back the same values bit for bit.

    :param dataset: Dataset
    :param path: file path
    :param label_column: name of the class column
    """
    if label_column in dataset.feature_names:
        raise DuplicateColumn(label_column)
    rows = [[utils.format_float(v) for v in row] + [str(int(label))]
            for row, label in zip(dataset.features.tolist(), dataset.labels.tolist())]
    frame = pd.DataFrame(rows, columns=list(dataset.feature_names) + [label_column], dtype=object)
    try:
        utils.ensure_parent_dir(path)
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as ex:
        raise IoError("cannot write '%s': %s" % (path, ex))


def standardize(dataset):
    """
    z-score every column with the population standard deviation.
    Constant columns become all zeros and are flagged in the model.

    :param dataset: Dataset with N >= 2
    :return: tuple (Dataset, StandardizationModel)
    """
    if dataset.n_samples < 2:
        raise EmptyDataset("standardize needs at least 2 rows")
    x = dataset.features
    means = x.mean(axis=0)
    stddevs = x.std(axis=0)
    constant = x.max(axis=0) == x.min(axis=0)
    stddevs = np.where(constant, 1.0, stddevs)
    if constant.any():
        log.info("constant columns left at 0: %s",
                 [n for n, c in zip(dataset.feature_names, constant) if c])
    model = StandardizationModel(means=means, stddevs=stddevs, constant=constant)
    return dataset.with_features(model.apply(x)), model


def generate_synthetic(spec):
    """
    Seeded stand-in for a fraud-style dataset.
    Majority rows come from a standard normal blob. Minority rows come from
    n_minority_clusters axis-aligned gaussian blobs whose means sit on a
    lattice: each cluster shifts a seeded subset of dimensions to +-3.
    Rows are shuffled; `clusters` records the sub-cluster of every row.

    :param spec: SyntheticSpec
    :return: Dataset
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, d = int(spec.n_samples), int(spec.n_features)
    n_min = spec.n_minority
    n_clusters = int(spec.n_minority_clusters)

    majority = rng.standard_normal((n - n_min, d))

    n_shifted = max(1, d // 4)
    centers = np.zeros((n_clusters, d))
    for c in range(n_clusters):
        dims = rng.choice(d, size=n_shifted, replace=False)
        centers[c, dims] = 3.0 * rng.choice([-1.0, 1.0], size=n_shifted)

    sizes = [len(s) for s in np.array_split(np.arange(n_min), n_clusters)]
    minority = np.vstack([centers[c] + spec.cluster_spread * rng.standard_normal((size, d))
                          for c, size in enumerate(sizes)])
    clusters = np.concatenate([np.full(n - n_min, -1)] +
                              [np.full(size, c) for c, size in enumerate(sizes)])

    features = np.vstack([majority, minority])
    labels = np.concatenate([np.zeros(n - n_min, dtype=np.int8), np.ones(n_min, dtype=np.int8)])
    order = rng.permutation(n)

    return Dataset(features=features[order],
                   labels=labels[order],
                   feature_names=["V%d" % (j + 1) for j in range(d)],
                   source="synthetic:%s" % spec.digest(),
                   clusters=clusters[order])


def class_partition(dataset):
    """
    Split row indices by class.

    :param dataset: Dataset or label array
    :return: tuple (majority_indices, minority_indices)
    """
    labels = dataset.labels if isinstance(dataset, Dataset) else np.asarray(dataset)
    majority = np.flatnonzero(labels == 0)
    minority = np.flatnonzero(labels == 1)
    if len(majority) == 0 or len(minority) == 0:
        raise SingleClassError("both classes are required, got %d majority and %d minority"
                               % (len(majority), len(minority)))
    return majority, minority


def dataset_digest(dataset):
    """
    SHA-256 over the feature bytes, labels and column names
    :param dataset: Dataset
    :return: string
    """
    h = utils.gen_sha256(np.ascontiguousarray(dataset.features).tobytes()
                         + np.ascontiguousarray(dataset.labels).tobytes()
                         + "\x1f".join(dataset.feature_names).encode())
    return h
