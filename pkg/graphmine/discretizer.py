# -*- coding: utf-8 -*-
"""
graphmine: discretizer

Per-dimension quantile binning of a real matrix into an itemized
transaction database. Item ids follow `dim * B + bin`.
"""

import math
import logging
import dataclasses
import numpy as np
from . import utils
from .errors import InvalidBins, DimensionMismatch, LengthMismatch, IoError

__all__ = [
    "BinningModel",
    "TransactionDb",
    "quantile",
    "fit_quantile_bins",
    "assign_bin",
    "assign_bins",
    "to_transactions",
]

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class BinningModel(object):
    """
    :param n_dims: number of columns
    :param bins_per_dim: nominal bin count B
    :param boundaries: per-dimension strictly increasing cut points
    :param constant_dims: (n_dims,) bool, dims without cut points
    """
    n_dims: int
    bins_per_dim: int
    boundaries: tuple
    constant_dims: np.ndarray

    def effective_bins(self, dim):
        return len(self.boundaries[dim]) + 1


@dataclasses.dataclass(frozen=True, eq=False)
class TransactionDb(object):
    """
    One sorted item-id tuple per sample with a side-band 0/1 label.

    When `bins_per_dim` is set, the vocabulary is the bijection
    item_id <-> (dim, bin) with item_id = dim * bins_per_dim + bin.

    :param transactions: tuple of sorted tuples of item ids
    :param labels: (N,) int8, 1 = minority
    :param n_items: size of the item universe
    :param n_dims: number of binned dimensions, None for free-form dbs
    :param bins_per_dim: B, None for free-form dbs
    """
    transactions: tuple
    labels: np.ndarray
    n_items: int
    n_dims: int = None
    bins_per_dim: int = None

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int8, copy=True)
        labels.setflags(write=False)
        if len(labels) != len(self.transactions):
            raise LengthMismatch("%d transactions for %d labels"
                                 % (len(self.transactions), len(labels)))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "transactions",
                           tuple(tuple(sorted(set(int(i) for i in t))) for t in self.transactions))

    @classmethod
    def from_itemsets(cls, transactions, labels, n_items=None):
        """
        Free-form database, ie: for hand-written mining examples
        :param transactions: iterable of item id iterables
        :param labels: 0/1 per transaction
        :param n_items: item universe size, defaults to max id + 1
        :return: TransactionDb
        """
        transactions = [tuple(t) for t in transactions]
        if n_items is None:
            n_items = max([max(t) for t in transactions if t] or [-1]) + 1
        return cls(transactions=tuple(transactions), labels=labels, n_items=n_items)

    def __len__(self):
        return len(self.transactions)

    @property
    def minority_mask(self):
        return self.labels == 1

    def encode(self, dim, bin_):
        if self.bins_per_dim is None:
            raise ValueError("free-form database has no (dim, bin) vocabulary")
        if not 0 <= dim < self.n_dims or not 0 <= bin_ < self.bins_per_dim:
            raise DimensionMismatch("(%d, %d) out of range" % (dim, bin_))
        return dim * self.bins_per_dim + bin_

    def decode(self, item):
        if self.bins_per_dim is None:
            raise ValueError("free-form database has no (dim, bin) vocabulary")
        if not 0 <= item < self.n_items:
            raise DimensionMismatch("item %d out of range" % item)
        return divmod(int(item), self.bins_per_dim)

    def token(self, item):
        """
        Human readable item: `dim:bin`, or the id for free-form dbs
        """
        if self.bins_per_dim is None:
            return str(item)
        return "%d:%d" % self.decode(item)

    def incidence(self):
        """
        (N, n_items) bool matrix, True when the transaction holds the item
        """
        matrix = getattr(self, "_incidence", None)
        if matrix is None:
            matrix = np.zeros((len(self.transactions), self.n_items), dtype=bool)
            for row, items in enumerate(self.transactions):
                matrix[row, list(items)] = True
            matrix.setflags(write=False)
            object.__setattr__(self, "_incidence", matrix)
        return matrix

    def contains(self, items):
        """
        Mask of the transactions holding every item of `items`
        """
        items = list(items)
        if any(not 0 <= i < self.n_items for i in items):
            return np.zeros(len(self.transactions), dtype=bool)
        return self.incidence()[:, items].all(axis=1)

    def export(self, path):
        """
        Write one line per transaction: space separated ids, `#`, label
        :param path: file path
        """
        try:
            utils.ensure_parent_dir(path)
            with open(path, "w", encoding="utf-8", newline="") as f:
                for items, label in zip(self.transactions, self.labels):
                    f.write("%s # %d\n" % (" ".join(str(i) for i in items), label))
        except OSError as ex:
            raise IoError("cannot write transactions '%s': %s" % (path, ex))


# ------------------------------------------------------------------------------

def quantile(sorted_values, p):
    """
    Linear interpolation between order statistics:
    h = (N - 1) * p, q = v[floor(h)] + (h - floor(h)) * (v[floor(h) + 1] - v[floor(h)])

    :param sorted_values: ascending 1-d array
    :param p: probability in [0, 1]
    :return: float
    """
    n = len(sorted_values)
    h = (n - 1) * p
    lo = int(math.floor(h))
    if lo + 1 >= n:
        return float(sorted_values[n - 1])
    frac = h - lo
    return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))


def fit_quantile_bins(matrix, bins):
    """
    Cut every column at its q/B quantiles, q = 1..B-1.
    Duplicate cut points collapse, and cut points at or above the column
    maximum are dropped, so a column may end up with fewer than B bins.
    Constant columns get no cut points and are flagged.

    :param matrix: (N, m) real matrix
    :param bins: B >= 1
    :return: BinningModel
    """
    if isinstance(bins, bool) or int(bins) < 1:
        raise InvalidBins("bins must be >= 1, got %r" % (bins,))
    bins = int(bins)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.shape[0] < 1:
        raise DimensionMismatch("cannot fit bins on an empty matrix")

    boundaries, constant = [], []
    for column in matrix.T:
        v = np.sort(column)
        if v[0] == v[-1]:
            boundaries.append(np.zeros(0))
            constant.append(True)
            continue
        cuts = np.unique([quantile(v, q / bins) for q in range(1, bins)])
        cuts = cuts[cuts < v[-1]]
        cuts.setflags(write=False)
        boundaries.append(cuts)
        constant.append(False)

    return BinningModel(n_dims=matrix.shape[1],
                        bins_per_dim=bins,
                        boundaries=tuple(boundaries),
                        constant_dims=np.array(constant, dtype=bool))


def assign_bin(value, dim, model):
    """
    Number of cut points strictly below the value; a value equal to a cut
    point falls in the lower bin.
    :param value: float
    :param dim: dimension index
    :param model: BinningModel
    :return: int
    """
    if not 0 <= dim < model.n_dims:
        raise DimensionMismatch("dimension %d out of range" % dim)
    return int(np.searchsorted(model.boundaries[dim], value, side="left"))


def assign_bins(matrix, model):
    """
    Vectorized assign_bin over every cell
    :param matrix: (N, n_dims) real matrix
    :param model: BinningModel
    :return: (N, n_dims) int matrix
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.shape[1] != model.n_dims:
        raise DimensionMismatch("matrix has %d columns, model has %d dims"
                                % (matrix.shape[1], model.n_dims))
    codes = np.empty(matrix.shape, dtype=np.int64)
    for dim in range(model.n_dims):
        codes[:, dim] = np.searchsorted(model.boundaries[dim], matrix[:, dim], side="left")
    return codes


def to_transactions(matrix, labels, model):
    """
    Transaction i = { dim * B + bin(matrix[i, dim]) for every dim }

    :param matrix: (N, n_dims) real matrix
    :param labels: (N,) 0/1
    :param model: BinningModel
    :return: TransactionDb
    """
    codes = assign_bins(matrix, model)
    labels = np.asarray(labels)
    if labels.shape != (codes.shape[0],):
        raise DimensionMismatch("%d rows for %d labels" % (codes.shape[0], len(labels)))
    items = codes + np.arange(model.n_dims) * model.bins_per_dim
    return TransactionDb(transactions=tuple(tuple(row) for row in items.tolist()),
                         labels=labels,
                         n_items=model.n_dims * model.bins_per_dim,
                         n_dims=model.n_dims,
                         bins_per_dim=model.bins_per_dim)
