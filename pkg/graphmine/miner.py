# -*- coding: utf-8 -*-
"""
graphmine: miner

FP-Growth frequent itemset mining over a TransactionDb, a brute-force
Apriori oracle, and the report metrics: pattern count, average support,
average confidence and minority coverage.

Supports are counted within a scope: the minority transactions only
(default) or the full database. Confidence is always measured on the
full database, as the rule `pattern -> minority`.
"""

import math
import logging
import fractions
import itertools
import dataclasses
import numpy as np
import pandas as pd
from . import utils
from .errors import (EmptyScope,
                     NoMinority,
                     OracleTooLarge,
                     UndefinedConfidence,
                     IoError)

__all__ = [
    "SCOPES",
    "ORACLE_MAX_ITEMS",
    "Pattern",
    "PatternSet",
    "MiningReport",
    "FpTree",
    "min_count",
    "fp_growth",
    "apriori_oracle",
    "pattern_confidence",
    "minority_coverage",
    "mining_report",
    "maximal_patterns",
    "export_patterns",
]

log = logging.getLogger(__name__)

SCOPES = ("minority", "full")

ORACLE_MAX_ITEMS = 20


@dataclasses.dataclass(frozen=True)
class Pattern(object):
    items: tuple
    support_count: int
    support: float


@dataclasses.dataclass(frozen=True)
class PatternSet(object):
    """
    Mined patterns, sorted by size then item ids.
    """
    patterns: tuple
    scope: str
    scope_size: int
    min_support: float
    min_count: int
    max_length: int = None
    maximal: bool = False

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def counts(self):
        """
        :return: dict items -> support_count
        """
        return {p.items: p.support_count for p in self.patterns}


@dataclasses.dataclass(frozen=True)
class MiningReport(object):
    num_patterns: int
    avg_support: float
    avg_confidence: float
    minority_coverage: float
    variant: str = None
    graph_method: str = None
    embedding_dim: int = None
    seed: int = None
    config_digest: str = None
    runtime_ms: float = 0

    FIELDS = ("variant", "graph_method", "embedding_dim", "num_patterns", "avg_support",
              "avg_confidence", "minority_coverage", "seed", "config_digest", "runtime_ms")

    @property
    def empty(self):
        return self.num_patterns == 0

    def as_record(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


# ------------------------------------------------------------------------------
# Scope

def _check_min_support(min_support):
    if isinstance(min_support, bool) or not 0 < min_support <= 1:
        raise ValueError("min_support must be in (0, 1], got %r" % (min_support,))


def min_count(min_support, scope_size):
    """
    ceil(min_support x scope_size), computed on the decimal value of
    min_support so that 0.05 x 20 is exactly 1.
    """
    exact = fractions.Fraction(repr(float(min_support))) * scope_size
    return max(1, int(math.ceil(exact)))


def _scope_transactions(db, scope):
    if scope not in SCOPES:
        raise ValueError("scope must be one of %s, got %r" % (SCOPES, scope))
    if scope == "minority":
        rows = np.flatnonzero(db.minority_mask)
        if len(rows) == 0:
            raise EmptyScope("no minority transactions to mine")
    else:
        rows = np.arange(len(db))
        if len(rows) == 0:
            raise EmptyScope("no transactions to mine")
    return [db.transactions[r] for r in rows.tolist()]


def _pattern_set(counts, scope, scope_size, min_support, threshold, max_length):
    patterns = [Pattern(items=items, support_count=count, support=count / scope_size)
                for items, count in counts.items()]
    patterns.sort(key=lambda p: (len(p.items), p.items))
    return PatternSet(patterns=tuple(patterns),
                      scope=scope,
                      scope_size=scope_size,
                      min_support=min_support,
                      min_count=threshold,
                      max_length=max_length)


# ------------------------------------------------------------------------------
# FP-Growth

class FpNode(object):
    __slots__ = ("item", "count", "parent", "children", "link")

    def __init__(self, item, count, parent):
        self.item = item
        self.count = count
        self.parent = parent
        self.children = {}
        self.link = None


class FpTree(object):
    """
    Prefix tree over the frequent items of weighted transactions.
    Items are inserted in descending frequency, ties by ascending id.
    The header table links every node of an item in insertion order.
    """

    def __init__(self, transactions, min_count):
        """
        :param transactions: list of (items, count)
        :param min_count: int
        """
        frequency = {}
        for items, count in transactions:
            for item in items:
                frequency[item] = frequency.get(item, 0) + count
        self.frequency = {i: c for i, c in frequency.items() if c >= min_count}
        self.order = sorted(self.frequency, key=lambda i: (-self.frequency[i], i))
        rank = {item: r for r, item in enumerate(self.order)}

        self.root = FpNode(None, 0, None)
        self.header = {}
        tails = {}
        for items, count in transactions:
            node = self.root
            for item in sorted((i for i in items if i in rank), key=rank.get):
                child = node.children.get(item)
                if child is None:
                    child = FpNode(item, 0, node)
                    node.children[item] = child
                    if item in tails:
                        tails[item].link = child
                    else:
                        self.header[item] = child
                    tails[item] = child
                child.count += count
                node = child

    def __bool__(self):
        return bool(self.order)

    def chain(self, item):
        node = self.header.get(item)
        while node is not None:
            yield node
            node = node.link

    def prefix_paths(self, item):
        """
        Conditional pattern base of an item
        :return: list of (items, count)
        """
        paths = []
        for node in self.chain(item):
            path = []
            parent = node.parent
            while parent.item is not None:
                path.append(parent.item)
                parent = parent.parent
            if path:
                paths.append((path, node.count))
        return paths


def _grow(tree, suffix, threshold, max_length, out):
    for item in reversed(tree.order):
        itemset = tuple(sorted(suffix + (item,)))
        out[itemset] = tree.frequency[item]
        if max_length is not None and len(itemset) >= max_length:
            continue
        conditional = FpTree(tree.prefix_paths(item), threshold)
        if conditional:
            _grow(conditional, itemset, threshold, max_length, out)


def fp_growth(db, scope="minority", min_support=0.05, max_length=None):
    """
    Every itemset whose scope support count reaches ceil(min_support x scope_size).

    :param db: TransactionDb
    :param scope: "minority" or "full"
    :param min_support: float in (0, 1]
    :param max_length: longest itemset to report, None for unbounded
    :return: PatternSet
    """
    _check_min_support(min_support)
    transactions = _scope_transactions(db, scope)
    threshold = min_count(min_support, len(transactions))
    tree = FpTree([(t, 1) for t in transactions], threshold)
    counts = {}
    _grow(tree, (), threshold, max_length, counts)
    return _pattern_set(counts, scope, len(transactions), min_support, threshold, max_length)


def apriori_oracle(db, scope="minority", min_support=0.05, max_length=None):
    """
    Level-wise candidate generation with exhaustive counting.
    Only for small vocabularies.

    :param db: TransactionDb with at most ORACLE_MAX_ITEMS items
    :return: PatternSet
    """
    if db.n_items > ORACLE_MAX_ITEMS:
        raise OracleTooLarge("apriori oracle takes at most %d items, got %d"
                             % (ORACLE_MAX_ITEMS, db.n_items))
    _check_min_support(min_support)
    transactions = [frozenset(t) for t in _scope_transactions(db, scope)]
    threshold = min_count(min_support, len(transactions))

    def support(candidate):
        return sum(1 for t in transactions if candidate <= t)

    counts = {}
    level = []
    for item in sorted(set().union(*transactions)):
        count = support(frozenset([item]))
        if count >= threshold:
            level.append((item,))
            counts[(item,)] = count

    size = 1
    while level and (max_length is None or size < max_length):
        frequent = set(level)
        candidates = []
        for a, b in itertools.combinations(level, 2):
            if a[:-1] == b[:-1]:
                candidate = tuple(sorted(set(a) | set(b)))
                if all(s in frequent for s in itertools.combinations(candidate, size)):
                    candidates.append(candidate)
        level = []
        for candidate in sorted(set(candidates)):
            count = support(frozenset(candidate))
            if count >= threshold:
                level.append(candidate)
                counts[candidate] = count
        size += 1

    return _pattern_set(counts, scope, len(transactions), min_support, threshold, max_length)


# ------------------------------------------------------------------------------
# Metrics

def _items(pattern):
    return pattern.items if isinstance(pattern, Pattern) else tuple(pattern)


def pattern_confidence(pattern, db):
    """
    Confidence of the rule pattern -> minority, on the full database
    :param pattern: Pattern or item ids
    :param db: TransactionDb
    :return: float
    """
    holds = db.contains(_items(pattern))
    total = int(holds.sum())
    if total == 0:
        raise UndefinedConfidence("pattern %s occurs in no transaction" % (_items(pattern),))
    return int((holds & db.minority_mask).sum()) / total


def minority_coverage(patterns, db):
    """
    Share of the minority transactions that contain at least one pattern
    :param patterns: PatternSet or iterable of patterns
    :param db: TransactionDb
    :return: float
    """
    minority = db.minority_mask
    n_minority = int(minority.sum())
    if n_minority == 0:
        raise NoMinority("coverage needs at least one minority transaction")
    covered = np.zeros(len(db), dtype=bool)
    for pattern in patterns:
        covered |= db.contains(_items(pattern))
    return int((covered & minority).sum()) / n_minority


def mining_report(patterns, db, provenance=None):
    """
    :param patterns: PatternSet
    :param db: TransactionDb the patterns were mined from
    :param provenance: dict of MiningReport provenance fields
    :return: MiningReport
    """
    provenance = provenance or {}
    if len(patterns) == 0:
        log.warning("no pattern reached the minimum support, reporting zeros")
        return MiningReport(num_patterns=0, avg_support=0.0, avg_confidence=0.0,
                            minority_coverage=0.0, **provenance)

    confidences = []
    for pattern in patterns:
        try:
            confidences.append(pattern_confidence(pattern, db))
        except UndefinedConfidence:
            pass
    return MiningReport(num_patterns=len(patterns),
                        avg_support=math.fsum(p.support for p in patterns) / len(patterns),
                        avg_confidence=(math.fsum(confidences) / len(confidences)
                                        if confidences else 0.0),
                        minority_coverage=minority_coverage(patterns, db),
                        **provenance)


def maximal_patterns(pattern_set):
    """
    Keep the patterns that have no frequent proper superset
    :param pattern_set: PatternSet
    :return: PatternSet
    """
    itemsets = [frozenset(p.items) for p in pattern_set]
    keep = []
    for i, pattern in enumerate(pattern_set):
        if not any(len(other) > len(itemsets[i]) and itemsets[i] < other for other in itemsets):
            keep.append(pattern)
    return dataclasses.replace(pattern_set, patterns=tuple(keep), maximal=True)


def export_patterns(patterns, db, path):
    """
    Write `items;support;confidence` csv, items as `dim:bin` tokens joined by `|`
    :param patterns: PatternSet
    :param db: TransactionDb
    :param path: file path
    """
    rows = [{"items": "|".join(db.token(i) for i in p.items),
             "support": utils.format_float(p.support),
             "confidence": utils.format_float(pattern_confidence(p, db))}
            for p in patterns]
    frame = pd.DataFrame(rows, columns=["items", "support", "confidence"], dtype=object)
    try:
        utils.ensure_parent_dir(path)
        frame.to_csv(path, sep=";", index=False, lineterminator="\n")
    except OSError as ex:
        raise IoError("cannot write patterns to '%s': %s" % (path, ex))
