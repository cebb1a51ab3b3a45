# -*- coding: utf-8 -*-
"""
graphmine: graph

Sample-similarity graph G = (V, E) over the rows of a dataset.

Four constructors: knn, complete, mutual_information, adaptive_threshold.
Every node carries a self-loop of raw weight 1, raw weights are symmetric,
and normalized weights are row-stochastic:

    norm(i, j) = raw(i, j) / sum_{k in N(i)} raw(i, k)

Adjacency is stored in CSR form with neighbors sorted by index, so every
aggregation sums in a fixed order.
"""

import math
import logging
import dataclasses
import numpy as np
import pandas as pd
from . import utils
from .discretizer import fit_quantile_bins, assign_bins
from .errors import (NonPositiveSigma,
                     DegenerateData,
                     InvalidK,
                     InvalidBins,
                     ZeroNeighborhood,
                     DimensionMismatch,
                     IoError)

__all__ = [
    "METHODS",
    "SampleGraph",
    "GraphConfig",
    "gaussian_similarity",
    "median_bandwidth",
    "build_knn_graph",
    "build_complete_graph",
    "build_mutual_information_graph",
    "build_adaptive_threshold_graph",
    "normalize_neighborhood",
    "build_graph",
    "export_edge_list",
    "degree_stats",
]

log = logging.getLogger(__name__)

METHODS = ("knn", "complete", "mutual_information", "adaptive_threshold")

# rows per block when computing pairwise quantities
_BLOCK_ROWS = 64

# CSR entries per block when propagating features
_BLOCK_ENTRIES = 1 << 18


@dataclasses.dataclass(frozen=True, eq=False)
class SampleGraph(object):
    """
    Undirected weighted graph with row-stochastic aggregation weights.

    :param n_nodes: number of samples
    :param indptr: (n_nodes + 1,) CSR row pointer
    :param indices: neighbor index of every entry, sorted within a row
    :param raw: raw similarity of every entry, in (0, 1]
    :param norm: normalized weight of every entry, rows sum to 1
    :param method: constructor tag
    :param sigma: gaussian bandwidth, None for mutual_information
    """
    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    raw: np.ndarray
    norm: np.ndarray
    method: str
    sigma: float = None

    def __post_init__(self):
        for name, dtype in (("indptr", np.int64), ("indices", np.int64),
                            ("raw", np.float64), ("norm", np.float64)):
            value = np.array(getattr(self, name), dtype=dtype, copy=True)
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        if len(self.indptr) != self.n_nodes + 1:
            raise ValueError("indptr must have n_nodes + 1 entries")
        rows = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
        # position of the mirrored entry (j, i) of every entry (i, j)
        keys = rows * self.n_nodes + self.indices
        mirrored = self.indices * self.n_nodes + rows
        mirror = np.minimum(np.searchsorted(keys, mirrored), max(len(keys) - 1, 0))
        if len(keys) and np.any(keys[mirror] != mirrored):
            raise ValueError("adjacency must be symmetric")
        tnorm = self.norm[mirror]
        tnorm.setflags(write=False)
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_tnorm", tnorm)

    @property
    def n_entries(self):
        return len(self.indices)

    @property
    def n_edges(self):
        """
        Undirected edges, self-loops excluded
        """
        return (self.n_entries - self.n_nodes) // 2

    def neighbors(self, i):
        """
        Neighborhood of a node
        :param i: node index
        :return: list of tuples (neighbor, raw_weight, norm_weight)
        """
        s = slice(self.indptr[i], self.indptr[i + 1])
        return list(zip(self.indices[s].tolist(), self.raw[s].tolist(), self.norm[s].tolist()))

    def degrees(self):
        """
        Number of neighbors of every node, self-loop excluded
        """
        return np.diff(self.indptr) - 1

    def propagate(self, h):
        """
        agg_i = sum_j norm(i, j) * h_j, summed over the sorted neighbor list
        :param h: (n_nodes, f) matrix
        :return: (n_nodes, f) matrix
        """
        return self._reduce(self.norm, h)

    def propagate_transpose(self, g):
        """
        Transpose of propagate: out_j = sum_i norm(i, j) * g_i.
        Raw edges are symmetric, so entry (j, i) exists for every (i, j)
        and the transpose reuses the same CSR layout.
        :param g: (n_nodes, f) matrix
        :return: (n_nodes, f) matrix
        """
        return self._reduce(self._tnorm, g)

    def _reduce(self, weights, h):
        h = np.asarray(h, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != self.n_nodes:
            raise DimensionMismatch("expected %d rows, got shape %s" % (self.n_nodes, h.shape))
        out = np.empty_like(h)
        for start, stop in self._row_blocks():
            a, b = self.indptr[start], self.indptr[stop]
            values = weights[a:b, None] * h[self.indices[a:b]]
            out[start:stop] = np.add.reduceat(values, self.indptr[start:stop] - a, axis=0)
        return out

    def _row_blocks(self):
        blocks = getattr(self, "_blocks", None)
        if blocks is None:
            blocks, start = [], 0
            while start < self.n_nodes:
                limit = self.indptr[start] + _BLOCK_ENTRIES
                stop = max(start + 1, int(np.searchsorted(self.indptr, limit, side="right")) - 1)
                stop = min(stop, self.n_nodes)
                blocks.append((start, stop))
                start = stop
            object.__setattr__(self, "_blocks", blocks)
        return blocks

    def edge_list(self):
        """
        Every directed entry (src, dst, raw_weight, norm_weight), self-loops included
        :return: tuple of arrays
        """
        return self._rows, self.indices, self.raw, self.norm

    def digest(self):
        """
        SHA-256 of the canonical serialization
        """
        header = utils.to_json({"n_nodes": self.n_nodes, "method": self.method, "sigma": self.sigma})
        return utils.gen_sha256(header.encode()
                                + self.indptr.astype("<i8").tobytes()
                                + self.indices.astype("<i8").tobytes()
                                + self.raw.astype("<f8").tobytes()
                                + self.norm.astype("<f8").tobytes())


@dataclasses.dataclass(frozen=True)
class GraphConfig(object):
    """
    :param method: one of METHODS
    :param k: neighbors per node (knn, mutual_information)
    :param alpha: adaptive threshold multiplier
    :param mi_bins: quantile bins per feature (mutual_information)
    :param sigma_mode: "auto" (median heuristic) or a positive float
    :param sigma_sample_cap: rows used by the median heuristic
    """
    method: str = "knn"
    k: int = 10
    alpha: float = 1.0
    mi_bins: int = 4
    sigma_mode: object = "auto"
    sigma_sample_cap: int = 2000

    @classmethod
    def from_config(cls, config):
        """
        :param config: PipelineConfig
        """
        return cls(method=config.get("graph.method"),
                   k=config.get("graph.k"),
                   alpha=config.get("graph.alpha"),
                   mi_bins=config.get("graph.mi_bins"),
                   sigma_mode=config.get("graph.sigma_mode"),
                   sigma_sample_cap=config.get("graph.sigma_sample_cap"))


# ------------------------------------------------------------------------------
# Similarity

def _as_matrix(dataset):
    x = getattr(dataset, "features", dataset)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    return x


def _check_sigma(sigma):
    if sigma is None or not sigma > 0 or not math.isfinite(sigma):
        raise NonPositiveSigma("sigma must be a finite number > 0, got %r" % (sigma,))
    return float(sigma)


def _distances(a, b):
    """
    Euclidean distances between the rows of a and b, (len(a), len(b)).
    Each entry is sqrt(sum((a_i - b_j)^2)), the same arithmetic as
    gaussian_similarity.
    """
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _pair_distances(x, pairs_i, pairs_j):
    """
    Euclidean distance of every listed pair, chunked over the pair list.
    Every weight stored in a graph goes through here.
    """
    out = np.empty(len(pairs_i))
    for start, stop in utils.block_ranges(len(pairs_i), _BLOCK_ENTRIES // 4):
        diff = x[pairs_i[start:stop]] - x[pairs_j[start:stop]]
        out[start:stop] = np.sqrt(np.sum(diff * diff, axis=-1))
    return out


def _kernel(distances, sigma):
    """
    exp(-distance / sigma) computed per value with math.exp, so that graph
    weights and gaussian_similarity agree bit for bit.
    """
    flat = [math.exp(-d / sigma) for d in np.ravel(distances).tolist()]
    return np.array(flat, dtype=np.float64).reshape(np.shape(distances))


def gaussian_similarity(x_i, x_j, sigma):
    """
    e_ij = exp(-||x_i - x_j||_2 / sigma)

    The exponent uses the unsquared L2 distance.

    :param x_i: vector
    :param x_j: vector, same length
    :param sigma: bandwidth > 0
    :return: float in (0, 1]
    """
    sigma = _check_sigma(sigma)
    x_i = np.asarray(x_i, dtype=np.float64).ravel()
    x_j = np.asarray(x_j, dtype=np.float64).ravel()
    if x_i.shape != x_j.shape:
        raise DimensionMismatch("vectors of length %d and %d" % (len(x_i), len(x_j)))
    pair = np.zeros(1, dtype=np.int64)
    distance = _pair_distances(np.vstack([x_i, x_j]), pair, pair + 1)
    return float(_kernel(distance, sigma)[0])


def median_bandwidth(dataset, sample_cap=2000, seed=0):
    """
    Median heuristic for sigma: median of the pairwise euclidean distances,
    over all rows when N <= sample_cap, else over a seeded uniform subsample
    of sample_cap rows. A zero median falls back to the mean of the
    strictly positive distances.

    :param dataset: Dataset or matrix
    :param sample_cap: int
    :param seed: int
    :return: float
    """
    x = _as_matrix(dataset)
    n = x.shape[0]
    if n < 2:
        raise DegenerateData("median bandwidth needs at least 2 rows")
    if n > sample_cap:
        rng = np.random.default_rng(seed)
        x = x[np.sort(rng.choice(n, size=sample_cap, replace=False))]
        n = sample_cap

    parts = []
    for start, stop in utils.block_ranges(n, _BLOCK_ROWS):
        block = _distances(x[start:stop], x)
        for r in range(stop - start):
            parts.append(block[r, start + r + 1:])
    distances = np.concatenate(parts)

    sigma = float(np.median(distances))
    if sigma == 0.0:
        positive = distances[distances > 0]
        if len(positive) == 0:
            raise DegenerateData("all pairwise distances are zero")
        sigma = float(positive.mean())
    return sigma


# ------------------------------------------------------------------------------
# Constructors

def _assemble(n, pairs_i, pairs_j, weights, method, sigma):
    """
    Build the CSR graph from undirected pairs i < j and their raw weights.
    Exact-zero weights are dropped; a self-loop of weight 1 is added to
    every node; norm weights are computed last.
    """
    pairs_i = np.asarray(pairs_i, dtype=np.int64)
    pairs_j = np.asarray(pairs_j, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    keep = weights > 0.0
    pairs_i, pairs_j, weights = pairs_i[keep], pairs_j[keep], weights[keep]

    loops = np.arange(n, dtype=np.int64)
    rows = np.concatenate([pairs_i, pairs_j, loops])
    cols = np.concatenate([pairs_j, pairs_i, loops])
    raw = np.concatenate([weights, weights, np.ones(n)])

    order = np.lexsort((cols, rows))
    rows, cols, raw = rows[order], cols[order], raw[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

    graph = SampleGraph(n_nodes=n, indptr=indptr, indices=cols, raw=raw,
                        norm=np.zeros_like(raw), method=method, sigma=sigma)
    return normalize_neighborhood(graph)


def _union_pairs(n, directed_i, directed_j):
    """
    Undirected pairs (min, max) from directed edges, de-duplicated and sorted
    """
    directed_i = np.asarray(directed_i, dtype=np.int64)
    directed_j = np.asarray(directed_j, dtype=np.int64)
    lo = np.minimum(directed_i, directed_j)
    hi = np.maximum(directed_i, directed_j)
    keys = np.unique(lo * n + hi)
    return keys // n, keys % n


def _top_neighbors(scores_block, k, largest):
    """
    k best columns per row of a block, ties broken by lower index.
    The row's own column must already be excluded by the caller.
    """
    keys = -scores_block if largest else scores_block
    return np.argsort(keys, axis=1, kind="stable")[:, :k]


def build_knn_graph(dataset, k, sigma):
    """
    Link every node to its k nearest neighbors by euclidean distance
    (ties to the lower index), symmetrize by union, weight with the
    gaussian kernel.

    :param dataset: Dataset or matrix
    :param k: 1 <= k <= N - 1
    :param sigma: bandwidth
    :return: SampleGraph
    """
    sigma = _check_sigma(sigma)
    x = _as_matrix(dataset)
    n = x.shape[0]
    if isinstance(k, bool) or not 1 <= int(k) <= n - 1:
        raise InvalidK("k must be in [1, %d], got %r" % (n - 1, k))
    k = int(k)

    src, dst = [], []
    for start, stop in utils.block_ranges(n, _BLOCK_ROWS):
        block = _distances(x[start:stop], x)
        block[np.arange(stop - start), np.arange(start, stop)] = np.inf
        nearest = _top_neighbors(block, k, largest=False)
        src.append(np.repeat(np.arange(start, stop), k))
        dst.append(nearest.ravel())

    pairs_i, pairs_j = _union_pairs(n, np.concatenate(src), np.concatenate(dst))
    weights = _kernel(_pair_distances(x, pairs_i, pairs_j), sigma)
    return _assemble(n, pairs_i, pairs_j, weights, "knn", sigma)


def _upper_weights(x, sigma):
    """
    Gaussian weight of every pair i < j, in triu_indices order
    """
    pairs_i, pairs_j = np.triu_indices(x.shape[0], 1)
    return pairs_i, pairs_j, _kernel(_pair_distances(x, pairs_i, pairs_j), sigma)


def _all_pairs_similarity(x, sigma):
    """
    Full symmetric similarity matrix with a unit diagonal
    """
    n = x.shape[0]
    pairs_i, pairs_j, weights = _upper_weights(x, sigma)
    sim = np.eye(n)
    sim[pairs_i, pairs_j] = weights
    sim[pairs_j, pairs_i] = weights
    return sim


def build_complete_graph(dataset, sigma):
    """
    Connect all N(N - 1) / 2 pairs with gaussian weights.

    :param dataset: Dataset or matrix
    :param sigma: bandwidth
    :return: SampleGraph
    """
    sigma = _check_sigma(sigma)
    x = _as_matrix(dataset)
    pairs_i, pairs_j, weights = _upper_weights(x, sigma)
    return _assemble(x.shape[0], pairs_i, pairs_j, weights, "complete", sigma)


def _bin_codes(x, mi_bins):
    """
    Per-feature quantile bin of every cell, (N, d) ints in [0, mi_bins)
    """
    return assign_bins(x, fit_quantile_bins(x, mi_bins))


def _entropy(counts, total):
    p = counts / total
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, p * np.log(p), 0.0)
    return -terms.sum(axis=-1)


def _nmi_block(codes_block, codes, mi_bins):
    """
    Normalized mutual information between every row of codes_block and every
    row of codes, each row read as a sequence of d symbols.
    NMI = MI / min(H_a, H_b) with MI = H_a + H_b - H_ab. When the smaller
    entropy is 0 the score is 1 for identical rows and 0 otherwise.
    Identical rows always score exactly 1.
    """
    d = codes.shape[1]
    symbols = np.arange(mi_bins)
    counts_a = (codes_block[:, :, None] == symbols).sum(axis=1)
    counts_b = (codes[:, :, None] == symbols).sum(axis=1)
    h_a = _entropy(counts_a, d)
    h_b = _entropy(counts_b, d)

    joint = codes_block[:, None, :] * mi_bins + codes[None, :, :]
    cells = np.arange(mi_bins * mi_bins)
    joint_counts = np.stack([(joint == c).sum(axis=-1) for c in cells], axis=-1)
    h_ab = _entropy(joint_counts, d)

    mi = h_a[:, None] + h_b[None, :] - h_ab
    floor = np.minimum(h_a[:, None], h_b[None, :])
    identical = (codes_block[:, None, :] == codes[None, :, :]).all(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        nmi = np.where(floor > 0, mi / floor, 0.0)
    nmi = np.clip(nmi, 0.0, 1.0)
    nmi[identical] = 1.0
    return nmi


def build_mutual_information_graph(dataset, mi_bins, k):
    """
    Pairwise-sample normalized mutual information graph.
    Every feature is cut into mi_bins quantile bins, each sample becomes a
    sequence of bin symbols, and samples are compared by the NMI of their
    symbol sequences. The k highest-NMI neighbors of each node are kept
    (ties to the lower index), symmetrized by union; zero scores are dropped.

    :param dataset: Dataset or matrix
    :param mi_bins: bins per feature, >= 2
    :param k: neighbors per node
    :return: SampleGraph
    """
    x = _as_matrix(dataset)
    n, d = x.shape
    if isinstance(mi_bins, bool) or int(mi_bins) < 2:
        raise InvalidBins("mi_bins must be >= 2, got %r" % (mi_bins,))
    if isinstance(k, bool) or not 1 <= int(k) <= max(1, n - 1) or n < 2:
        raise InvalidK("k must be in [1, %d], got %r" % (n - 1, k))
    mi_bins, k = int(mi_bins), int(k)
    if d < mi_bins:
        log.warning("mutual information graph: %d features for %d bins, scores will be coarse",
                    d, mi_bins)

    codes = _bin_codes(x, mi_bins)
    nmi = np.empty((n, n))
    for start, stop in utils.block_ranges(n, _BLOCK_ROWS // 2):
        nmi[start:stop] = _nmi_block(codes[start:stop], codes, mi_bins)
    # one value per undirected pair, taken from the upper triangle
    upper = np.triu(nmi, 1)
    nmi = upper + upper.T

    scores = nmi.copy()
    np.fill_diagonal(scores, -np.inf)
    nearest = _top_neighbors(scores, k, largest=True)
    pairs_i, pairs_j = _union_pairs(n, np.repeat(np.arange(n), k), nearest.ravel())
    return _assemble(n, pairs_i, pairs_j, nmi[pairs_i, pairs_j], "mutual_information", None)


def build_adaptive_threshold_graph(dataset, alpha, sigma):
    """
    Keep the directed edge i -> j when e_ij >= mu_i + alpha * s_i, with
    mu_i and s_i the mean and population std of node i's similarities to
    every other node; symmetrize by union.

    :param dataset: Dataset or matrix
    :param alpha: threshold multiplier
    :param sigma: bandwidth
    :return: SampleGraph
    """
    sigma = _check_sigma(sigma)
    x = _as_matrix(dataset)
    n = x.shape[0]
    if n < 2:
        raise DegenerateData("adaptive threshold graph needs at least 2 rows")
    sim = _all_pairs_similarity(x, sigma)
    off = ~np.eye(n, dtype=bool)
    others = sim[off].reshape(n, n - 1)
    threshold = others.mean(axis=1) + float(alpha) * others.std(axis=1)

    keep = (sim >= threshold[:, None]) & off
    src, dst = np.nonzero(keep)
    pairs_i, pairs_j = _union_pairs(n, src, dst)
    return _assemble(n, pairs_i, pairs_j, sim[pairs_i, pairs_j], "adaptive_threshold", sigma)


def normalize_neighborhood(graph):
    """
    norm(i, j) = raw(i, j) / sum_{k in N(i)} raw(i, k)

    :param graph: SampleGraph
    :return: SampleGraph with fresh norm weights
    """
    if np.any(np.diff(graph.indptr) == 0):
        raise ZeroNeighborhood("every node needs at least one neighbor")
    totals = np.add.reduceat(graph.raw, graph.indptr[:-1])
    if not np.all(totals > 0):
        raise ZeroNeighborhood("every node needs a neighborhood of positive weight")
    norm = graph.raw / np.repeat(totals, np.diff(graph.indptr))
    return SampleGraph(n_nodes=graph.n_nodes,
                       indptr=np.array(graph.indptr),
                       indices=np.array(graph.indices),
                       raw=np.array(graph.raw),
                       norm=norm,
                       method=graph.method,
                       sigma=graph.sigma)


def build_graph(dataset, config, seed=0):
    """
    Build the graph named by a GraphConfig.
    sigma_mode "auto" resolves sigma with the median heuristic.

    :param dataset: Dataset or matrix
    :param config: GraphConfig
    :param seed: seed for the bandwidth subsample
    :return: SampleGraph
    """
    if config.method == "mutual_information":
        return build_mutual_information_graph(dataset, config.mi_bins, config.k)

    if config.sigma_mode == "auto":
        sigma = median_bandwidth(dataset, config.sigma_sample_cap, seed)
    else:
        sigma = config.sigma_mode
    log.info("graph %s, sigma=%s", config.method, sigma)

    if config.method == "knn":
        return build_knn_graph(dataset, config.k, sigma)
    elif config.method == "complete":
        return build_complete_graph(dataset, sigma)
    elif config.method == "adaptive_threshold":
        return build_adaptive_threshold_graph(dataset, config.alpha, sigma)
    raise ValueError("unknown graph method '%s'" % config.method)


# ------------------------------------------------------------------------------
# Export

def export_edge_list(graph, path):
    """
    Write every directed entry as csv `src,dst,raw_weight,norm_weight`
    :param graph: SampleGraph
    :param path: file path
    """
    src, dst, raw, norm = graph.edge_list()
    frame = pd.DataFrame({"src": src.tolist(),
                          "dst": dst.tolist(),
                          "raw_weight": [utils.format_float(r) for r in raw.tolist()],
                          "norm_weight": [utils.format_float(w) for w in norm.tolist()]},
                         columns=["src", "dst", "raw_weight", "norm_weight"])
    try:
        utils.ensure_parent_dir(path)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as ex:
        raise IoError("cannot write edge list '%s': %s" % (path, ex))


def degree_stats(graph, labels):
    """
    Per-class degree statistics, self-loops excluded.

    :param graph: SampleGraph
    :param labels: (N,) 0/1 labels
    :return: dict
    """
    labels = np.asarray(labels)
    if labels.shape != (graph.n_nodes,):
        raise DimensionMismatch("one label per node is required")
    src, dst, raw, _ = graph.edge_list()
    not_loop = src != dst
    degree = graph.degrees()
    weighted = np.bincount(src[not_loop], weights=raw[not_loop], minlength=graph.n_nodes)
    cross = labels[src[not_loop]] != labels[dst[not_loop]]

    stats = {
        "n_nodes": graph.n_nodes,
        "n_edges": graph.n_edges,
        "method": graph.method,
        "sigma": graph.sigma,
        "cross_class_edge_share": float(cross.mean()) if cross.size else 0.0,
        "classes": {}
    }
    for name, value in (("majority", 0), ("minority", 1)):
        mask = labels == value
        if not mask.any():
            continue
        stats["classes"][name] = {
            "n_nodes": int(mask.sum()),
            "mean_degree": float(degree[mask].mean()),
            "min_degree": int(degree[mask].min()),
            "max_degree": int(degree[mask].max()),
            "mean_weighted_degree": float(weighted[mask].mean()),
        }
    return stats
