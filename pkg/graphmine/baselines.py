# -*- coding: utf-8 -*-
"""
graphmine: baselines

PCA by cyclic Jacobi rotations, and the three mining pipelines:

    embedding  standardize -> graph -> train -> embed -> discretize -> mine -> report
    raw        standardize -> discretize -> mine -> report
    pca        standardize -> pca -> discretize -> mine -> report
"""

import time
import logging
import dataclasses
import numpy as np
from . import utils, hooks
from .data import standardize, class_partition
from .graph import GraphConfig, build_graph
from .gnn import ModelDims, init_model
from .trainer import TrainConfig, train, extract_embeddings
from .discretizer import fit_quantile_bins, to_transactions
from .miner import fp_growth, maximal_patterns, mining_report
from .errors import (ConvergenceError,
                     RankRequestTooLarge,
                     DimensionMismatch,
                     DegenerateData)

__all__ = [
    "PcaModel",
    "PipelineVariant",
    "PipelineResult",
    "jacobi_eigh",
    "pca_fit",
    "pca_transform",
    "pca_reconstruct",
    "execute_pipeline",
    "run_pipeline",
]

log = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclasses.dataclass(frozen=True, eq=False)
class PcaModel(object):
    """
    :param mean: (d,) column means of the fitting data
    :param components: (r, d) orthonormal rows, by non-increasing eigenvalue
    :param eigenvalues: (r,) non-negative, non-increasing
    :param total_variance: trace of the covariance matrix
    """
    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    total_variance: float

    @property
    def rank(self):
        return self.components.shape[0]

    def explained_variance_ratio(self):
        if self.total_variance == 0:
            return np.zeros(self.rank)
        return self.eigenvalues / self.total_variance


@dataclasses.dataclass(frozen=True)
class PipelineVariant(object):
    tag: str

    TAGS = ("embedding", "raw", "pca")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError("variant must be one of %s, got %r" % (self.TAGS, self.tag))

    @classmethod
    def parse(cls, value):
        return value if isinstance(value, cls) else cls(str(value))

    @property
    def stages(self):
        middle = {"embedding": ["graph", "train", "embed"], "raw": [], "pca": ["pca"]}[self.tag]
        return tuple(["standardize"] + middle + ["discretize", "mine", "report"])


@dataclasses.dataclass(frozen=True, eq=False)
class PipelineResult(object):
    """
    Everything a pipeline run produced. `model`, `graph` and `history`
    are set for the embedding variant only.
    """
    report: object
    patterns: object
    db: object
    model: object = None
    graph: object = None
    history: object = None


# ------------------------------------------------------------------------------
# PCA

def jacobi_eigh(matrix):
    """
    Eigen decomposition of a symmetric matrix by cyclic Jacobi rotations,
    sweeping until the off-diagonal frobenius norm is at most
    1e-12 x max(1, ||A||_F). The off-diagonal norm is summed over the
    strict upper triangle, never as ||A||^2 - ||diag(A)||^2.

    :param matrix: (d, d) symmetric matrix
    :return: tuple (eigenvalues (d,) descending, eigenvectors (d, d) as columns)
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch("expected a square matrix, got shape %s" % (a.shape,))
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    a = (a + a.T) / 2.0
    d = a.shape[0]
    v = np.eye(d)
    tolerance = JACOBI_TOLERANCE * max(1.0, np.linalg.norm(a))

    upper = np.triu_indices(d, 1)

    def off_norm():
        return np.sqrt(2.0 * np.sum(a[upper] ** 2))

    sweeps = 0
    while off_norm() > tolerance:
        if sweeps == JACOBI_MAX_SWEEPS:
            raise ConvergenceError("jacobi did not converge in %d sweeps" % JACOBI_MAX_SWEEPS)
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                col_p, col_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * col_p - s * col_q
                v[:, q] = s * col_p + c * col_q
        sweeps += 1

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values, v = values[order], v[:, order]
    # largest-magnitude entry of every vector is positive
    pivots = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[pivots, np.arange(d)] < 0, -1.0, 1.0)
    log.debug("jacobi converged in %d sweeps", sweeps)
    return values, v * signs


def pca_fit(matrix, rank):
    """
    Classical PCA on the population covariance.

    :param matrix: (N, d) with N >= 2
    :param rank: 1 <= r <= d
    :return: PcaModel
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("expected an N x d matrix, got shape %s" % (x.shape,))
    n, d = x.shape
    if n < 2:
        raise DegenerateData("pca needs at least 2 rows")
    if isinstance(rank, bool) or int(rank) < 1:
        raise ValueError("rank must be >= 1, got %r" % (rank,))
    if int(rank) > d:
        raise RankRequestTooLarge("rank %d requested for %d dimensions" % (rank, d))
    rank = int(rank)

    mean = x.mean(axis=0)
    centered = x - mean
    covariance = centered.T @ centered / n
    values, vectors = jacobi_eigh(covariance)
    values = np.maximum(values, 0.0)
    return PcaModel(mean=mean,
                    components=vectors[:, :rank].T.copy(),
                    eigenvalues=values[:rank].copy(),
                    total_variance=float(np.trace(covariance)))


def pca_transform(model, matrix):
    """
    scores = (matrix - mean) . components^T
    :return: (N, r) matrix
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(model.mean):
        raise DimensionMismatch("expected %d columns, got shape %s" % (len(model.mean), x.shape))
    return (x - model.mean) @ model.components.T


def pca_reconstruct(model, scores):
    """
    Map scores back to the input space
    :return: (N, d) matrix
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != model.rank:
        raise DimensionMismatch("expected %d score columns, got shape %s"
                                % (model.rank, scores.shape))
    return scores @ model.components + model.mean


# ------------------------------------------------------------------------------
# Pipelines

def execute_pipeline(variant, dataset, config, timings=False):
    """
    Run one variant end to end. Every stage runs inside hooks.stage.
    Stochastic stages take sub-seeds derived from config.seed.

    :param variant: PipelineVariant or tag
    :param dataset: Dataset with both classes
    :param config: PipelineConfig
    :param timings: measure runtime_ms, else it is reported as 0
    :return: PipelineResult
    """
    variant = PipelineVariant.parse(variant)
    seed = config.get("seed")
    start = time.perf_counter()
    class_partition(dataset)
    model = graph = history = None
    embedding_dim = None
    graph_method = None

    with hooks.stage("standardize"):
        if config.get("data.standardize"):
            dataset, _ = standardize(dataset)

    if variant.tag == "embedding":
        graph_method = config.get("graph.method")
        embedding_dim = config.get("model.embedding_dim")
        with hooks.stage("graph"):
            graph = build_graph(dataset, GraphConfig.from_config(config),
                                seed=utils.derive_seed(seed, "sigma-sample"))
        with hooks.stage("train"):
            dims = ModelDims(input_dim=dataset.n_features,
                             hidden_dim=config.get("model.hidden_dim"),
                             embedding_dim=embedding_dim)
            initial = init_model(dims, utils.derive_seed(seed, "init"))
            history = train(initial, graph, dataset, TrainConfig.from_config(config))
            model = history.model
        with hooks.stage("embed"):
            matrix = extract_embeddings(model, graph, dataset)
    elif variant.tag == "pca":
        embedding_dim = min(config.get("model.embedding_dim"), dataset.n_features)
        with hooks.stage("pca"):
            pca = pca_fit(dataset.features, embedding_dim)
            matrix = pca_transform(pca, dataset.features)
    else:
        matrix = dataset.features

    with hooks.stage("discretize"):
        binning = fit_quantile_bins(matrix, config.get("discretize.bins"))
        db = to_transactions(matrix, dataset.labels, binning)

    with hooks.stage("mine"):
        patterns = fp_growth(db,
                             scope=config.get("mining.scope"),
                             min_support=config.get("mining.min_support"),
                             max_length=config.get("mining.max_length"))
        if config.get("mining.maximal_only"):
            patterns = maximal_patterns(patterns)

    with hooks.stage("report"):
        provenance = {
            "variant": variant.tag,
            "graph_method": graph_method,
            "embedding_dim": embedding_dim,
            "seed": seed,
            "config_digest": config.digest,
        }
        report = mining_report(patterns, db, provenance)
        if timings:
            report = report.replace(runtime_ms=round((time.perf_counter() - start) * 1000.0, 3))

    log.info("%s: %d patterns, coverage %.4f", variant.tag, report.num_patterns,
             report.minority_coverage)
    return PipelineResult(report=report, patterns=patterns, db=db,
                          model=model, graph=graph, history=history)


def run_pipeline(variant, dataset, config, timings=False):
    """
    :return: MiningReport
    """
    return execute_pipeline(variant, dataset, config, timings).report
