# -*- coding: utf-8 -*-
"""
graphmine: trainer

Hierarchical objective and the full-batch training loop.

    L = L_global + lambda * L_local

L_global is the class-weighted cross-entropy of the head predictions,
with w_i = 1 / |minority| for minority samples and beta / |majority| for
majority samples. L_local is a margin contrastive loss anchored on the
minority samples:

    L_local = mean_pos D_ij^2 + mean_neg max(0, m - D_ij)^2

Parameters are updated with Adam.
"""

import time
import logging
import fractions
import dataclasses
import numpy as np
from . import utils, hooks
from .data import class_partition
from .gnn import forward, backward
from .errors import LengthMismatch, NonFiniteLoss

__all__ = [
    "ClassWeighting",
    "TrainConfig",
    "LossBreakdown",
    "TrainHistory",
    "class_weights",
    "global_loss",
    "global_loss_gradient",
    "local_contrastive_loss",
    "total_loss",
    "objective",
    "train",
    "extract_embeddings",
]

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8


@dataclasses.dataclass(frozen=True, eq=False)
class ClassWeighting(object):
    """
    :param w_minority: 1 / |minority|
    :param w_majority: beta / |majority|
    :param beta: majority damping in (0, 1]
    :param weights: (N,) per-sample weights
    """
    w_minority: float
    w_majority: float
    beta: float
    n_minority: int
    n_majority: int
    weights: np.ndarray

    @property
    def exact_minority(self):
        return fractions.Fraction(1, self.n_minority)

    @property
    def exact_majority(self):
        return fractions.Fraction(self.beta) / self.n_majority

    def exact_weights(self, labels):
        """
        Rational weight of every sample
        :param labels: the labels the weighting was built from
        :return: list of Fraction
        """
        return [self.exact_minority if y == 1 else self.exact_majority for y in labels]


@dataclasses.dataclass(frozen=True)
class TrainConfig(object):
    learning_rate: float = 0.01
    epochs: int = 200
    lambda_: float = 0.5
    beta: float = 0.5
    margin: float = 1.0
    pos_pairs: int = 2
    neg_pairs: int = 2
    seed: int = 42
    clamp_epsilon: float = 1e-7

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0 < self.clamp_epsilon <= 1e-3:
            raise ValueError("clamp_epsilon must be in (0, 1e-3]")
        if self.lambda_ < 0:
            raise ValueError("lambda must be >= 0")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must be in (0, 1]")
        if not self.margin > 0:
            raise ValueError("margin must be > 0")

    @classmethod
    def from_config(cls, config, seed=None):
        """
        :param config: PipelineConfig
        :param seed: overrides config.seed, ie: a derived sub-seed
        """
        return cls(learning_rate=config.get("train.learning_rate"),
                   epochs=config.get("train.epochs"),
                   lambda_=config.get("train.lambda"),
                   beta=config.get("train.beta"),
                   margin=config.get("train.margin"),
                   pos_pairs=config.get("train.pos_pairs"),
                   neg_pairs=config.get("train.neg_pairs"),
                   seed=config.get("seed") if seed is None else seed,
                   clamp_epsilon=config.get("train.clamp_epsilon"))


@dataclasses.dataclass(frozen=True)
class LossBreakdown(object):
    total: float
    global_loss: float
    local_loss: float
    epoch: int = 0

    def as_csv(self):
        return ",".join([str(self.epoch)] + [utils.format_float(v) for v in
                                             (self.total, self.global_loss, self.local_loss)])


@dataclasses.dataclass(frozen=True, eq=False)
class TrainHistory(object):
    losses: tuple
    model: object
    epoch_seconds: tuple

    def __len__(self):
        return len(self.losses)


# ------------------------------------------------------------------------------
# Losses

def class_weights(labels, beta):
    """
    :param labels: 0/1 per sample
    :param beta: majority damping in (0, 1]
    :return: ClassWeighting
    """
    if not 0 < beta <= 1:
        raise ValueError("beta must be in (0, 1], got %r" % (beta,))
    labels = np.asarray(labels)
    majority, minority = class_partition(labels)
    w_min = 1.0 / len(minority)
    w_maj = beta / len(majority)
    weights = np.where(labels == 1, w_min, w_maj)
    weights.setflags(write=False)
    return ClassWeighting(w_minority=w_min, w_majority=w_maj, beta=beta,
                          n_minority=len(minority), n_majority=len(majority),
                          weights=weights)


def _check_lengths(predictions, labels, weights):
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if not predictions.shape == labels.shape == weights.shape:
        raise LengthMismatch("predictions %s, labels %s, weights %s"
                             % (predictions.shape, labels.shape, weights.shape))
    return predictions, labels, weights


def global_loss(predictions, labels, weights, epsilon=1e-7):
    """
    -sum_i w_i [y_i log y'_i + (1 - y_i) log(1 - y'_i)], y' clamped to [eps, 1 - eps]
    :return: float
    """
    p, y, w = _check_lengths(predictions, labels, weights)
    p = np.clip(p, epsilon, 1.0 - epsilon)
    terms = -w * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(np.sum(terms))


def global_loss_gradient(predictions, labels, weights, epsilon=1e-7):
    """
    d global_loss / d predictions, zero where the clamp is active
    :return: (N,) array
    """
    p, y, w = _check_lengths(predictions, labels, weights)
    clamped = (p < epsilon) | (p > 1.0 - epsilon)
    pc = np.clip(p, epsilon, 1.0 - epsilon)
    grad = -w * (y / pc - (1.0 - y) / (1.0 - pc))
    grad[clamped] = 0.0
    return grad


def _sample_pairs(labels, pos_pairs, neg_pairs, seed):
    """
    Anchors are the minority samples in index order. Each draws
    min(p, |minority| - 1) positives and min(q, |majority|) negatives
    uniformly without replacement.
    """
    rng = np.random.default_rng(seed)
    minority = np.flatnonzero(labels == 1)
    majority = np.flatnonzero(labels == 0)
    n_pos = min(int(pos_pairs), len(minority) - 1)
    n_neg = min(int(neg_pairs), len(majority))
    pos, neg = [], []
    for anchor in minority.tolist():
        partners = minority[minority != anchor]
        for j in rng.choice(partners, size=n_pos, replace=False).tolist():
            pos.append((anchor, j))
        for j in rng.choice(majority, size=n_neg, replace=False).tolist():
            neg.append((anchor, j))
    return (np.array(pos, dtype=np.int64).reshape(-1, 2),
            np.array(neg, dtype=np.int64).reshape(-1, 2))


def local_contrastive_loss(embeddings, labels, margin=1.0, pos_pairs=2, neg_pairs=2, seed=0):
    """
    Margin contrastive loss over sampled minority-anchored pairs.
    With fewer than 2 minority samples the loss is 0 and a warning is logged.

    :param embeddings: (N, k) matrix
    :param labels: (N,) 0/1
    :param margin: m > 0
    :param pos_pairs: positives per anchor
    :param neg_pairs: negatives per anchor
    :param seed: pair sampling seed
    :return: tuple (loss, (N, k) gradient)
    """
    e = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    if labels.shape != (e.shape[0],):
        raise LengthMismatch("%d embeddings for %d labels" % (e.shape[0], len(labels)))
    grad = np.zeros_like(e)
    n_minority = int(np.sum(labels == 1))
    if n_minority < 2:
        log.warning("insufficient minority: %d minority sample(s), local loss set to 0", n_minority)
        return 0.0, grad
    class_partition(labels)
    if pos_pairs < 1 or neg_pairs < 1:
        raise ValueError("pos_pairs and neg_pairs must be >= 1")

    pos, neg = _sample_pairs(labels, pos_pairs, neg_pairs, seed)

    diff = e[pos[:, 0]] - e[pos[:, 1]]
    sq = np.sum(diff * diff, axis=1)
    pos_loss = float(np.mean(sq))
    g = 2.0 * diff / len(pos)
    np.add.at(grad, pos[:, 0], g)
    np.add.at(grad, pos[:, 1], -g)

    diff = e[neg[:, 0]] - e[neg[:, 1]]
    dist = np.sqrt(np.sum(diff * diff, axis=1))
    gap = np.maximum(0.0, margin - dist)
    neg_loss = float(np.mean(gap * gap))
    active = (gap > 0) & (dist > 0)
    scale = np.zeros_like(dist)
    scale[active] = -2.0 * gap[active] / dist[active] / len(neg)
    g = scale[:, None] * diff
    np.add.at(grad, neg[:, 0], g)
    np.add.at(grad, neg[:, 1], -g)

    return pos_loss + neg_loss, grad


def total_loss(global_, local, lambda_, epoch=0):
    """
    :return: LossBreakdown with total = global + lambda * local
    """
    return LossBreakdown(total=global_ + lambda_ * local,
                         global_loss=global_,
                         local_loss=local,
                         epoch=epoch)


def objective(model, graph, features, labels, weighting, config, epoch=1):
    """
    Evaluate the combined loss and its gradients for one epoch.
    Pair sampling is seeded by (config.seed, epoch), so the same epoch
    always sees the same pairs.

    :param model: GnnModel
    :param graph: SampleGraph
    :param features: (N, d)
    :param labels: (N,)
    :param weighting: ClassWeighting
    :param config: TrainConfig
    :param epoch: 1-based epoch index
    :return: tuple (LossBreakdown, Gradients)
    """
    trace = forward(model, graph, features)
    eps = config.clamp_epsilon
    g_loss = global_loss(trace.predictions, labels, weighting.weights, eps)
    d_pred = global_loss_gradient(trace.predictions, labels, weighting.weights, eps)
    l_loss, d_emb = local_contrastive_loss(trace.z2, labels,
                                           margin=config.margin,
                                           pos_pairs=config.pos_pairs,
                                           neg_pairs=config.neg_pairs,
                                           seed=utils.derive_seed(config.seed, "local-pairs", epoch))
    breakdown = total_loss(g_loss, l_loss, config.lambda_, epoch)
    grads = backward(model, graph, trace, d_pred, config.lambda_ * d_emb)
    return breakdown, grads


def train(model, graph, dataset, config):
    """
    Full-batch Adam on the combined objective, for exactly config.epochs updates.
    Sends hooks.epoch_finished after every epoch.

    :param model: GnnModel, the initial parameters
    :param graph: SampleGraph
    :param dataset: Dataset
    :param config: TrainConfig
    :return: TrainHistory
    """
    class_partition(dataset)
    weighting = class_weights(dataset.labels, config.beta)
    features, labels = dataset.features, dataset.labels

    params = model.parameters()
    m = {name: np.zeros_like(v) for name, v in params.items()}
    v = {name: np.zeros_like(p) for name, p in params.items()}
    losses, seconds = [], []

    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        breakdown, grads = objective(model, graph, features, labels, weighting, config, epoch)
        gradients = grads.parameters()
        if not np.isfinite(breakdown.total) or \
                not all(np.all(np.isfinite(g)) for g in gradients.values()):
            raise NonFiniteLoss(epoch)

        updated = {}
        for name, value in model.parameters().items():
            g = gradients[name]
            m[name] = ADAM_BETA1 * m[name] + (1.0 - ADAM_BETA1) * g
            v[name] = ADAM_BETA2 * v[name] + (1.0 - ADAM_BETA2) * g * g
            m_hat = m[name] / (1.0 - ADAM_BETA1 ** epoch)
            v_hat = v[name] / (1.0 - ADAM_BETA2 ** epoch)
            updated[name] = value - config.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPSILON)
        model = model.replace(**updated)

        elapsed = time.perf_counter() - start
        losses.append(breakdown)
        seconds.append(elapsed)
        hooks.epoch_finished.send(breakdown, elapsed=elapsed)

    if losses:
        log.info("trained %d epochs, loss %.6f -> %.6f", len(losses), losses[0].total, losses[-1].total)
    return TrainHistory(losses=tuple(losses), model=model, epoch_seconds=tuple(seconds))


def extract_embeddings(model, graph, dataset):
    """
    Embeddings of a fresh forward pass
    :param model: GnnModel
    :param graph: SampleGraph
    :param dataset: Dataset or (N, d) matrix
    :return: (N, k) matrix
    """
    features = getattr(dataset, "features", dataset)
    return forward(model, graph, features).z2
