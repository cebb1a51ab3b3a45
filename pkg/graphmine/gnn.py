# -*- coding: utf-8 -*-
"""
graphmine: gnn

Two-layer weighted graph convolution network with a logistic head.

    agg1 = A h0          z1 = agg1 W1^T + b1      h1 = relu(z1)
    agg2 = A h1          z2 = agg2 W2^T + b2      (embeddings)
    logits = z2 w_out + b_out                     predictions = sigmoid(logits)

A is the row-stochastic aggregation operator of a SampleGraph.
Gradients are computed by hand, the aggregation backward uses A^T.
"""

import json
import logging
import collections
import dataclasses
import numpy as np
from . import utils
from .errors import DimensionMismatch, CheckpointError, IoError

__all__ = [
    "ModelDims",
    "GnnModel",
    "ForwardTrace",
    "Gradients",
    "PARAMETER_NAMES",
    "init_model",
    "forward",
    "backward",
    "save_model",
    "load_model",
]

log = logging.getLogger(__name__)

PARAMETER_NAMES = ("W1", "b1", "W2", "b2", "w_out", "b_out")

CHECKPOINT_FORMAT = "graphmine-model"
CHECKPOINT_VERSION = 1


@dataclasses.dataclass(frozen=True)
class ModelDims(object):
    input_dim: int
    hidden_dim: int = 64
    embedding_dim: int = 128

    def __post_init__(self):
        for name, value in dataclasses.asdict(self).items():
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError("%s must be an integer >= 1, got %r" % (name, value))

    def shapes(self):
        d, h, k = self.input_dim, self.hidden_dim, self.embedding_dim
        return collections.OrderedDict([("W1", (h, d)), ("b1", (h,)),
                                        ("W2", (k, h)), ("b2", (k,)),
                                        ("w_out", (k,)), ("b_out", (1,))])


@dataclasses.dataclass(frozen=True, eq=False)
class GnnModel(object):
    """
    Parameters are float64 arrays. A model is never updated in place,
    `replace` returns a new one.
    """
    dims: ModelDims
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray
    seed: int = 0

    def __post_init__(self):
        for name, shape in self.dims.shapes().items():
            value = np.array(getattr(self, name), dtype=np.float64, copy=True)
            if value.shape != shape:
                raise DimensionMismatch("%s has shape %s, expected %s" % (name, value.shape, shape))
            if not np.all(np.isfinite(value)):
                raise ValueError("%s has non finite values" % name)
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def parameters(self):
        """
        Ordered view of the parameters
        :return: OrderedDict name -> array
        """
        return collections.OrderedDict((name, getattr(self, name)) for name in PARAMETER_NAMES)

    def replace(self, **parameters):
        return dataclasses.replace(self, **parameters)

    def equals(self, other):
        """
        Bit-exact comparison of dims, seed and every parameter
        """
        return (self.dims == other.dims
                and self.seed == other.seed
                and all(np.array_equal(a, b) for a, b in
                        zip(self.parameters().values(), other.parameters().values())))


@dataclasses.dataclass(frozen=True, eq=False)
class ForwardTrace(object):
    h0: np.ndarray
    agg1: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    agg2: np.ndarray
    z2: np.ndarray
    logits: np.ndarray
    predictions: np.ndarray

    @property
    def embeddings(self):
        return self.z2


@dataclasses.dataclass(frozen=True, eq=False)
class Gradients(object):
    """
    Parameter gradients, plus the total gradient reaching the embeddings
    """
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray
    embeddings: np.ndarray

    def parameters(self):
        return collections.OrderedDict((name, getattr(self, name)) for name in PARAMETER_NAMES)


# ------------------------------------------------------------------------------

def _glorot(rng, fan_out, fan_in, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_model(dims, seed):
    """
    Glorot-uniform weights, zero biases.
    :param dims: ModelDims
    :param seed: int
    :return: GnnModel
    """
    rng = np.random.default_rng(seed)
    d, h, k = dims.input_dim, dims.hidden_dim, dims.embedding_dim
    return GnnModel(dims=dims,
                    W1=_glorot(rng, h, d, (h, d)),
                    b1=np.zeros(h),
                    W2=_glorot(rng, k, h, (k, h)),
                    b2=np.zeros(k),
                    w_out=_glorot(rng, 1, k, (k,)),
                    b_out=np.zeros(1),
                    seed=int(seed))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def forward(model, graph, features):
    """
    :param model: GnnModel
    :param graph: SampleGraph over the same N samples
    :param features: (N, d) matrix
    :return: ForwardTrace
    """
    h0 = np.asarray(features, dtype=np.float64)
    if h0.ndim != 2 or h0.shape[1] != model.dims.input_dim:
        raise DimensionMismatch("features of shape %s for input_dim %d"
                                % (h0.shape, model.dims.input_dim))
    if h0.shape[0] != graph.n_nodes:
        raise DimensionMismatch("%d feature rows for a graph of %d nodes"
                                % (h0.shape[0], graph.n_nodes))

    agg1 = graph.propagate(h0)
    z1 = agg1 @ model.W1.T + model.b1
    h1 = np.maximum(z1, 0.0)
    agg2 = graph.propagate(h1)
    z2 = agg2 @ model.W2.T + model.b2
    logits = z2 @ model.w_out + model.b_out[0]
    return ForwardTrace(h0=h0, agg1=agg1, z1=z1, h1=h1, agg2=agg2, z2=z2,
                        logits=logits, predictions=_sigmoid(logits))


def backward(model, graph, trace, d_predictions, d_embeddings=None):
    """
    Reverse pass of `forward`.

    :param model: GnnModel used for the trace
    :param graph: SampleGraph used for the trace
    :param trace: ForwardTrace
    :param d_predictions: (N,) dL/dy'
    :param d_embeddings: (N, k) dL/dE from losses defined on the embeddings, or None
    :return: Gradients
    """
    n, k = trace.z2.shape
    d_pred = np.asarray(d_predictions, dtype=np.float64)
    if d_pred.shape != (n,):
        raise DimensionMismatch("d_predictions of shape %s for %d nodes" % (d_pred.shape, n))
    if d_embeddings is None:
        d_emb = np.zeros((n, k))
    else:
        d_emb = np.asarray(d_embeddings, dtype=np.float64)
        if d_emb.shape != (n, k):
            raise DimensionMismatch("d_embeddings of shape %s, expected %s"
                                    % (d_emb.shape, (n, k)))

    p = trace.predictions
    d_logits = d_pred * p * (1.0 - p)
    g_w_out = trace.z2.T @ d_logits
    g_b_out = np.array([d_logits.sum()])

    d_z2 = d_emb + np.outer(d_logits, model.w_out)
    g_W2 = d_z2.T @ trace.agg2
    g_b2 = d_z2.sum(axis=0)

    d_h1 = graph.propagate_transpose(d_z2 @ model.W2)
    # relu'(0) = 0
    d_z1 = d_h1 * (trace.z1 > 0)
    g_W1 = d_z1.T @ trace.agg1
    g_b1 = d_z1.sum(axis=0)

    return Gradients(W1=g_W1, b1=g_b1, W2=g_W2, b2=g_b2,
                     w_out=g_w_out, b_out=g_b_out, embeddings=d_z2)


# ------------------------------------------------------------------------------
# Checkpoints

def _payload(model):
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dims": dataclasses.asdict(model.dims),
        "seed": model.seed,
        "parameters": collections.OrderedDict(
            (name, {"shape": list(value.shape), "values": value.ravel().tolist()})
            for name, value in model.parameters().items())
    }


def save_model(model, path):
    """
    Write a checkpoint: canonical json payload and its sha256.
    Floats are written shortest round-trip, loading is bit-exact.
    :param model: GnnModel
    :param path: file path
    """
    payload = _payload(model)
    document = {"checksum": utils.gen_sha256(utils.to_json(payload)), "payload": payload}
    try:
        utils.ensure_parent_dir(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(utils.to_json(document))
            f.write("\n")
    except OSError as ex:
        raise IoError("cannot write checkpoint '%s': %s" % (path, ex))


def load_model(path):
    """
    :param path: file path
    :return: GnnModel
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
        payload = document["payload"]
        checksum = document["checksum"]
    except (OSError, ValueError, KeyError, TypeError) as ex:
        raise CheckpointError("cannot read checkpoint '%s': %s" % (path, ex))

    if utils.gen_sha256(utils.to_json(payload)) != checksum:
        raise CheckpointError("checkpoint '%s' failed its integrity check" % path)
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError("'%s' is not a graphmine model checkpoint" % path)

    try:
        dims = ModelDims(**payload["dims"])
        params = {}
        for name, shape in dims.shapes().items():
            entry = payload["parameters"][name]
            params[name] = np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
        return GnnModel(dims=dims, seed=payload["seed"], **params)
    except (KeyError, TypeError, ValueError, DimensionMismatch) as ex:
        raise CheckpointError("checkpoint '%s' is malformed: %s" % (path, ex))
