# -*- coding: utf-8 -*-
"""
graphmine: config.py

Class based defaults, and the parser that turns a JSON or YAML file
into a validated PipelineConfig.

A config file only lists what it changes. ie:

    {"graph": {"method": "complete"}, "model": {"embedding_dim": 64}}

or in YAML:

    graph:
      method: complete
    model:
      embedding_dim: 64

Access the resolved values with dotted keys:

    config.get("graph.k")
    config.get("seed")
"""

import copy
import json
import yaml
import numbers
from . import utils
from .errors import ConfigSyntaxError, UnknownKey, InvalidValue

__all__ = [
    "BaseConfig",
    "PipelineConfig",
    "parse_config",
    "resolve_config",
]


class BaseConfig(object):
    """
    Default configuration. One block per concern.
    """

    #--------- DATA ----------
    DATA = {
        #: Name of the 0/1 class column, 1 = minority
        "label_column": "Class",

        #: Columns read from the csv but not used as features. ie: ["Time"]
        "drop_columns": [],

        #: z-score every column before any other stage
        "standardize": True,
    }

    #--------- GRAPH ----------
    GRAPH = {
        #: knn, complete, mutual_information, adaptive_threshold
        "method": "knn",

        #: Neighbors per node (knn, mutual_information)
        "k": 10,

        #: Threshold multiplier (adaptive_threshold)
        "alpha": 1.0,

        #: Quantile bins per feature (mutual_information)
        "mi_bins": 4,

        #: Gaussian bandwidth: "auto" for the median heuristic, or a number > 0
        "sigma_mode": "auto",

        #: Rows sampled by the median heuristic
        "sigma_sample_cap": 2000,
    }

    #--------- MODEL ----------
    MODEL = {
        "hidden_dim": 64,
        "embedding_dim": 128,
    }

    #--------- TRAIN ----------
    # Full batch Adam on L = L_global + lambda * L_local
    TRAIN = {
        "learning_rate": 0.01,
        "epochs": 200,
        "lambda": 0.5,

        #: Majority weight is beta / |majority|
        "beta": 0.5,

        #: Contrastive margin, and pairs sampled per minority anchor
        "margin": 1.0,
        "pos_pairs": 2,
        "neg_pairs": 2,

        #: Predictions are clamped to [eps, 1 - eps] inside the logs
        "clamp_epsilon": 1e-7,
    }

    #--------- DISCRETIZE ----------
    DISCRETIZE = {
        #: Quantile bins per dimension
        "bins": 4,
    }

    #--------- MINING ----------
    MINING = {
        #: Relative to the scope size
        "min_support": 0.05,

        #: minority or full
        "scope": "minority",

        #: Report maximal itemsets only
        "maximal_only": False,

        #: Longest itemset reported, None for unbounded
        "max_length": 2,
    }

    #--------- SYNTH ----------
    #: Synthetic dataset used when no data file is given
    SYNTH = {
        "n_samples": 2000,
        "n_features": 20,
        "minority_fraction": 0.05,
        "n_minority_clusters": 3,
        "cluster_spread": 0.5,
    }

    #--------- SWEEP ----------
    SWEEP = {
        "embedding_dims": [32, 64, 128, 256],
        "graph_methods": ["knn", "complete", "mutual_information", "adaptive_threshold"],
    }

    #: Run seed. Every stochastic stage derives its own sub-seed from it
    SEED = 42

# ------------------------------------------------------------------------------
#: LOGGING

    # Applied by the CLI at start-up. --verbose lowers 'graphmine' to INFO
    LOGGING_CONFIG = {
        "version": 1,
        "disable_existing_loggers": False,
        "handlers": {
            "default": {
                "class": "logging.StreamHandler"
            }
        },
        "loggers": {
            "": {
                "handlers": ["default"],
                "level": "WARN",
            }
        }
    }

    SECTIONS = ("data", "graph", "model", "train", "discretize", "mining", "synth", "sweep")

    @classmethod
    def defaults(cls):
        """
        :return: dict, a fresh copy of every default
        """
        d = {name: copy.deepcopy(getattr(cls, name.upper())) for name in cls.SECTIONS}
        d["seed"] = cls.SEED
        return d


# ------------------------------------------------------------------------------
# Validators. Each one returns the normalized value or raises InvalidValue

def _is_number(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _count(minimum=1):
    def check(key, value):
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise InvalidValue(key, "must be an integer")
        if value < minimum:
            raise InvalidValue(key, "must be >= %d" % minimum)
        return int(value)
    return check


def _optional_count(minimum=1):
    inner = _count(minimum)

    def check(key, value):
        return None if value is None else inner(key, value)
    return check


def _real(low=None, high=None, low_open=False, high_open=False):
    def check(key, value):
        if not _is_number(value) or value != value or value in (float("inf"), float("-inf")):
            raise InvalidValue(key, "must be a finite number")
        if low is not None and (value <= low if low_open else value < low):
            raise InvalidValue(key, "must be %s %s" % (">" if low_open else ">=", low))
        if high is not None and (value >= high if high_open else value > high):
            raise InvalidValue(key, "must be %s %s" % ("<" if high_open else "<=", high))
        return float(value)
    return check


def _choice(*options):
    def check(key, value):
        if value not in options:
            raise InvalidValue(key, "must be one of %s" % ", ".join(options))
        return value
    return check


def _flag(key, value):
    if not isinstance(value, bool):
        raise InvalidValue(key, "must be true or false")
    return value


def _name(key, value):
    if not isinstance(value, str) or not value:
        raise InvalidValue(key, "must be a non-empty string")
    return value


def _names(key, value):
    if not isinstance(value, list):
        raise InvalidValue(key, "must be a list of column names")
    return [_name(key, v) for v in value]


def _sigma_mode(key, value):
    if value == "auto":
        return value
    return _real(low=0, low_open=True)(key, value)


def _seed(key, value):
    value = _count(0)(key, value)
    if value >= 2 ** 64:
        raise InvalidValue(key, "must fit in 64 bits")
    return value


def _unique_list(item_check):
    def check(key, value):
        if not isinstance(value, list) or not value:
            raise InvalidValue(key, "must be a non-empty list")
        items = [item_check(key, v) for v in value]
        if len(set(items)) != len(items):
            raise InvalidValue(key, "values must be unique")
        return items
    return check


_METHODS = ("knn", "complete", "mutual_information", "adaptive_threshold")

SCHEMA = {
    "data": {
        "label_column": _name,
        "drop_columns": _names,
        "standardize": _flag,
    },
    "graph": {
        "method": _choice(*_METHODS),
        "k": _count(1),
        "alpha": _real(),
        "mi_bins": _count(2),
        "sigma_mode": _sigma_mode,
        "sigma_sample_cap": _count(2),
    },
    "model": {
        "hidden_dim": _count(1),
        "embedding_dim": _count(1),
    },
    "train": {
        "learning_rate": _real(low=0, low_open=True),
        "epochs": _count(0),
        "lambda": _real(low=0),
        "beta": _real(low=0, high=1, low_open=True),
        "margin": _real(low=0, low_open=True),
        "pos_pairs": _count(1),
        "neg_pairs": _count(1),
        "clamp_epsilon": _real(low=0, high=1e-3, low_open=True),
    },
    "discretize": {
        "bins": _count(1),
    },
    "mining": {
        "min_support": _real(low=0, high=1, low_open=True),
        "scope": _choice("minority", "full"),
        "maximal_only": _flag,
        "max_length": _optional_count(1),
    },
    "synth": {
        "n_samples": _count(2),
        "n_features": _count(1),
        "minority_fraction": _real(low=0, high=0.5, low_open=True, high_open=True),
        "n_minority_clusters": _count(1),
        "cluster_spread": _real(low=0, low_open=True),
    },
    "sweep": {
        "embedding_dims": _unique_list(_count(1)),
        "graph_methods": _unique_list(_choice(*_METHODS)),
    },
    "seed": _seed,
}


class PipelineConfig(utils.DotDict):
    """
    Resolved and validated configuration.
    """

    @property
    def digest(self):
        """
        SHA-256 of the canonical json of the resolved config
        """
        return utils.gen_sha256(utils.to_json(self))

    def as_dict(self):
        return copy.deepcopy(dict(self))

    def replace(self, key, value):
        """
        Validated copy with one dotted key changed
        :param key: ie: "model.embedding_dim"
        :param value: the new value
        :return: PipelineConfig
        """
        d = self.as_dict()
        parts = key.split(".")
        if len(parts) == 1:
            d[key] = value
        elif len(parts) == 2 and isinstance(d.get(parts[0]), dict):
            d[parts[0]][parts[1]] = value
        else:
            raise UnknownKey(key)
        return resolve_config(d)


def resolve_config(overrides=None):
    """
    Apply overrides on top of the defaults and validate every value.

    :param overrides: dict, possibly partial
    :return: PipelineConfig
    """
    overrides = overrides or {}
    if not isinstance(overrides, dict):
        raise ConfigSyntaxError("config must be an object at the top level")
    resolved = BaseConfig.defaults()

    for name, value in overrides.items():
        if name not in SCHEMA:
            raise UnknownKey(name)
        if name == "seed":
            resolved["seed"] = value
            continue
        if not isinstance(value, dict):
            raise InvalidValue(name, "must be an object")
        for key, v in value.items():
            if key not in SCHEMA[name]:
                raise UnknownKey("%s.%s" % (name, key))
            resolved[name][key] = v

    for name, section in SCHEMA.items():
        if name == "seed":
            resolved["seed"] = section("seed", resolved["seed"])
            continue
        for key, check in section.items():
            resolved[name][key] = check("%s.%s" % (name, key), resolved[name][key])

    return PipelineConfig(resolved)


def parse_config(path=None):
    """
    Read a JSON or YAML (.yml, .yaml) config file.

    :param path: file path, or None for all defaults
    :return: PipelineConfig
    """
    if path is None:
        return resolve_config({})
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as ex:
        raise ConfigSyntaxError("cannot read config '%s': %s" % (path, ex))

    if str(path).lower().endswith((".yml", ".yaml")):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as ex:
            raise ConfigSyntaxError("invalid YAML in '%s': %s" % (path, ex))
        if data is None:
            data = {}
    else:
        try:
            data = json.loads(text)
        except ValueError as ex:
            raise ConfigSyntaxError("invalid JSON in '%s': %s" % (path, ex))

    if not isinstance(data, dict):
        raise ConfigSyntaxError("config '%s' must be an object at the top level" % path)
    return resolve_config(data)
