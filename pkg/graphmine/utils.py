# -*- coding: utf-8 -*-
"""
graphmine: utils.py

This module contains some common functions used across graphmine.

functions in here are independents from configs and setup
"""

from __future__ import division
import os
import json
import hashlib
import numpy as np

"""
--- Reference ---
gen_sha256
derive_seed
chunk_list
block_ranges
format_float
to_json
from_json
ensure_parent_dir
DotDict
"""


def gen_sha256(value):
    """
    Generates SHA-256
    :param value: string or bytes
    :return: string
    """
    if isinstance(value, str):
        value = value.encode()
    return hashlib.sha256(value).hexdigest()


def derive_seed(seed, stage, *counters):
    """
    Derive an independent sub-seed for a stochastic stage.
    The sub-seed is the first 8 bytes of sha256("seed:stage:c1:c2...")
    read as an unsigned 64-bit integer, so every stage is reproducible
    on its own, whatever ran before it.

    :param seed: int - the run seed
    :param stage: string - the stage name, ie: "init", "local-pairs"
    :param counters: ints - optional counters, ie: the epoch index
    :return: int
    """
    key = ":".join([str(int(seed)), stage] + [str(int(c)) for c in counters])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


def chunk_list(items, size):
    """
    Return a list of chunks
    :param items: List
    :param size: int The number of items per chunk
    :return: List
    """
    size = max(1, size)
    return [items[i:i + size] for i in range(0, len(items), size)]


def block_ranges(n, size):
    """
    Split range(n) into consecutive (start, stop) blocks
    :param n: int
    :param size: int The number of rows per block
    :return: list of tuples
    """
    return [(c[0], c[-1] + 1) for c in chunk_list(range(n), size)]


def format_float(value):
    """
    Shortest decimal string that reads back to the same float
    :param value: float
    :return: string
    """
    return repr(float(value))


def to_json(d, indent=None):
    """
    Convert data to canonical json: sorted keys, shortest round-trip floats.
    numpy scalars and arrays are converted to their python counterpart
    :param d: dict or list
    :param indent: int or None
    :return: json data
    """
    separators = (",", ": ") if indent else (",", ":")
    return json.dumps(d, cls=_JSONEncoder, sort_keys=True, indent=indent,
                      separators=separators, allow_nan=False)


def from_json(s):
    """
    Parse json data
    :param s: string
    :return: mixed
    """
    return json.loads(s)


class _JSONEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        elif isinstance(obj, (tuple, set, frozenset)):
            return list(obj)
        # Let the base class default method raise the TypeError
        return json.JSONEncoder.default(self, obj)


def ensure_parent_dir(path):
    """
    Create the parent directory of a file path if it doesn't exist
    :param path: string
    """
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        os.makedirs(parent)


class DotDict(dict):
    """
    A dict extension that allows dot notation to access the data.
    ie: dict.get('key.key2.0.keyx')
    my_dict = {...}
    d = DotDict(my_dict)
    d.get("key1")
    d.get("key1.key2")
    d.get("key3.key4.0.keyX")

    Still have the ability to access it as a normal dict
    d[key1][key2]
    """
    def get(self, key, default=None):
        """
        Access data via
        :param key:
        :param default: the default value
        :return:
        """
        try:
            val = self
            if "." not in key:
                return self[key]
            for k in key.split('.'):
                if k.isdigit():
                    k = int(k)
                val = val[k]
            return val
        except (TypeError, KeyError, IndexError) as e:
            return default
