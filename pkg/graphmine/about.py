# -*- coding: utf-8 -*-
"""
graphmine

About file
"""

__title__ = "graphmine"
__version__ = "0.1.0"
__summary__ = "graphmine builds a sample-similarity graph over imbalanced tabular data, "\
              "learns node embeddings with a weighted graph convolution network, "\
              "and mines minority-class feature patterns with FP-Growth."

__uri__ = ""
__author__ = "graphmine contributors"
__email__ = ""
__license__ = "MIT"
__copyright__ = "(c) 2026 %s" % __author__
