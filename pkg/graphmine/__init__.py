# -*- coding: utf-8 -*-
"""
graphmine
"""

from .errors import *
from .data import (Dataset, SyntheticSpec, load_csv, write_csv, standardize,
                   generate_synthetic, class_partition)
from .graph import SampleGraph, GraphConfig, build_graph
from .gnn import ModelDims, GnnModel, init_model, forward, backward
from .trainer import TrainConfig, train, extract_embeddings
from .discretizer import fit_quantile_bins, to_transactions, TransactionDb
from .miner import fp_growth, apriori_oracle, mining_report, MiningReport
from .baselines import pca_fit, pca_transform, run_pipeline, PipelineVariant
from .config import parse_config, resolve_config, PipelineConfig
from .report import ReportBundle, emit_report, load_report
from . import (about, hooks, utils)
