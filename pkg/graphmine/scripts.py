# -*- coding: utf-8 -*-
"""
graphmine: scripts

Command line interface.

    graphmine synth        --out data.csv
    graphmine mine         --data data.csv --out report.json [--patterns p.csv] [--model-out m.json]
                           [--transactions db.txt] [--maximal-only]
    graphmine compare      --data data.csv --out report.json
    graphmine sweep-dims   --data data.csv --out report.json
    graphmine sweep-graphs --data data.csv --out report.json
    graphmine export-graph --data data.csv --out edges.csv
    graphmine version

Without --data, commands run on the synthetic dataset described by the
`synth` section of the config.

Exit status: 0 success, 2 config error, 3 data error, 4 computation error.
Errors are written to stderr as a json record {code, message, stage, exit_status}.
"""

import os
import sys
import click
import logging
import logging.config
import functools
from . import about, utils, hooks
from .config import BaseConfig, PipelineConfig, parse_config
from .data import load_csv, write_csv, generate_synthetic, SyntheticSpec, dataset_digest, standardize
from .graph import GraphConfig, build_graph, export_edge_list, degree_stats
from .baselines import PipelineVariant, execute_pipeline
from .gnn import save_model
from .miner import export_patterns
from .report import ReportBundle, emit_report
from .errors import GraphMineError, InvalidValue, IoError

__all__ = [
    "COMMANDS",
    "catch_exception",
    "run_command",
    "sweep",
    "cli",
    "cmd",
]

log = logging.getLogger(__name__)

COMMANDS = ("synth", "mine", "compare", "sweep-dims", "sweep-graphs", "export-graph")


class _StageTracker(object):
    """
    Remember the last pipeline stage that started
    """
    def __init__(self):
        self.current = None

    def __call__(self, sender, **kw):
        self.current = sender


def catch_exception(func):
    """
    Run func, turning a GraphMineError into a json error record on stderr.
    :return: the exit status, 0 on success
    """
    @functools.wraps(func)
    def decorated(*args, **kwargs):
        tracker = _StageTracker()
        with hooks.stage_started.connected_to(tracker):
            try:
                func(*args, **kwargs)
                return 0
            except GraphMineError as ex:
                record = ex.as_record()
                record["stage"] = tracker.current
                click.echo(utils.to_json(record), err=True)
                return ex.exit_status
    return decorated


def _setup_logging(verbose):
    logging.config.dictConfig(BaseConfig.LOGGING_CONFIG)
    logging.getLogger("graphmine").setLevel(logging.INFO if verbose else logging.WARN)


class _EpochPrinter(object):
    """
    Print `epoch,total,global,local` csv lines while training
    """
    def __init__(self):
        self.header = False

    def __call__(self, breakdown, **kw):
        if not self.header:
            click.echo("epoch,total,global,local")
            self.header = True
        click.echo(breakdown.as_csv())


def _load_config(config):
    if isinstance(config, PipelineConfig):
        return config
    with hooks.stage("config"):
        return parse_config(config)


def _load_dataset(data, config):
    with hooks.stage("load"):
        if data:
            return load_csv(data,
                            label_column=config.get("data.label_column"),
                            drop_columns=config.get("data.drop_columns"))
        return generate_synthetic(_synthetic_spec(config))


def stats_path(out):
    """
    Where export-graph writes the degree stats, next to the edge list
    """
    return os.path.splitext(out)[0] + ".stats.json"


def _write_json(data, path):
    try:
        utils.ensure_parent_dir(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(utils.to_json(data, indent=2))
            f.write("\n")
    except OSError as ex:
        raise IoError("cannot write '%s': %s" % (path, ex))


def _synthetic_spec(config):
    return SyntheticSpec(seed=config.get("seed"), **config.get("synth"))


def sweep(dataset, config, key, values, variant="embedding", timings=False):
    """
    Run one pipeline per value of a dotted config key.
    Only `key` differs between the runs, results are ordered by value.

    :param dataset: Dataset
    :param config: PipelineConfig, the base config
    :param key: ie: "model.embedding_dim"
    :param values: list of values
    :param variant: pipeline variant tag
    :param timings: measure runtime_ms
    :return: list of MiningReport
    """
    configs = [config.replace(key, v) for v in sorted(values)]
    _assert_orthogonal(configs, key)
    return [execute_pipeline(variant, dataset, c, timings).report for c in configs]


def _assert_orthogonal(configs, key):
    section, _, name = key.rpartition(".")
    stripped = []
    for c in configs:
        d = c.as_dict()
        if section:
            d[section].pop(name)
        else:
            d.pop(name)
        stripped.append(utils.to_json(d))
    if len(set(stripped)) > 1:
        raise ValueError("sweep configs differ beyond '%s'" % key)


@catch_exception
def run_command(command, config=None, data=None, out=None, fmt="json", verbose=False,
                timings=False, patterns=None, model_out=None, variant="embedding",
                transactions=None, maximal_only=False):
    """
    Run a command end to end.

    :param command: one of COMMANDS
    :param config: config file path, PipelineConfig, or None for defaults
    :param data: csv path, or None for the synthetic dataset
    :param out: output path
    :param fmt: json or csv, for reports
    :param verbose: log INFO and print the training log
    :param timings: write the measured runtime_ms, else 0
    :param patterns: mine: also write the mined patterns here
    :param model_out: mine: also write the trained model here
    :param variant: mine: the pipeline variant
    :param transactions: mine: also write the transaction database here
    :param maximal_only: mine: report maximal itemsets only
    :return: exit status
    """
    if command not in COMMANDS:
        raise ValueError("unknown command '%s'" % command)
    _setup_logging(verbose)
    config = _load_config(config)
    if maximal_only:
        config = config.replace("mining.maximal_only", True)

    if command == "synth":
        dataset = generate_synthetic(_synthetic_spec(config))
        write_csv(dataset, out, label_column=config.get("data.label_column"))
        log.info("wrote %d rows to %s", dataset.n_samples, out)
        return

    dataset = _load_dataset(data, config)
    digest = dataset_digest(dataset)

    if command == "export-graph":
        if config.get("data.standardize"):
            with hooks.stage("standardize"):
                dataset, _ = standardize(dataset)
        with hooks.stage("graph"):
            graph = build_graph(dataset, GraphConfig.from_config(config),
                                seed=utils.derive_seed(config.get("seed"), "sigma-sample"))
            export_edge_list(graph, out)
            stats = degree_stats(graph, dataset.labels)
            stats.update({"dataset_digest": digest, "config_digest": config.digest,
                          "graph_digest": graph.digest(), "tool_version": about.__version__})
            _write_json(stats, stats_path(out))
        return

    listener = _EpochPrinter() if verbose else None
    if listener:
        hooks.epoch_finished.connect(listener)
    try:
        if command == "mine":
            result = execute_pipeline(variant, dataset, config, timings)
            reports, axis = [result.report], "variant"
            if patterns:
                export_patterns(result.patterns, result.db, patterns)
            if transactions:
                result.db.export(transactions)
            if model_out:
                if result.model is None:
                    raise InvalidValue("model_out", "needs the embedding variant")
                save_model(result.model, model_out)
        elif command == "compare":
            reports = [execute_pipeline(tag, dataset, config, timings).report
                       for tag in PipelineVariant.TAGS]
            axis = "variant"
        elif command == "sweep-dims":
            reports = sweep(dataset, config, "model.embedding_dim",
                            config.get("sweep.embedding_dims"), timings=timings)
            axis = "embedding_dim"
        else:
            reports = sweep(dataset, config, "graph.method",
                            config.get("sweep.graph_methods"), timings=timings)
            axis = "graph_method"
    finally:
        if listener:
            hooks.epoch_finished.disconnect(listener)

    bundle = ReportBundle(reports=tuple(reports), axis=axis, dataset_digest=digest,
                          config=config.as_dict())
    emit_report(bundle, fmt, out)


# ------------------------------------------------------------------------------
# ------------------------------------------------------------------------------

@click.group()
def cli():
    """ graphmine

    Mine minority-class patterns from graph embeddings of imbalanced data.
    """


def pipeline_options(func):
    options = [
        click.option("--config", "-c", "config", type=click.Path(), default=None,
                     help="JSON or YAML config file"),
        click.option("--data", "-d", "data", type=click.Path(), default=None,
                     help="CSV dataset. Synthetic data when omitted"),
        click.option("--out", "-o", "out", type=click.Path(), required=True,
                     help="Output file"),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
        click.option("--verbose", "-v", is_flag=True, help="Log progress and training losses"),
        click.option("--timings", is_flag=True, help="Write measured runtime_ms"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@cli.command("synth")
@pipeline_options
def synth(**kw):
    """ Write the synthetic dataset as csv """
    sys.exit(run_command("synth", **kw))


@cli.command("mine")
@pipeline_options
@click.option("--variant", type=click.Choice(PipelineVariant.TAGS), default="embedding")
@click.option("--patterns", type=click.Path(), default=None, help="Write mined patterns (csv)")
@click.option("--model-out", "model_out", type=click.Path(), default=None,
              help="Write the trained model")
@click.option("--transactions", type=click.Path(), default=None,
              help="Write the transaction database")
@click.option("--maximal-only", "maximal_only", is_flag=True, help="Report maximal itemsets only")
def mine(**kw):
    """ Run one pipeline and report its patterns """
    sys.exit(run_command("mine", **kw))


@cli.command("compare")
@pipeline_options
def compare(**kw):
    """ Embedding, raw and pca pipelines side by side """
    sys.exit(run_command("compare", **kw))


@cli.command("sweep-dims")
@pipeline_options
def sweep_dims(**kw):
    """ Embedding pipeline over sweep.embedding_dims """
    sys.exit(run_command("sweep-dims", **kw))


@cli.command("sweep-graphs")
@pipeline_options
def sweep_graphs(**kw):
    """ Embedding pipeline over sweep.graph_methods """
    sys.exit(run_command("sweep-graphs", **kw))


@cli.command("export-graph")
@pipeline_options
def export_graph(**kw):
    """ Write the sample graph edge list and degree stats """
    sys.exit(run_command("export-graph", **kw))


@cli.command("version")
def version():
    """Get the version"""
    click.echo(about.__version__)


def cmd():
    """
    Help to run the command line
    """
    cli()
