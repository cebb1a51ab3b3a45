# -*- coding: utf-8 -*-
"""
graphmine: hooks

Signals sent while a pipeline runs.

# What are signals
Signals help decouple the pipeline from whoever watches it (the CLI
verbose output, the tests, a notebook). Senders notify subscribers that
something happened, and never depend on them.

# Example:

    from graphmine import hooks

    def on_stage(sender, **kw):
        print(sender, kw["elapsed_ms"])

    with hooks.stage_finished.connected_to(on_stage):
        run_pipeline(...)

Signals:
    stage_started(name)
    stage_finished(name, elapsed_ms=float)
    epoch_finished(breakdown, elapsed=float)
"""

import time
import blinker
import contextlib

__all__ = [
    "stage",
    "stage_started",
    "stage_finished",
    "epoch_finished",
]

__signals_namespace = blinker.Namespace()

stage_started = __signals_namespace.signal("stage-started")
stage_finished = __signals_namespace.signal("stage-finished")
epoch_finished = __signals_namespace.signal("epoch-finished")


@contextlib.contextmanager
def stage(name):
    """
    Wrap a pipeline stage: send stage_started before, stage_finished after.
    stage_finished is not sent when the stage raises.

    with stage("discretize"):
        ...

    :param name: the stage name
    """
    stage_started.send(name)
    start = time.perf_counter()
    yield
    stage_finished.send(name, elapsed_ms=(time.perf_counter() - start) * 1000.0)
