import pytest
from graphmine import hooks


def test_stage_signals():
    events = []

    def started(sender, **kw):
        events.append(("start", sender))

    def finished(sender, **kw):
        events.append(("finish", sender, kw["elapsed_ms"] >= 0))

    with hooks.stage_started.connected_to(started), hooks.stage_finished.connected_to(finished):
        with hooks.stage("mine"):
            events.append("body")
    assert events == [("start", "mine"), "body", ("finish", "mine", True)]


def test_stage_not_finished_on_error():
    finished = []
    with hooks.stage_finished.connected_to(lambda sender, **kw: finished.append(sender)):
        with pytest.raises(RuntimeError):
            with hooks.stage("graph"):
                raise RuntimeError("boom")
    assert finished == []
