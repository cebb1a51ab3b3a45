# -*- coding: utf-8 -*-
"""
graphmine: report

ReportBundle: the MiningReports of one command, with the sweep axis,
tool version, dataset digest and config echo. Emitted as canonical JSON
(sorted keys, shortest round-trip floats) or CSV.
"""

import dataclasses
import pandas as pd
from . import utils, about
from .miner import MiningReport
from .errors import IoError

__all__ = [
    "AXES",
    "COLUMNS",
    "ReportBundle",
    "emit_report",
    "load_report",
]

AXES = ("variant", "embedding_dim", "graph_method")

COLUMNS = MiningReport.FIELDS

FORMATS = ("json", "csv")


@dataclasses.dataclass(frozen=True)
class ReportBundle(object):
    """
    :param reports: tuple of MiningReport, ordered by axis value
    :param axis: variant, embedding_dim or graph_method
    :param dataset_digest: sha256 of the dataset every report was run on
    :param config: resolved config echo (the base config of a sweep)
    :param tool_version: graphmine version
    """
    reports: tuple
    axis: str
    dataset_digest: str
    config: dict = None
    tool_version: str = about.__version__

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError("axis must be one of %s, got %r" % (AXES, self.axis))
        values = self.axis_values()
        if len(set(values)) != len(values):
            raise ValueError("axis values must be unique, got %s" % (values,))

    def axis_values(self):
        return [getattr(r, self.axis) for r in self.reports]

    def as_dict(self):
        return {
            "tool_version": self.tool_version,
            "dataset_digest": self.dataset_digest,
            "axis": self.axis,
            "config": self.config,
            "reports": [r.as_record() for r in self.reports]
        }


def emit_report(bundle, fmt, out_path):
    """
    Write a bundle. Two emissions of the same bundle are byte-identical.

    :param bundle: ReportBundle
    :param fmt: json or csv
    :param out_path: file path
    """
    if fmt not in FORMATS:
        raise ValueError("format must be one of %s, got %r" % (FORMATS, fmt))
    try:
        utils.ensure_parent_dir(out_path)
        if fmt == "json":
            with open(out_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(utils.to_json(bundle.as_dict(), indent=2))
                f.write("\n")
        else:
            rows = [[_cell(r.as_record()[c]) for c in COLUMNS] for r in bundle.reports]
            frame = pd.DataFrame(rows, columns=list(COLUMNS), dtype=object)
            frame.to_csv(out_path, index=False, lineterminator="\n")
    except OSError as ex:
        raise IoError("cannot write report '%s': %s" % (out_path, ex))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return utils.format_float(value)
    return str(value)


def load_report(path):
    """
    Read a JSON bundle back
    :param path: file path
    :return: ReportBundle
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = utils.from_json(f.read())
        reports = tuple(MiningReport(**r) for r in data["reports"])
        return ReportBundle(reports=reports,
                            axis=data["axis"],
                            dataset_digest=data["dataset_digest"],
                            config=data.get("config"),
                            tool_version=data["tool_version"])
    except OSError as ex:
        raise IoError("cannot read report '%s': %s" % (path, ex))
    except (ValueError, KeyError, TypeError) as ex:
        raise IoError("'%s' is not a report bundle: %s" % (path, ex))
