# -*- coding: utf-8 -*-
"""
graphmine: errors

Every error raised on purpose by graphmine derives from GraphMineError.
Each family maps to a CLI exit status:
    ConfigError       -> 2
    DataError         -> 3
    ComputationError  -> 4
"""

__all__ = [
    "GraphMineError",
    "ConfigError",
    "DataError",
    "ComputationError",
    "ConfigSyntaxError",
    "UnknownKey",
    "InvalidValue",
    "MissingColumn",
    "ParseError",
    "DuplicateColumn",
    "InvalidDataset",
    "EmptyDataset",
    "UnreadableData",
    "InvalidSpec",
    "SingleClassError",
    "DegenerateData",
    "NoMinority",
    "EmptyScope",
    "CheckpointError",
    "NonPositiveSigma",
    "InvalidK",
    "InvalidBins",
    "ZeroNeighborhood",
    "DimensionMismatch",
    "LengthMismatch",
    "NonFiniteLoss",
    "OracleTooLarge",
    "UndefinedConfidence",
    "RankRequestTooLarge",
    "ConvergenceError",
    "IoError",
]


class GraphMineError(Exception):
    """
    Base of all graphmine errors.
    It helps catch graphmine problems, and carries the error code
    that is written in the CLI error record.
    """
    exit_status = 1

    @property
    def code(self):
        return self.__class__.__name__

    def as_record(self):
        """
        Machine readable form of the error
        :return: dict
        """
        return {
            "code": self.code,
            "message": str(self),
            "exit_status": self.exit_status
        }


class ConfigError(GraphMineError):
    exit_status = 2


class DataError(GraphMineError):
    exit_status = 3


class ComputationError(GraphMineError):
    exit_status = 4

# ------------------------------------------------------------------------------
# Config


class ConfigSyntaxError(ConfigError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, name):
        self.name = name
        super(UnknownKey, self).__init__("unknown config key '%s'" % name)


class InvalidValue(ConfigError):
    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super(InvalidValue, self).__init__("%s: %s" % (key, reason))

# ------------------------------------------------------------------------------
# Data


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super(MissingColumn, self).__init__("missing column '%s'" % column)


class DuplicateColumn(DataError):
    def __init__(self, column):
        self.column = column
        super(DuplicateColumn, self).__init__("duplicate column '%s'" % column)


class InvalidDataset(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row, column, value=None):
        self.row = row
        self.column = column
        self.value = value
        super(ParseError, self).__init__(
            "row %s, column '%s': cannot read %r as a finite number" % (row, column, value))


class EmptyDataset(DataError):
    pass


class UnreadableData(DataError):
    pass


class InvalidSpec(DataError):
    pass


class SingleClassError(DataError):
    pass


class DegenerateData(DataError):
    pass


class NoMinority(DataError):
    pass


class EmptyScope(DataError):
    pass


class CheckpointError(DataError):
    pass

# ------------------------------------------------------------------------------
# Computation


class NonPositiveSigma(ComputationError):
    pass


class InvalidK(ComputationError):
    pass


class InvalidBins(ComputationError):
    pass


class ZeroNeighborhood(ComputationError):
    pass


class DimensionMismatch(ComputationError):
    pass


class LengthMismatch(ComputationError):
    pass


class NonFiniteLoss(ComputationError):
    def __init__(self, epoch):
        self.epoch = epoch
        super(NonFiniteLoss, self).__init__("non finite loss at epoch %s" % epoch)


class OracleTooLarge(ComputationError):
    pass


class UndefinedConfidence(ComputationError):
    pass


class RankRequestTooLarge(ComputationError):
    pass


class ConvergenceError(ComputationError):
    pass


class IoError(ComputationError):
    pass
