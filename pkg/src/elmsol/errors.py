"""Exception hierarchy shared by every module."""


class ElmSolError(Exception):
    """Base class for all package errors."""


class InvalidInputError(ElmSolError, ValueError):
    pass


class ConfigError(InvalidInputError):
    pass


class ShapeError(InvalidInputError):
    pass


class SchemaError(ElmSolError):
    """CSV header is missing a required column."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"missing required column {column!r}")


class RowError(ElmSolError):
    """Problem tied to one data row (1-based, header excluded)."""

    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class CsvParseError(RowError):
    pass


class RecordValidationError(RowError):
    pass


class EmptyDatasetError(ElmSolError):
    pass


class SplitError(ElmSolError):
    pass


class SolverError(ElmSolError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class ModelFormatError(ElmSolError):
    pass


class ModelVersionError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class DegenerateError(ElmSolError, ValueError):
    """Zero variance where a spread is required."""


class RankError(ElmSolError):
    def __init__(self, message, rank):
        self.rank = rank
        super().__init__(message)


class SweepError(ElmSolError):
    pass
