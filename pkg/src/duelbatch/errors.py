"""Exception hierarchy shared by all duelbatch modules."""


class DuelBatchError(Exception):
    """Base class for every error raised by this package."""


class MatrixError(DuelBatchError, ValueError):
    """A preference matrix violates a model constraint."""


class AsymmetryError(MatrixError):
    pass


class DiagonalError(MatrixError):
    pass


class RangeError(MatrixError):
    pass


class ParseError(DuelBatchError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" (line {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class ParamError(DuelBatchError, ValueError):
    pass


class DomainError(DuelBatchError, ValueError):
    """A formula was evaluated outside its domain."""


class EmptySetError(DuelBatchError, ValueError):
    pass


class ConfigError(DuelBatchError, ValueError):
    pass


class UsageError(DuelBatchError):
    """Malformed command line or API usage (CLI exit code 1)."""
