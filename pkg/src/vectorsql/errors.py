"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VectorSqlError(Exception):
    """Base class for every error raised by this package."""


class ParseError(VectorSqlError):
    """Raised when canonical VectorSQL text cannot be parsed."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


class SqlSyntaxError(ParseError):
    pass


class UnsupportedConstructError(ParseError):
    pass


class UnsupportedInDialectError(VectorSqlError):
    """The query uses a construct the target backend cannot express."""


class DimensionMismatchError(VectorSqlError, ValueError):
    pass


class ResolutionError(VectorSqlError):
    """A name in the query does not resolve against the schema."""

    def __init__(self, message: str, code: str = "unresolved", node: object = None) -> None:
        super().__init__(message)
        self.message = message
        self.code = code
        self.node = node


class TypeMismatchError(VectorSqlError, TypeError):
    pass


class QueryTimeoutError(VectorSqlError, TimeoutError):
    pass


class UnsatisfiableTargetError(VectorSqlError):
    """The schema cannot host the requested complexity target."""


class EmptyGoldError(VectorSqlError, ValueError):
    pass


class ColumnMismatchError(VectorSqlError, ValueError):
    pass


class AllCandidatesFailedError(VectorSqlError):
    pass


class SnapshotFormatError(VectorSqlError):
    pass
