"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 1, ``DataError`` and
its subclasses -> 2, ``NumericalError`` -> 3.
"""


class SqledError(Exception):
    """Base class for all package errors."""


class ConfigError(SqledError):
    pass


class DataError(SqledError):
    """Malformed or inconsistent input data."""


class NumericalError(SqledError):
    pass


# graph-core
class GraphError(DataError):
    pass


class CycleError(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


# sql front end
class LexError(DataError):
    def __init__(self, position: int, message: str = "illegal character"):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class SQLSyntaxError(DataError):
    def __init__(self, position: int, expected: frozenset | set | tuple = (), found: str = ""):
        exp = ", ".join(sorted(expected)) if expected else "?"
        super().__init__(f"syntax error at token {position} ({found!r}); expected one of: {exp}")
        self.position = position
        self.expected = frozenset(expected)
        self.found = found


# file formats
class FormatError(DataError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MismatchError(DataError):
    def __init__(self, question_id: str, message: str):
        super().__init__(f"{question_id}: {message}")
        self.question_id = question_id


class DuplicateQuestion(DataError):
    def __init__(self, question_id: str):
        super().__init__(f"duplicate question_id {question_id!r}")
        self.question_id = question_id


class TooFewDatabases(DataError):
    pass


class MissingLabels(DataError):
    pass


class EmptyDataset(DataError):
    pass


class EmptyInput(DataError):
    pass


class DegenerateClasses(DataError):
    pass


class WrongArity(DataError):
    pass


class ArityMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionError(DataError):
    pass


class EmptyBeam(DataError):
    pass
