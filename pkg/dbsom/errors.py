class DbsomError(Exception):
    pass


class DataError(DbsomError, ValueError):
    """Bad input: data, arguments or configuration."""


class RuntimeFailure(DbsomError, RuntimeError):
    """A run failed for a reason other than its input."""


class NonMonotoneBreaks(DataError):
    pass


class WeightsNotNormalized(DataError):
    pass


class InvalidQuantileFunction(DataError):
    pass


class EmptySample(DataError):
    pass


class ZeroDispersion(DataError):
    def __init__(self, variables: list[str]):
        self.variables = variables
        super().__init__(f"variables with zero dispersion: {', '.join(variables)}")


class DimensionMismatch(DataError):
    pass


class SchemeMismatch(DataError):
    pass


class IndexOutOfRange(DataError, IndexError):
    pass


class ToroidalParity(DataError):
    pass


class NonPositiveRadius(DataError):
    pass


class ZeroKernelMass(DataError):
    pass


class TooManyNeurons(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class SingleCluster(DataError):
    pass


class LengthMismatch(DataError):
    pass


class RaggedSeries(DataError):
    pass


class UnknownObjectId(DataError):
    def __init__(self, object_id: str):
        self.object_id = object_id
        super().__init__(f"unknown object id {object_id!r}")


class ConfigError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class InvariantViolation(DataError):
    def __init__(self, row: str, column: str, rule: str):
        self.row = row
        self.column = column
        self.rule = rule
        super().__init__(f"cell ({row!r}, {column!r}): {rule}")


class DegenerateDispersion(UserWarning):
    pass


class DegenerateEntropy(UserWarning):
    pass


class FinalLoopCapReached(UserWarning):
    pass
