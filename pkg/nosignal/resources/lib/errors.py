class InputError(ValueError):
    """Invalid input or violated precondition. Physics verdicts are never raised."""


class DeviationError(InputError):
    def __init__(self, message: str, *, deviation: float) -> None:
        super().__init__(message)
        self.deviation = deviation


class NonFiniteError(InputError):
    pass


class NotSquareError(InputError):
    pass


class DimensionMismatchError(InputError):
    pass


class NotHermitianError(DeviationError):
    pass


class NotUnitTraceError(DeviationError):
    pass


class NotPositiveError(DeviationError):
    pass


class NotNormalizedError(DeviationError):
    pass


class NotProjectorError(DeviationError):
    pass


class NotUnitaryError(DeviationError):
    pass


class NotOrthonormalError(DeviationError):
    pass


class NotOrthogonalError(DeviationError):
    pass


class NotTracePreservingError(DeviationError):
    pass


class NonRealTraceError(DeviationError):
    pass


class ContextSpanMismatchError(DeviationError):
    pass


class NegativeProbabilityError(DeviationError):
    pass


class RankOutOfRangeError(InputError):
    pass


class EmptyPartitionError(InputError):
    pass


class DimensionSumMismatchError(InputError):
    pass


class NotBlockInvariantError(InputError):
    def __init__(self, message: str, *, block: str, leakage: float) -> None:
        super().__init__(message)
        self.block = block
        self.leakage = leakage


class SameSectorError(InputError):
    pass


class WrongSectorError(InputError):
    pass


class DegenerateSplitError(InputError):
    pass


class BobUnreachableError(InputError):
    pass


class InvalidBoxError(InputError):
    pass


class WrongArityError(InputError):
    pass


class UnknownKindError(InputError):
    pass


class ScenarioParseError(InputError):
    def __init__(self, message: str, *, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(InputError):
    def __init__(self, message: str, *, stanza: str, field: str) -> None:
        super().__init__(f"{stanza}: {field}: {message}")
        self.stanza = stanza
        self.field = field
