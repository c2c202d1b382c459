"""Exception hierarchy.

Data errors (bad input files, records, or values) derive from
:class:`DataError`; parameter problems derive from :class:`ConfigError`.
"""


class BuildStreamError(Exception):
    pass


class DataError(BuildStreamError):
    pass


class ConfigError(BuildStreamError, ValueError):
    pass


class MissingMetric(DataError):
    pass


class NonNumericValue(DataError):
    pass


class UnknownOutcome(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class InsufficientData(DataError):
    pass


class PoolTooSmall(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(BuildStreamError, ValueError):
    pass


class EmptyModel(BuildStreamError):
    pass


class InvalidPath(BuildStreamError, LookupError):
    pass


class SignalOutOfRange(BuildStreamError, ValueError):
    pass


class EmptyDataset(DataError):
    pass


class TooFewInstances(DataError):
    pass


class SingleClass(DataError):
    pass


class UndefinedRate(BuildStreamError):
    pass


class EmptyPhase(DataError):
    pass


class DegenerateVariance(BuildStreamError):
    pass


class EmptyCurrentTree(BuildStreamError):
    pass


class InvalidScript(ConfigError):
    pass
