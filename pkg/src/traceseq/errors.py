"""Exception hierarchy shared by every engine."""


class TraceSeqError(Exception):
    """Base class for all package errors."""


class EmptyInput(TraceSeqError, ValueError):
    pass


class InvalidInput(TraceSeqError, ValueError):
    pass


class ConfigError(TraceSeqError, ValueError):
    pass


class IoError(TraceSeqError, OSError):
    pass


class EmptyGraph(TraceSeqError, ValueError):
    pass


class EmptyTrajectory(TraceSeqError, ValueError):
    pass


class NotInVocabulary(TraceSeqError, KeyError):
    pass


class NumericalError(TraceSeqError, ArithmeticError):
    """Raised when an optimizer cannot produce a usable estimate."""


class SingularModel(NumericalError):
    pass
