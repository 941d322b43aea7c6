"""Sequence analytics for timestamped digital-trace event logs."""

from .errors import (ConfigError, EmptyGraph, EmptyInput, EmptyTrajectory, InvalidInput, IoError, NotInVocabulary,
                     NumericalError, SingularModel, TraceSeqError)
from .model import PLATFORMS, Event, Lexicon, LexiconMode, Session, UserSequence, decode, encode

__version__ = "0.1.0"

__all__ = [
    "PLATFORMS", "ConfigError", "EmptyGraph", "EmptyInput", "EmptyTrajectory", "Event", "InvalidInput", "IoError",
    "Lexicon", "LexiconMode", "NotInVocabulary", "NumericalError", "Session", "SingularModel", "TraceSeqError",
    "UserSequence", "decode", "encode",
]
