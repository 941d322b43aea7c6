"""Shared data model: events, user-sequences, sessions, lexicons, time windows."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyInput, InvalidInput

PLATFORMS: tuple[str, ...] = ("Facebook", "Instagram", "TikTok", "YouTube")
_PLATFORM_LOOKUP = {p.lower(): p for p in PLATFORMS}

CONTENT_MAX_CHARS = 120
SECONDS_PER_DAY = 86_400


def normalize_platform(name: str) -> str:
    """Canonical spelling for known platforms; anything else is kept as ``Other(name)``."""
    name = name.strip()
    return _PLATFORM_LOOKUP.get(name.lower(), name)


def is_other_platform(name: str) -> bool:
    return name not in PLATFORMS


def platform_order(name: str) -> tuple[int, str]:
    """Sort key: known platforms in their fixed order, then others by name."""
    try:
        return (PLATFORMS.index(name), "")
    except ValueError:
        return (len(PLATFORMS), name)


@dataclass(frozen=True, slots=True)
class Event:
    user_id: str
    timestamp: int  # epoch seconds, UTC
    platform: str
    activity: str
    content: str | None = None

    def __post_init__(self) -> None:
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, (int, np.integer)):
            raise InvalidInput(f"timestamp must be integer epoch seconds, got {self.timestamp!r}")
        if not (self.platform + self.activity):
            raise InvalidInput("event needs a platform or an activity")
        if self.content == "":
            object.__setattr__(self, "content", None)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @property
    def label(self) -> str:
        return f"{self.platform}_{self.activity}"

    @property
    def when(self) -> datetime:
        return datetime.fromtimestamp(self.timestamp, tz=timezone.utc)


@dataclass(frozen=True)
class UserSequence:
    """All events of one user in chronological order.

    Construct through :meth:`from_events` to get the stable sort; the
    plain constructor only validates.
    """

    user_id: str
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        prev = None
        for ev in self.events:
            if ev.user_id != self.user_id:
                raise InvalidInput(f"event for {ev.user_id!r} in sequence of {self.user_id!r}")
            if prev is not None and ev.timestamp < prev:
                raise InvalidInput("events are not in chronological order")
            prev = ev.timestamp

    @classmethod
    def from_events(cls, events: Iterable[Event], user_id: str | None = None) -> "UserSequence":
        events = list(events)
        if user_id is None:
            if not events:
                raise EmptyInput("cannot infer user_id from an empty event list")
            user_id = events[0].user_id
        # sorted() is stable, so equal timestamps keep input order
        return cls(user_id, tuple(sorted(events, key=lambda e: e.timestamp)))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    @property
    def platforms(self) -> list[str]:
        return sorted({e.platform for e in self.events}, key=platform_order)

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.events]


@dataclass(frozen=True, slots=True)
class Session:
    """A run of merged consecutive events.

    ``activity`` is None for platform-level sessions.
    """

    user_id: str
    platform: str
    activity: str | None
    start: int
    end: int
    count: int

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise InvalidInput("session end precedes start")
        if self.count < 1:
            raise InvalidInput("session count must be positive")
        if self.count == 1 and self.end != self.start:
            raise InvalidInput("single-event session must have end == start")

    @property
    def symbol(self) -> str:
        if self.activity is None:
            return self.platform
        return f"{self.platform}_{self.activity}"

    @property
    def timestamp(self) -> int:
        return self.start

    @property
    def span(self) -> int:
        return self.end - self.start


class LexiconMode(str, enum.Enum):
    PLATFORM = "platform"
    PLATFORM_ACTIVITY = "platform_activity"
    SYNTHETIC_WORD = "synthetic_word"


def describe(event: Event, mode: LexiconMode | str) -> tuple:
    mode = LexiconMode(mode)
    if mode is LexiconMode.PLATFORM:
        return (event.platform,)
    if mode is LexiconMode.PLATFORM_ACTIVITY:
        return (event.platform, event.activity)
    content = event.content[:CONTENT_MAX_CHARS] if event.content else None
    return (event.platform, event.activity, content)


def descriptor_label(descriptor: tuple) -> str:
    return "_".join(part for part in descriptor if part is not None)


@dataclass(frozen=True)
class Lexicon:
    """Bijection between event descriptors and dense integer symbols 0..M-1."""

    mode: LexiconMode
    reverse: tuple[tuple, ...]
    forward: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", LexiconMode(self.mode))
        object.__setattr__(self, "reverse", tuple(self.reverse))
        forward = {d: i for i, d in enumerate(self.reverse)}
        if len(forward) != len(self.reverse):
            raise InvalidInput("duplicate descriptors in lexicon")
        object.__setattr__(self, "forward", forward)

    @classmethod
    def fit(cls, events: Iterable[Event], mode: LexiconMode | str) -> "Lexicon":
        """Number descriptors in first-seen order."""
        seen: dict[tuple, None] = {}
        for ev in events:
            seen.setdefault(describe(ev, mode), None)
        return cls(LexiconMode(mode), tuple(seen))

    @classmethod
    def from_sequences(cls, sequences: Iterable[UserSequence], mode: LexiconMode | str) -> "Lexicon":
        return cls.fit((ev for seq in sequences for ev in seq), mode)

    def __len__(self) -> int:
        return len(self.reverse)

    def __contains__(self, descriptor) -> bool:
        return descriptor in self.forward

    def symbol(self, descriptor: tuple) -> int:
        try:
            return self.forward[descriptor]
        except KeyError:
            raise InvalidInput(f"descriptor {descriptor!r} not in lexicon") from None

    def descriptor(self, symbol: int) -> tuple:
        return self.reverse[symbol]

    def label(self, symbol: int) -> str:
        return descriptor_label(self.reverse[symbol])

    @property
    def labels(self) -> list[str]:
        return [descriptor_label(d) for d in self.reverse]

    def encode_events(self, events: Iterable[Event]) -> np.ndarray:
        return np.array([self.symbol(describe(ev, self.mode)) for ev in events], dtype=np.int64)

    def decode(self, symbols: Iterable[int]) -> list[tuple]:
        return [self.reverse[int(s)] for s in symbols]


def encode(
    seq: UserSequence | Sequence[Event],
    mode: LexiconMode | str = LexiconMode.PLATFORM_ACTIVITY,
    lexicon: Lexicon | None = None,
) -> tuple[np.ndarray, Lexicon]:
    """Map a sequence to integer symbols, fitting a lexicon if none is given."""
    events = list(seq)
    if not events:
        raise EmptyInput("cannot encode an empty sequence")
    if lexicon is None:
        lexicon = Lexicon.fit(events, mode)
    return lexicon.encode_events(events), lexicon


def decode(symbols: Iterable[int], lexicon: Lexicon) -> list[tuple]:
    return lexicon.decode(symbols)


class WindowKind(str, enum.Enum):
    WHOLE_PERIOD = "whole_period"
    DAILY = "daily"


@dataclass(frozen=True)
class TimeWindow:
    """Grain of analysis windows. Daily windows cut at UTC midnight."""

    kind: WindowKind = WindowKind.DAILY

    def key(self, timestamp: int) -> date | None:
        if WindowKind(self.kind) is WindowKind.WHOLE_PERIOD:
            return None
        return utc_date(timestamp)

    @staticmethod
    def daily_bounds(start: int, end: int) -> list[tuple[int, int]]:
        """Half-open [lo, hi) UTC-day intervals covering ``start..end`` inclusive."""
        if end < start:
            raise InvalidInput("end before start")
        lo = start - start % SECONDS_PER_DAY
        out = []
        while lo <= end:
            out.append((lo, lo + SECONDS_PER_DAY))
            lo += SECONDS_PER_DAY
        return out


def utc_date(timestamp: int) -> date:
    return date(1970, 1, 1) + timedelta(days=timestamp // SECONDS_PER_DAY)


def symbols_of(item, level: LexiconMode | str = LexiconMode.PLATFORM_ACTIVITY) -> list[Hashable]:
    """Label sequence for a UserSequence, a list of Sessions, or a ready symbol list."""
    level = LexiconMode(level)
    out = []
    for x in item:
        if isinstance(x, Event):
            out.append(x.platform if level is LexiconMode.PLATFORM else x.label)
        elif isinstance(x, Session):
            out.append(x.platform if level is LexiconMode.PLATFORM else x.symbol)
        else:
            out.append(x)
    return out
