"""Sessionization, percentile filtering and daily windowing."""

from __future__ import annotations

from collections import defaultdict
from datetime import date
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import ConfigError, EmptyInput
from .model import Event, Session, UserSequence, utc_date

T = TypeVar("T")


def _collapse(events: Sequence[Event], window_minutes: float, key: Callable[[Event], tuple]) -> list[Session]:
    if not window_minutes or window_minutes <= 0:
        raise ConfigError("window_minutes must be positive")
    window = window_minutes * 60
    sessions: list[Session] = []
    cur_key = None
    start = end = count = 0
    user = platform = activity = None
    for ev in events:
        k = key(ev)
        # the window bounds the gap to the previous event, not the session span
        if k == cur_key and ev.timestamp - end <= window:
            end = ev.timestamp
            count += 1
            continue
        if cur_key is not None:
            sessions.append(Session(user, platform, activity, start, end, count))
        cur_key = k
        user, platform = ev.user_id, ev.platform
        activity = k[1] if len(k) > 1 else None
        start = end = ev.timestamp
        count = 1
    if cur_key is not None:
        sessions.append(Session(user, platform, activity, start, end, count))
    return sessions


def collapse_sessions(seq: UserSequence | Sequence[Event], window_minutes: float = 10) -> list[Session]:
    """Merge identical consecutive platform_activity events with gaps <= window."""
    return _collapse(list(seq), window_minutes, lambda e: (e.platform, e.activity))


def collapse_platform_sessions(seq: UserSequence | Sequence[Event], window_minutes: float = 10) -> list[Session]:
    """Merge consecutive events on the same platform with gaps <= window."""
    return _collapse(list(seq), window_minutes, lambda e: (e.platform,))


def length_bounds(lengths: Sequence[int], lo: float, hi: float) -> tuple[float, float]:
    if not 0 <= lo < hi <= 100:
        raise ConfigError(f"need 0 <= lo < hi <= 100, got ({lo}, {hi})")
    if len(lengths) == 0:
        raise EmptyInput("no sequences to filter")
    p_lo, p_hi = np.percentile(np.asarray(lengths, dtype=float), [lo, hi], method="linear")
    return float(p_lo), float(p_hi)


def percentile_filter(sequences: Sequence[T], lo: float, hi: float) -> list[T]:
    """Keep items whose length lies in [P_lo, P_hi], both ends inclusive."""
    sequences = list(sequences)
    p_lo, p_hi = length_bounds([len(s) for s in sequences], lo, hi)
    return [s for s in sequences if p_lo <= len(s) <= p_hi]


def split_daily(seq: UserSequence) -> list[tuple[date, UserSequence]]:
    """Cut a sequence at UTC midnight; empty days are skipped."""
    days: dict[date, list[Event]] = defaultdict(list)
    for ev in seq.events:
        days[utc_date(ev.timestamp)].append(ev)
    return [(d, UserSequence(seq.user_id, tuple(days[d]))) for d in sorted(days)]


def split_daily_sessions(sessions: Sequence[Session]) -> list[tuple[date, list[Session]]]:
    """Group sessions by the UTC date of their start."""
    days: dict[date, list[Session]] = defaultdict(list)
    for s in sessions:
        days[utc_date(s.start)].append(s)
    return [(d, days[d]) for d in sorted(days)]


def sessionize_all(sequences: Iterable[UserSequence], window_minutes: float = 10,
                   level: str = "activity") -> dict[str, list[Session]]:
    fn = collapse_platform_sessions if level == "platform" else collapse_sessions
    return {s.user_id: fn(s, window_minutes) for s in sequences}
