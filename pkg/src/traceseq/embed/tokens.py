"""Synthetic words: platform, activity and (truncated) content fused into one token."""

from __future__ import annotations

from typing import Iterable

from ..model import CONTENT_MAX_CHARS, Event, UserSequence


def synthetic_word(platform: str, activity: str, content: str | None = None) -> str:
    token = f"{platform}_{activity}"
    if content:
        token += "_" + content[:CONTENT_MAX_CHARS]
    return token


def event_token(event: Event) -> str:
    return synthetic_word(event.platform, event.activity, event.content)


def sequence_tokens(seq: UserSequence | Iterable[Event]) -> list[str]:
    return [event_token(e) for e in seq]


def split_token(token: str) -> tuple[str, str]:
    """(platform, activity) guess for labelling plots; content is not recovered."""
    parts = token.split("_", 2)
    return parts[0], parts[1] if len(parts) > 1 else ""
