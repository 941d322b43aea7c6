"""Directly-follows graphs, platform transition times and path variants over daily cases."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._io import fmt, write_csv, write_text
from .errors import ConfigError, EmptyInput
from .model import Session, platform_order
from .preprocess import split_daily_sessions

START = "START"
END = "END"
PLATFORM_SWITCH = "PLATFORM_SWITCH"
ARTIFICIAL = (START, END, PLATFORM_SWITCH)


@dataclass(frozen=True)
class Case:
    case_id: str
    sessions: tuple[Session, ...]

    @property
    def path(self) -> tuple[str, ...]:
        return tuple(s.symbol for s in self.sessions)


def make_cases(sessions_by_user: Mapping[str, Sequence[Session]], daily: bool = True) -> list[Case]:
    """One case per user-day (or per user when ``daily`` is False)."""
    out = []
    for user in sorted(sessions_by_user):
        sessions = list(sessions_by_user[user])
        if not sessions:
            continue
        if daily:
            out.extend(Case(f"{user}|{d.isoformat()}", tuple(day)) for d, day in split_daily_sessions(sessions))
        else:
            out.append(Case(user, tuple(sessions)))
    return out


def _as_cases(cases) -> list[Case]:
    return [c if isinstance(c, Case) else Case(str(i), tuple(c)) for i, c in enumerate(cases)]


@dataclass
class EdgeStats:
    frequency: int = 0
    total_seconds: float = 0.0
    timed: int = 0

    @property
    def mean_seconds(self) -> float | None:
        return self.total_seconds / self.timed if self.timed else None


@dataclass
class DirectlyFollowsGraph:
    node_freq: dict[str, int]
    edges: dict[tuple[str, str], EdgeStats]
    n_cases: int

    def frequency(self, a: str, b: str) -> int:
        e = self.edges.get((a, b))
        return e.frequency if e else 0

    def to_dot(self, path=None) -> str:
        lines = ["digraph dfg {", "  rankdir=LR;"]
        for v in sorted(self.node_freq, key=_node_key):
            shape = "circle" if v in (START, END) else ("diamond" if v == PLATFORM_SWITCH else "box")
            lines.append(f'  "{v}" [label="{v} ({self.node_freq[v]})", shape={shape}];')
        for (a, b), e in sorted(self.edges.items(), key=lambda kv: (_node_key(kv[0][0]), _node_key(kv[0][1]))):
            mean = e.mean_seconds
            label = f"{e.frequency}" if mean is None else f"{e.frequency} / {_duration(mean)}"
            lines.append(f'  "{a}" -> "{b}" [label="{label}", weight={e.frequency}];')
        lines.append("}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            write_text(path, text)
        return text


def _node_key(v: str):
    if v == START:
        return (0, "")
    if v == END:
        return (3, "")
    if v == PLATFORM_SWITCH:
        return (2, "")
    return (1, v)


def _duration(seconds: float) -> str:
    if seconds < 120:
        return f"{seconds:.0f}s"
    if seconds < 7200:
        return f"{seconds / 60:.1f}m"
    return f"{seconds / 3600:.1f}h"


def build_dfg(cases) -> DirectlyFollowsGraph:
    """START -> first, consecutive pairs, last -> END for every case.

    A PLATFORM_SWITCH node is interposed between consecutive sessions on
    different platforms. Only direct same-platform edges carry a mean time
    (end of one session to start of the next); the switch node has no dwell
    time.
    """
    cases = _as_cases(cases)
    if not cases:
        raise EmptyInput("empty event log")
    nodes: Counter = Counter()
    edges: dict[tuple[str, str], EdgeStats] = defaultdict(EdgeStats)

    def step(a, b, seconds=None):
        e = edges[(a, b)]
        e.frequency += 1
        if seconds is not None:
            e.total_seconds += seconds
            e.timed += 1

    for case in cases:
        ss = case.sessions
        if not ss:
            raise EmptyInput(f"case {case.case_id} has no events")
        nodes[START] += 1
        nodes[END] += 1
        step(START, ss[0].symbol)
        for cur, nxt in zip(ss, ss[1:]):
            if cur.platform != nxt.platform:
                nodes[PLATFORM_SWITCH] += 1
                step(cur.symbol, PLATFORM_SWITCH)
                step(PLATFORM_SWITCH, nxt.symbol)
            else:
                step(cur.symbol, nxt.symbol, nxt.start - cur.end)
        step(ss[-1].symbol, END)
        nodes.update(s.symbol for s in ss)
    return DirectlyFollowsGraph(dict(nodes), dict(edges), len(cases))


@dataclass
class TransitionTimes:
    platforms: list[str]
    mean_seconds: np.ndarray  # NaN marks absent cells
    counts: np.ndarray

    def get(self, a: str, b: str) -> float | None:
        v = self.mean_seconds[self.platforms.index(a), self.platforms.index(b)]
        return None if np.isnan(v) else float(v)

    def to_csv(self, path) -> None:
        write_csv(path, ["from", *self.platforms],
                  ([p, *(fmt(x) for x in row)] for p, row in zip(self.platforms, self.mean_seconds)))


def transition_time_matrix(cases, platforms: Sequence[str] | None = None) -> TransitionTimes:
    """Mean seconds from the end of a session on platform i to the start of
    the next session (on platform j) within the same case."""
    cases = _as_cases(cases)
    seen = {s.platform for c in cases for s in c.sessions}
    plats = list(platforms) if platforms is not None else sorted(seen, key=platform_order)
    index = {p: i for i, p in enumerate(plats)}
    total = np.zeros((len(plats), len(plats)))
    count = np.zeros((len(plats), len(plats)), dtype=np.int64)
    for c in cases:
        for cur, nxt in zip(c.sessions, c.sessions[1:]):
            if cur.platform in index and nxt.platform in index:
                i, j = index[cur.platform], index[nxt.platform]
                total[i, j] += nxt.start - cur.end
                count[i, j] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return TransitionTimes(plats, mean, count)


@dataclass
class VariantTable:
    rows: list[tuple[tuple[str, ...], int]]
    n_cases: int
    case_ids: dict[tuple[str, ...], list[str]] = field(default_factory=dict, repr=False)

    @property
    def covered(self) -> int:
        return sum(c for _, c in self.rows)

    def to_csv(self, path) -> None:
        write_csv(path, ["rank", "path", "cases", "share"],
                  ([i + 1, " > ".join(p), c, fmt(c / self.n_cases)] for i, (p, c) in enumerate(self.rows)))


def top_variants(cases, k: int = 10) -> VariantTable:
    """The k most frequent activity paths; count ties break lexicographically."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    cases = _as_cases(cases)
    groups: dict[tuple[str, ...], list[str]] = defaultdict(list)
    for c in cases:
        groups[c.path].append(c.case_id)
    ranked = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))[:k]
    return VariantTable([(p, len(ids)) for p, ids in ranked], len(cases), {p: ids for p, ids in ranked})


def filter_cases(cases, variants: VariantTable) -> list[Case]:
    keep = {p for p, _ in variants.rows}
    return [c for c in _as_cases(cases) if c.path in keep]
