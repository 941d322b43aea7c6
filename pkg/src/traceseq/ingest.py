"""Read flat event logs (CSV / JSONL) into user-sequences, and describe corpora."""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._io import atomic_open
from .errors import InvalidInput, IoError
from .model import Event, UserSequence, normalize_platform, platform_order

log = logging.getLogger(__name__)

COLUMNS = ("user_id", "timestamp", "platform", "activity", "content")
PERCENTILES = (25, 50, 75, 90)


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_rejected: int = 0
    users: int = 0
    platform_counts: dict[str, int] = field(default_factory=dict)
    min_timestamp: int | None = None
    max_timestamp: int | None = None
    length_percentiles: dict[int, float] = field(default_factory=dict)
    mean_length: float | None = None
    max_length: int | None = None
    multiplicity: dict[int, int] = field(default_factory=dict)
    rejects: list[tuple[int, str]] = field(default_factory=list, repr=False)

    @property
    def rows_accepted(self) -> int:
        return self.rows_read - self.rows_rejected

    @property
    def median_length(self) -> float | None:
        return self.length_percentiles.get(50)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_rejected": self.rows_rejected,
            "rows_accepted": self.rows_accepted,
            "users": self.users,
            "platform_counts": self.platform_counts,
            "min_timestamp": self.min_timestamp,
            "max_timestamp": self.max_timestamp,
            "length_percentiles": {str(k): v for k, v in self.length_percentiles.items()},
            "mean_length": self.mean_length,
            "max_length": self.max_length,
            "multiplicity": {str(k): v for k, v in self.multiplicity.items()},
        }


def parse_timestamp(value) -> int:
    """ISO-8601 or integer epoch seconds -> epoch seconds (UTC).

    Naive ISO strings are read as UTC. Sub-second parts are truncated.
    """
    if isinstance(value, bool):
        raise InvalidInput(f"bad timestamp {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not value.is_integer():
            raise InvalidInput(f"non-integral epoch {value!r}")
        return int(value)
    text = str(value).strip()
    if not text:
        raise InvalidInput("empty timestamp")
    if text.lstrip("-").isdigit():
        return int(text)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise InvalidInput(f"bad timestamp {value!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() // 1)


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _row_to_event(row: dict) -> Event:
    user = row.get("user_id")
    if user is None or str(user).strip() == "":
        raise InvalidInput("missing user_id")
    platform = normalize_platform(str(row.get("platform") or ""))
    activity = str(row.get("activity") or "").strip()
    content = row.get("content")
    content = None if content is None or content == "" else str(content)
    return Event(str(user).strip(), parse_timestamp(row.get("timestamp")), platform, activity, content)


def _iter_rows(path: Path, fmt: str):
    """Yield (line_no, row-or-None, error) for each data row."""
    if fmt == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            missing = {"user_id", "timestamp", "platform", "activity"} - set(reader.fieldnames)
            if missing:
                raise IoError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                if None in row or any(v is None for k, v in row.items() if k in COLUMNS[:4]):
                    yield reader.line_num, None, "wrong field count"
                else:
                    yield reader.line_num, row, None
    else:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    yield line_no, None, f"bad json: {exc.msg}"
                    continue
                if not isinstance(row, dict):
                    yield line_no, None, "not an object"
                    continue
                yield line_no, row, None


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    return "csv"


def read_events(path, format: str | None = None) -> tuple[list[UserSequence], IngestReport]:
    """Parse one event-log file. Bad rows are counted and skipped, never fatal."""
    path = Path(path)
    fmt = (format or infer_format(path)).lower()
    if fmt not in ("csv", "jsonl"):
        raise InvalidInput(f"unknown format {format!r}")
    by_user: dict[str, list[Event]] = defaultdict(list)
    read = rejected = 0
    rejects = []
    try:
        for line_no, row, err in _iter_rows(path, fmt):
            read += 1
            if row is not None:
                try:
                    ev = _row_to_event(row)
                except InvalidInput as exc:
                    err = str(exc)
                else:
                    by_user[ev.user_id].append(ev)
                    continue
            rejected += 1
            rejects.append((line_no, err))
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if rejected:
        log.warning("%s: rejected %d of %d rows", path, rejected, read)
    sequences = [UserSequence.from_events(by_user[u], u) for u in sorted(by_user)]
    report = summarize(sequences, rows_read=read, rows_rejected=rejected)
    report.rejects = rejects
    return sequences, report


def read_many(paths: Sequence, format: str | None = None) -> tuple[list[UserSequence], IngestReport]:
    """Parse several files and merge by user (file order breaks timestamp ties)."""
    by_user: dict[str, list[Event]] = defaultdict(list)
    read = rejected = 0
    for p in paths:
        seqs, rep = read_events(p, format)
        read += rep.rows_read
        rejected += rep.rows_rejected
        for s in seqs:
            by_user[s.user_id].extend(s.events)
    sequences = [UserSequence.from_events(by_user[u], u) for u in sorted(by_user)]
    return sequences, summarize(sequences, rows_read=read, rows_rejected=rejected)


def summarize(
    sequences: Sequence[UserSequence], rows_read: int | None = None, rows_rejected: int = 0
) -> IngestReport:
    """Corpus statistics; percentiles use linear interpolation between order statistics."""
    lengths = np.array([len(s) for s in sequences], dtype=float)
    accepted = int(lengths.sum())
    platform_counts: Counter[str] = Counter()
    multiplicity: Counter[int] = Counter()
    lo = hi = None
    for s in sequences:
        plats = Counter(e.platform for e in s.events)
        platform_counts.update(plats)
        if plats:
            multiplicity[len(plats)] += 1
            first, last = s.events[0].timestamp, s.events[-1].timestamp
            lo = first if lo is None else min(lo, first)
            hi = last if hi is None else max(hi, last)
    report = IngestReport(
        rows_read=accepted + rows_rejected if rows_read is None else rows_read,
        rows_rejected=rows_rejected,
        users=len(sequences),
        platform_counts=dict(sorted(platform_counts.items(), key=lambda kv: platform_order(kv[0]))),
        min_timestamp=lo,
        max_timestamp=hi,
        multiplicity=dict(sorted(multiplicity.items())),
    )
    if len(lengths):
        pct = np.percentile(lengths, PERCENTILES, method="linear")
        report.length_percentiles = {p: float(v) for p, v in zip(PERCENTILES, pct)}
        report.mean_length = float(lengths.mean())
        report.max_length = int(lengths.max())
    return report


def event_rows(sequences: Iterable[UserSequence]):
    for seq in sequences:
        for ev in seq.events:
            yield {
                "user_id": ev.user_id,
                "timestamp": format_timestamp(ev.timestamp),
                "platform": ev.platform,
                "activity": ev.activity,
                "content": ev.content or "",
            }


def write_events(sequences: Iterable[UserSequence], path, format: str | None = None) -> int:
    """Write the flat five-column schema; returns the number of rows written."""
    fmt = (format or infer_format(path)).lower()
    n = 0
    with atomic_open(path) as fh:
        if fmt == "csv":
            writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in event_rows(sequences):
                writer.writerow(row)
                n += 1
        elif fmt == "jsonl":
            for row in event_rows(sequences):
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=False) + "\n")
                n += 1
        else:
            raise InvalidInput(f"unknown format {format!r}")
    return n
