"""Parsing and validation of labeled tweet event streams.

Input is line-delimited: either JSON lines (one object per line) or CSV with
a mandatory header row. Each record is one original tweet or retweet with a
UTC epoch-second timestamp, a four-class speech label, optional retweet
provenance, and an optional user-type tag. Retweet records carry the original
author inline, so downstream network construction never needs a join against
the original tweets.

CSV column order is fixed:
    tweet_id, author_id, timestamp, label, original_tweet_id,
    original_author_id, user_type
with empty strings for absent optionals.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "HateLabel",
    "RetweetRef",
    "TweetEvent",
    "EventStream",
    "ParseError",
    "ParseReport",
    "ValidationReport",
    "parse_events",
    "validate_stream",
    "serialize_events",
    "write_events",
    "merge_streams",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "tweet_id",
    "author_id",
    "timestamp",
    "label",
    "original_tweet_id",
    "original_author_id",
    "user_type",
)


class HateLabel(enum.IntEnum):
    """Speech label, ordered by severity. Everything above ACCEPTABLE is
    jointly treated as unacceptable in the binary view."""

    ACCEPTABLE = 0
    INAPPROPRIATE = 1
    OFFENSIVE = 2
    VIOLENT = 3

    @property
    def unacceptable(self) -> bool:
        return self is not HateLabel.ACCEPTABLE

    @classmethod
    def from_string(cls, text: str) -> "HateLabel":
        try:
            return _LABEL_LOOKUP[text.strip().casefold()]
        except KeyError:
            raise ValueError(f"unknown label {text!r}") from None

    def __str__(self) -> str:
        return self.name.capitalize()


_LABEL_LOOKUP = {label.name.casefold(): label for label in HateLabel}


@dataclass(slots=True)
class RetweetRef:
    original_tweet_id: str
    original_author_id: str


@dataclass(slots=True)
class TweetEvent:
    tweet_id: str
    author_id: str
    timestamp: int
    label: HateLabel
    retweet_of: RetweetRef | None = None
    user_type: str | None = None

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of is not None

    @property
    def is_self_retweet(self) -> bool:
        return self.retweet_of is not None and self.retweet_of.original_author_id == self.author_id


@dataclass
class EventStream:
    """Time-ordered events plus the stream's [start, end] timestamp span.

    The span defaults to the observed min/max event timestamp but may be set
    explicitly (e.g. by a generator that knows its nominal coverage).
    """

    events: list[TweetEvent]
    start: int | None = None
    end: int | None = None

    @classmethod
    def from_events(cls, events, start=None, end=None) -> "EventStream":
        ordered = sorted(events, key=lambda e: e.timestamp)
        if ordered:
            if start is None:
                start = ordered[0].timestamp
            if end is None:
                end = ordered[-1].timestamp
        return cls(events=ordered, start=start, end=end)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


class ParseError(ValueError):
    """Raised for unreadable input, or for malformed lines in strict mode."""


@dataclass
class ParseReport:
    lines: int = 0
    parsed: int = 0
    skipped: Counter = field(default_factory=Counter)

    @property
    def total_skipped(self) -> int:
        return sum(self.skipped.values())


def _as_id(value) -> str:
    if isinstance(value, str) and value:
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    raise ValueError("identifier must be a non-empty string")


def _as_timestamp(value) -> int:
    if isinstance(value, bool):
        raise ValueError("timestamp must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ValueError("timestamp must be an integer")


def _event_from_json(obj) -> TweetEvent:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    tweet_id = _as_id(obj["tweet_id"])
    author_id = _as_id(obj["author_id"])
    timestamp = _as_timestamp(obj["timestamp"])
    label = HateLabel.from_string(str(obj["label"]))
    ref = None
    raw_ref = obj.get("retweet_of")
    if raw_ref is not None:
        if not isinstance(raw_ref, dict):
            raise ValueError("retweet_of must be an object")
        ref = RetweetRef(
            original_tweet_id=_as_id(raw_ref["original_tweet_id"]),
            original_author_id=_as_id(raw_ref["original_author_id"]),
        )
    user_type = obj.get("user_type")
    if user_type is not None and not isinstance(user_type, str):
        raise ValueError("user_type must be a string")
    return TweetEvent(tweet_id, author_id, timestamp, label, ref, user_type or None)


def _event_from_csv(row: list[str]) -> TweetEvent:
    if len(row) != len(CSV_COLUMNS):
        raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
    tweet_id, author_id, ts_text, label_text, orig_id, orig_author, user_type = (
        cell.strip() for cell in row
    )
    if not tweet_id or not author_id:
        raise ValueError("identifier must be a non-empty string")
    try:
        timestamp = int(ts_text)
    except ValueError:
        raise ValueError("timestamp must be an integer") from None
    label = HateLabel.from_string(label_text)
    if bool(orig_id) != bool(orig_author):
        raise ValueError("original_tweet_id and original_author_id must be set together")
    ref = RetweetRef(orig_id, orig_author) if orig_id else None
    return TweetEvent(tweet_id, author_id, timestamp, label, ref, user_type or None)


def _open_lines(source):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline=""), True
    return source, False


def parse_events(source, fmt: str = "jsonl", strict: bool = False):
    """Parse line-delimited events into a timestamp-sorted EventStream.

    ``source`` is a path or an iterable of text lines. Malformed lines are
    skipped and counted (raised as ParseError in strict mode); lines with an
    unknown label string are always skipped and counted. Returns
    ``(EventStream, ParseReport)``.
    """
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    handle, owned = _open_lines(source)
    report = ParseReport()
    events: list[TweetEvent] = []
    try:
        if fmt == "jsonl":
            for lineno, line in enumerate(handle, 1):
                report.lines += 1
                text = line.strip()
                if not text:
                    report.skipped["blank"] += 1
                    continue
                try:
                    obj = json.loads(text)
                    events.append(_event_from_json(obj))
                except (ValueError, KeyError) as exc:
                    _record_skip(report, exc, strict, lineno)
                else:
                    report.parsed += 1
        else:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError("csv input is empty (header row required)") from None
            if tuple(h.strip() for h in header) != CSV_COLUMNS:
                raise ParseError(f"csv header must be {','.join(CSV_COLUMNS)}")
            for row in reader:
                report.lines += 1
                if not row or all(not cell.strip() for cell in row):
                    report.skipped["blank"] += 1
                    continue
                try:
                    events.append(_event_from_csv(row))
                except ValueError as exc:
                    _record_skip(report, exc, strict, reader.line_num)
                else:
                    report.parsed += 1
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    finally:
        if owned:
            handle.close()
    return EventStream.from_events(events), report


def _record_skip(report: ParseReport, exc: Exception, strict: bool, lineno: int):
    if isinstance(exc, ValueError) and "unknown label" in str(exc):
        report.skipped["unknown_label"] += 1
        return
    if strict:
        raise ParseError(f"line {lineno}: {exc}") from exc
    report.skipped["malformed"] += 1


def serialize_events(events, fmt: str = "jsonl") -> str:
    """Inverse of parse_events for well-formed event sets."""
    if fmt == "jsonl":
        lines = []
        for ev in events:
            obj = {
                "tweet_id": ev.tweet_id,
                "author_id": ev.author_id,
                "timestamp": ev.timestamp,
                "label": str(ev.label),
            }
            if ev.retweet_of is not None:
                obj["retweet_of"] = {
                    "original_tweet_id": ev.retweet_of.original_tweet_id,
                    "original_author_id": ev.retweet_of.original_author_id,
                }
            if ev.user_type is not None:
                obj["user_type"] = ev.user_type
            lines.append(json.dumps(obj, separators=(",", ":")))
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for ev in events:
            ref = ev.retweet_of
            writer.writerow(
                [
                    ev.tweet_id,
                    ev.author_id,
                    str(ev.timestamp),
                    str(ev.label),
                    ref.original_tweet_id if ref else "",
                    ref.original_author_id if ref else "",
                    ev.user_type or "",
                ]
            )
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def write_events(stream, path, fmt: str = "jsonl") -> None:
    Path(path).write_text(serialize_events(stream, fmt), encoding="utf-8")


def merge_streams(streams) -> EventStream:
    """Merge sharded streams; ordering is stable by timestamp."""
    events: list[TweetEvent] = []
    starts, ends = [], []
    for s in streams:
        events.extend(s.events)
        if s.start is not None:
            starts.append(s.start)
        if s.end is not None:
            ends.append(s.end)
    return EventStream.from_events(
        events,
        start=min(starts) if starts else None,
        end=max(ends) if ends else None,
    )


@dataclass
class ValidationReport:
    n_events: int
    n_originals: int
    n_retweets: int
    duplicate_ids: list[str]
    dangling_retweets: int
    self_retweets: int
    label_counts: dict[str, int]

    @property
    def unacceptable_count(self) -> int:
        return sum(
            count
            for name, count in self.label_counts.items()
            if HateLabel.from_string(name).unacceptable
        )


def validate_stream(stream: EventStream) -> ValidationReport:
    """Pure report over a parsed stream: duplicates, dangling retweets
    (original outside the stream; the event is retained), self-retweets,
    and the detailed label distribution."""
    seen: set[str] = set()
    dupes: set[str] = set()
    original_ids: set[str] = set()
    label_counts = {str(label): 0 for label in HateLabel}
    n_retweets = 0
    self_retweets = 0
    for ev in stream:
        if ev.tweet_id in seen:
            dupes.add(ev.tweet_id)
        seen.add(ev.tweet_id)
        if ev.is_retweet:
            n_retweets += 1
            if ev.is_self_retweet:
                self_retweets += 1
        else:
            original_ids.add(ev.tweet_id)
        label_counts[str(ev.label)] += 1
    dangling = sum(
        1
        for ev in stream
        if ev.is_retweet and ev.retweet_of.original_tweet_id not in original_ids
    )
    return ValidationReport(
        n_events=len(stream),
        n_originals=len(stream) - n_retweets,
        n_retweets=n_retweets,
        duplicate_ids=sorted(dupes),
        dangling_retweets=dangling,
        self_retweets=self_retweets,
        label_counts=label_counts,
    )
