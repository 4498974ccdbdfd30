"""Sliding-window retweet networks with exponential edge-weight decay.

A snapshot at window end ``t_end`` covers the half-open interval
``(t_end - window, t_end]``. Every in-window retweet of a tweet by user A,
retweeted by user B, adds ``0.5 ** (age / half_life)`` to the directed edge
A -> B, where age is measured in weeks from the retweet timestamp to the
window end. Self-retweets never create edges. Per-node tallies over the
in-window original tweets (posted, unacceptable, retweeted) are kept for
reporting; users that only post originals stay in the node set as isolated
nodes.
"""

from __future__ import annotations

import bisect
import csv
import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import EventStream

__all__ = [
    "SECONDS_PER_WEEK",
    "WindowConfig",
    "NodeTally",
    "RetweetNetwork",
    "UndirectedNetwork",
    "decay_weight",
    "build_snapshot",
    "snapshot_series",
    "window_ends",
    "project_undirected",
    "edge_list_csv",
    "write_edge_list",
]

SECONDS_PER_WEEK = 7 * 24 * 3600


@dataclass
class WindowConfig:
    stream_start: int
    stream_end: int
    window_weeks: int = 24
    slide_weeks: int = 1
    half_life_weeks: float = 4.0

    def __post_init__(self):
        if self.window_weeks <= 0:
            raise ValueError("window_weeks must be positive")
        if self.slide_weeks <= 0:
            raise ValueError("slide_weeks must be positive")
        if self.half_life_weeks <= 0:
            raise ValueError("half_life_weeks must be positive")
        if self.stream_end < self.stream_start:
            raise ValueError("stream_end before stream_start")

    @classmethod
    def for_stream(cls, stream: EventStream, **kwargs) -> "WindowConfig":
        if stream.start is None or stream.end is None:
            raise ValueError("cannot derive window config from an empty stream")
        return cls(stream_start=stream.start, stream_end=stream.end, **kwargs)

    @property
    def window_seconds(self) -> int:
        return self.window_weeks * SECONDS_PER_WEEK

    @property
    def slide_seconds(self) -> int:
        return self.slide_weeks * SECONDS_PER_WEEK


@dataclass
class NodeTally:
    originals: int = 0
    unacceptable: int = 0
    retweeted: int = 0


@dataclass
class RetweetNetwork:
    """Directed weighted graph for one window; edges point author -> retweeter."""

    t: int | None
    t_end: int
    window_start: int  # exclusive lower bound
    nodes: dict[str, NodeTally] = field(default_factory=dict)
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return sum(self.edges.values())


@dataclass
class UndirectedNetwork:
    """Symmetric projection: w{A,B} = w(A->B) + w(B->A). Node order is the
    insertion order of the source network and is part of identity (seeded
    algorithms visit nodes through it)."""

    t: int | None
    nodes: list[str]
    weights: dict[tuple[str, str], float] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def total_weight(self) -> float:
        return sum(self.weights.values())


def decay_weight(age_weeks: float, half_life_weeks: float = 4.0) -> float:
    """Exponential half-life decay; 1.0 at age 0, halved every half-life."""
    if age_weeks < 0:
        raise ValueError("age must be non-negative (event after window end?)")
    if half_life_weeks <= 0:
        raise ValueError("half_life must be positive")
    return 0.5 ** (age_weeks / half_life_weeks)


def _window_slice(events, lo: int, hi: int):
    ts = [e.timestamp for e in events]
    left = bisect.bisect_right(ts, lo)
    right = bisect.bisect_right(ts, hi)
    return events[left:right]


def build_snapshot(stream: EventStream, t_end: int, cfg: WindowConfig, t: int | None = None) -> RetweetNetwork:
    """Build one retweet network from the events in (t_end - window, t_end]."""
    window_start = t_end - cfg.window_seconds
    in_window = _window_slice(stream.events, window_start, t_end)
    net = RetweetNetwork(t=t, t_end=t_end, window_start=window_start)
    nodes = net.nodes
    edges = net.edges
    half_life = cfg.half_life_weeks
    retweeted_ids: set[str] = set()

    for ev in in_window:
        ref = ev.retweet_of
        if ref is None:
            continue
        retweeted_ids.add(ref.original_tweet_id)
        if ref.original_author_id == ev.author_id:
            # self-retweet: no social tie, but the user stays in the node set
            if ev.author_id not in nodes:
                nodes[ev.author_id] = NodeTally()
            continue
        author = ref.original_author_id
        retweeter = ev.author_id
        if author not in nodes:
            nodes[author] = NodeTally()
        if retweeter not in nodes:
            nodes[retweeter] = NodeTally()
        age_weeks = (t_end - ev.timestamp) / SECONDS_PER_WEEK
        w = decay_weight(age_weeks, half_life)
        if w == 0.0:
            continue
        key = (author, retweeter)
        edges[key] = edges.get(key, 0.0) + w

    for ev in in_window:
        if ev.retweet_of is not None:
            continue
        tally = nodes.get(ev.author_id)
        if tally is None:
            tally = nodes[ev.author_id] = NodeTally()
        tally.originals += 1
        if ev.label.unacceptable:
            tally.unacceptable += 1
        if ev.tweet_id in retweeted_ids:
            tally.retweeted += 1

    return net


def window_ends(cfg: WindowConfig) -> list[int]:
    """Window-end timestamps t_end = start + window + i * slide.

    The last index is chosen so the windows cover the stream end (the span
    is rounded up to the slide grid). A stream shorter than one window
    yields a single clipped window ending at the stream end.
    """
    span = cfg.stream_end - cfg.stream_start
    if span < cfg.window_seconds:
        warnings.warn(
            "stream is shorter than one window; building a single clipped window",
            stacklevel=2,
        )
        return [cfg.stream_end]
    n = -(-(span - cfg.window_seconds) // cfg.slide_seconds)  # ceil division
    base = cfg.stream_start + cfg.window_seconds
    return [base + i * cfg.slide_seconds for i in range(n + 1)]


def snapshot_series(stream: EventStream, cfg: WindowConfig) -> list[RetweetNetwork]:
    """One network per window; window t=i ends at start + window + i * slide."""
    return [build_snapshot(stream, t_end, cfg, t=i) for i, t_end in enumerate(window_ends(cfg))]


def project_undirected(g: RetweetNetwork) -> UndirectedNetwork:
    """Sum the two directions of every edge; node set is preserved."""
    nodes = list(g.nodes)
    index = {u: i for i, u in enumerate(nodes)}
    weights: dict[tuple[str, str], float] = {}
    for (a, b), w in g.edges.items():
        key = (a, b) if index[a] < index[b] else (b, a)
        weights[key] = weights.get(key, 0.0) + w
    return UndirectedNetwork(t=g.t, nodes=nodes, weights=weights)


def edge_list_csv(g: RetweetNetwork) -> str:
    """Weighted edge list, rows ordered by (src, dst), weights at 9 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["src", "dst", "weight"])
    for (src, dst) in sorted(g.edges):
        writer.writerow([src, dst, f"{g.edges[(src, dst)]:.9f}"])
    return buf.getvalue()


def write_edge_list(g: RetweetNetwork, path) -> None:
    Path(path).write_text(edge_list_csv(g), encoding="utf-8")
