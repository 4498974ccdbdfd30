"""Synthetic labeled retweet streams with planted communities.

A discrete-time block model over retweet events: each week, every user
posts one original tweet (unacceptable with the block's hate rate), and
every ordered pair (author, retweeter) independently emits a retweet of
that week's original with probability p_in inside a block and p_out across
blocks. An optional drift schedule moves users between blocks at given
weeks. The planted membership per week is returned as ground truth, so the
generator doubles as the oracle for end-to-end tests.

Generation is bit-deterministic given the seed: all random draws come from
one legacy numpy RandomState in a fixed order (per week: label draws, pair
draws, timestamp draws).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .community import Partition
from .ingest import EventStream, HateLabel, RetweetRef, TweetEvent
from .snapshot import SECONDS_PER_WEEK

__all__ = [
    "BlockSpec",
    "DriftEvent",
    "SynthConfig",
    "GroundTruth",
    "generate_stream",
    "ground_truth_csv",
]


@dataclass
class BlockSpec:
    user_count: int
    hate_rate: float


@dataclass
class DriftEvent:
    week: int
    user_id: str
    to_block: int


@dataclass
class SynthConfig:
    blocks: list[BlockSpec]
    p_in: float
    p_out: float
    weeks: int
    drift: list[DriftEvent] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("need at least one block")
        for b in self.blocks:
            if b.user_count < 1:
                raise ValueError("block user_count must be >= 1")
            if not (0.0 <= b.hate_rate <= 1.0):
                raise ValueError("hate_rate must be in [0, 1]")
        if not (self.p_in > self.p_out >= 0.0):
            raise ValueError("need p_in > p_out >= 0")
        if self.p_in > 1.0:
            raise ValueError("p_in must be <= 1")
        if self.weeks < 1:
            raise ValueError("weeks must be >= 1")


@dataclass
class GroundTruth:
    """Planted membership: (user_id, week) -> block index, plus hate rates."""

    membership: dict[tuple[str, int], int]
    hate_rates: list[float]
    users: list[str]
    weeks: int

    def blocks_at(self, week: int) -> dict[str, int]:
        return {u: self.membership[(u, week)] for u in self.users}

    def partition_at(self, week: int) -> Partition:
        """Planted blocks as a Partition (block ids re-ranked by size)."""
        blocks = self.blocks_at(week)
        sizes: dict[int, int] = {}
        for b in blocks.values():
            sizes[b] = sizes.get(b, 0) + 1
        order = sorted(sizes, key=lambda b: (-sizes[b], b))
        remap = {b: i for i, b in enumerate(order)}
        return Partition(membership={u: remap[b] for u, b in blocks.items()})


def generate_stream(cfg: SynthConfig):
    """Return ``(EventStream, GroundTruth)``; same seed, same bytes."""
    rs = np.random.RandomState(cfg.seed % 2**32)
    users: list[str] = []
    block_of: dict[str, int] = {}
    for b_idx, block in enumerate(cfg.blocks):
        for _ in range(block.user_count):
            uid = f"u{len(users):04d}"
            users.append(uid)
            block_of[uid] = b_idx
    drift_by_week: dict[int, list[DriftEvent]] = {}
    for move in cfg.drift:
        if move.user_id not in block_of:
            raise ValueError(f"drift references unknown user {move.user_id}")
        if not (0 <= move.to_block < len(cfg.blocks)):
            raise ValueError("drift target block out of range")
        drift_by_week.setdefault(move.week, []).append(move)

    n = len(users)
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    events: list[TweetEvent] = []
    membership: dict[tuple[str, int], int] = {}

    for week in range(cfg.weeks):
        for move in drift_by_week.get(week, ()):
            block_of[move.user_id] = move.to_block
        for uid in users:
            membership[(uid, week)] = block_of[uid]
        week_start = week * SECONDS_PER_WEEK

        label_draws = rs.random_sample(n)
        week_labels: list[HateLabel] = []
        for idx, uid in enumerate(users):
            rate = cfg.blocks[block_of[uid]].hate_rate
            label = HateLabel.OFFENSIVE if label_draws[idx] < rate else HateLabel.ACCEPTABLE
            week_labels.append(label)
            events.append(
                TweetEvent(
                    tweet_id=f"o{uid}w{week}",
                    author_id=uid,
                    timestamp=week_start,
                    label=label,
                )
            )

        pair_draws = rs.random_sample(len(pairs))
        ts_draws = rs.randint(week_start + 1, week_start + SECONDS_PER_WEEK + 1, size=len(pairs))
        for p_idx, (a, b) in enumerate(pairs):
            author = users[a]
            retweeter = users[b]
            p = cfg.p_in if block_of[author] == block_of[retweeter] else cfg.p_out
            if pair_draws[p_idx] >= p:
                continue
            events.append(
                TweetEvent(
                    tweet_id=f"r{week}p{p_idx}",
                    author_id=retweeter,
                    timestamp=int(ts_draws[p_idx]),
                    label=week_labels[a],
                    retweet_of=RetweetRef(
                        original_tweet_id=f"o{author}w{week}",
                        original_author_id=author,
                    ),
                )
            )

    stream = EventStream.from_events(events, start=0, end=cfg.weeks * SECONDS_PER_WEEK)
    truth = GroundTruth(
        membership=membership,
        hate_rates=[b.hate_rate for b in cfg.blocks],
        users=users,
        weeks=cfg.weeks,
    )
    return stream, truth


def ground_truth_csv(truth: GroundTruth) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["user_id", "week", "block"])
    for week in range(truth.weeks):
        for uid in truth.users:
            writer.writerow([uid, week, truth.membership[(uid, week)]])
    return buf.getvalue()


def write_ground_truth(truth: GroundTruth, path) -> None:
    Path(path).write_text(ground_truth_csv(truth), encoding="utf-8")
