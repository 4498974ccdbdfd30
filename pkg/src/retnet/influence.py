"""Retweet influence: community-level mass, per-user h-index, Gini.

Community influence is the weighted out-degree between communities (edges
run author -> retweeter, so out-edges measure being retweeted), normalized
by the source community size. The user-level retweet h-index is the largest
h such that the user posted h tweets each retweeted at least h times, over
raw (undecayed) retweet counts inside a reporting period.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .community import Partition
from .ingest import EventStream
from .snapshot import RetweetNetwork

__all__ = [
    "InfluenceSummary",
    "UserInfluence",
    "community_influence",
    "retweet_hindex",
    "gini",
    "user_influence",
    "influence_csv",
]


@dataclass
class InfluenceSummary:
    community: int
    size: int
    mass_by_target: dict[int, float]  # j -> W_cj (zero entries omitted)
    influence: float  # I = sum_j W_cj / size
    internal: float  # I_int = W_cc / size
    external: dict[int, float]  # j -> I_ext(c -> j), j != c

    @property
    def external_total(self) -> float:
        return sum(self.external.values())


def community_influence(g: RetweetNetwork, p: Partition) -> list[InfluenceSummary]:
    """Per-community influence from the directed window network."""
    if set(p.membership) != set(g.nodes):
        raise ValueError("partition must cover exactly the network's nodes")
    sizes = Counter(p.membership.values())
    n_comms = len(sizes)
    mass: dict[tuple[int, int], float] = {}
    for (a, b), w in g.edges.items():
        key = (p.membership[a], p.membership[b])
        mass[key] = mass.get(key, 0.0) + w
    summaries = []
    for c in range(n_comms):
        row = {j: mass[(i, j)] for (i, j) in sorted(mass) if i == c}
        size = sizes[c]
        total = sum(row.values())
        internal = row.get(c, 0.0) / size
        external = {j: w / size for j, w in row.items() if j != c}
        summaries.append(
            InfluenceSummary(
                community=c,
                size=size,
                mass_by_target=row,
                influence=total / size,
                internal=internal,
                external=external,
            )
        )
    return summaries


def retweet_hindex(retweet_counts) -> int:
    """Largest h with at least h tweets retweeted at least h times."""
    h = 0
    for rank, count in enumerate(sorted(retweet_counts, reverse=True), 1):
        if count >= rank:
            h = rank
        else:
            break
    return h


def gini(values) -> float:
    """Gini concentration via the sorted form
    G = sum_i (2i - n - 1) x_(i) / (n^2 mean), identical to the
    mean-absolute-difference definition. Population normalization; bounded
    by (n-1)/n. Undefined (raises) for an all-zero vector."""
    x = np.asarray(list(values), dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("gini needs a non-empty 1-d collection")
    if np.any(x < 0):
        raise ValueError("gini is defined for non-negative values")
    total = float(np.sum(x))
    if total == 0.0:
        raise ValueError("gini undefined for all-zero values")
    xs = np.sort(x, kind="stable")
    n = x.size
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(np.sum((2.0 * ranks - n - 1) * xs) / (n * total))


@dataclass
class UserInfluence:
    user_id: str
    hindex: int
    originals: int
    unacceptable: int

    @property
    def unacceptable_fraction(self) -> float:
        return self.unacceptable / self.originals


def user_influence(stream: EventStream, period_start=None, period_end=None) -> list[UserInfluence]:
    """Per-user h-index and unacceptable fraction over the reporting period
    (half-open (start, end]; defaults to the whole stream). Only users that
    posted at least one original in the period are listed; self-retweets do
    not count toward retweet tallies."""
    lo = period_start if period_start is not None else float("-inf")
    hi = period_end if period_end is not None else float("inf")
    retweets_of: Counter = Counter()
    for ev in stream:
        if not (lo < ev.timestamp <= hi):
            continue
        if ev.retweet_of is not None and not ev.is_self_retweet:
            retweets_of[ev.retweet_of.original_tweet_id] += 1
    per_user_counts: dict[str, list[int]] = {}
    per_user_unacc: Counter = Counter()
    for ev in stream:
        if ev.retweet_of is not None or not (lo < ev.timestamp <= hi):
            continue
        per_user_counts.setdefault(ev.author_id, []).append(retweets_of[ev.tweet_id])
        if ev.label.unacceptable:
            per_user_unacc[ev.author_id] += 1
    return [
        UserInfluence(
            user_id=user,
            hindex=retweet_hindex(counts),
            originals=len(counts),
            unacceptable=per_user_unacc[user],
        )
        for user, counts in sorted(per_user_counts.items())
    ]


def influence_csv(summaries, t=None) -> str:
    """Export rows (t, from_community, to_community, W, I_component)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "from_community", "to_community", "W", "I_component"])
    for s in summaries:
        for j in sorted(s.mass_by_target):
            w = s.mass_by_target[j]
            writer.writerow(
                [
                    "" if t is None else t,
                    s.community,
                    j,
                    f"{w:.9f}",
                    f"{w / s.size:.9f}",
                ]
            )
    return buf.getvalue()
