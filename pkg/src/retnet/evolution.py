"""Partition similarity across time and coarse timepoint selection.

BCubed precision/recall are averaged per node over the union of the two
node sets; a node missing from one partition is treated there as a
singleton, which penalizes churn smoothly and keeps both directions
defined. F1 is the harmonic mean and is symmetric (precision and recall
swap when the arguments swap).

``select_timepoints`` keeps the first and last partitions plus the k
interior ones left standing after repeatedly deleting the interior
timepoint whose partition is most similar to its current neighbors
(maximal F1 sum; ties remove the smallest index). Deleting a timepoint
makes its neighbors adjacent, so each step invalidates at most one new
pair and similarities are computed lazily.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .community import Partition

__all__ = [
    "PartitionSimilarity",
    "SelectionConfig",
    "bcubed",
    "select_timepoints",
    "adjacent_similarities",
    "similarity_csv",
]


@dataclass
class PartitionSimilarity:
    pre: float
    rec: float
    f1: float
    degenerate: bool = False  # both partitions empty; scored 1.0 by convention


@dataclass
class SelectionConfig:
    k: int = 3


def bcubed(p: Partition, q: Partition) -> PartitionSimilarity:
    """Extended BCubed over the union node set (absent nodes are singletons)."""
    pm = p.membership
    qm = q.membership
    union = list(pm) + [u for u in qm if u not in pm]
    if not union:
        return PartitionSimilarity(pre=1.0, rec=1.0, f1=1.0, degenerate=True)
    p_sizes = Counter(pm.values())
    q_sizes = Counter(qm.values())
    pair_counts = Counter((pm[u], qm[u]) for u in pm if u in qm)
    pre_sum = 0.0
    rec_sum = 0.0
    for u in union:
        in_p = u in pm
        in_q = u in qm
        if in_p and in_q:
            inter = pair_counts[(pm[u], qm[u])]
            pre_sum += inter / p_sizes[pm[u]]
            rec_sum += inter / q_sizes[qm[u]]
        elif in_p:
            pre_sum += 1.0 / p_sizes[pm[u]]
            rec_sum += 1.0
        else:
            pre_sum += 1.0
            rec_sum += 1.0 / q_sizes[qm[u]]
    pre = pre_sum / len(union)
    rec = rec_sum / len(union)
    f1 = 2.0 * pre * rec / (pre + rec) if pre + rec > 0 else 0.0
    return PartitionSimilarity(pre=pre, rec=rec, f1=f1)


def select_timepoints(partitions, cfg: SelectionConfig, similarity=None) -> list[int]:
    """Return sorted surviving indices {0, i_1..i_k, n} after n-1-k
    eliminations. ``similarity`` defaults to BCubed F1 and may be injected
    (e.g. to count evaluations)."""
    n = len(partitions) - 1
    if n < 1:
        raise ValueError("need at least two partitions")
    k = cfg.k
    if not (0 <= k <= n - 1):
        raise ValueError(f"k must be in [0, {n - 1}], got {k}")
    sim = similarity if similarity is not None else (lambda a, b: bcubed(a, b).f1)
    cache: dict[tuple[int, int], float] = {}

    def f1(i: int, j: int) -> float:
        key = (i, j)
        value = cache.get(key)
        if value is None:
            value = sim(partitions[i], partitions[j])
            cache[key] = value
        return value

    alive = list(range(n + 1))
    for _ in range(n - 1 - k):
        best_pos = -1
        best_score = float("-inf")
        for pos in range(1, len(alive) - 1):
            t = alive[pos]
            score = f1(alive[pos - 1], t) + f1(t, alive[pos + 1])
            if score > best_score:  # strict: ties keep the smallest index
                best_score = score
                best_pos = pos
        alive.pop(best_pos)
    return alive


def adjacent_similarities(partitions) -> list[PartitionSimilarity]:
    return [bcubed(partitions[i], partitions[i + 1]) for i in range(len(partitions) - 1)]


def similarity_csv(sims, indices=None) -> str:
    """Adjacent-pair similarity export; ``indices`` defaults to 0..len-1."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_left", "t_right", "precision", "recall", "f1"])
    for i, s in enumerate(sims):
        left = indices[i] if indices else i
        right = indices[i + 1] if indices else i + 1
        writer.writerow([left, right, f"{s.pre:.12f}", f"{s.rec:.12f}", f"{s.f1:.12f}"])
    return buf.getvalue()


def write_similarities(sims, path, indices=None) -> None:
    Path(path).write_text(similarity_csv(sims, indices), encoding="utf-8")
