"""Community detection: weighted-modularity Louvain plus ensemble consensus.

``louvain`` runs the classic two-phase greedy scheme (best-gain local moves
until stable, aggregate communities into a smaller graph, repeat to a
fixpoint). The only randomness is the node visit order, drawn per level from
a seeded legacy numpy RandomState, so results are deterministic given the
network (including its node insertion order) and the seed.

``ensemble_louvain`` stabilizes the result: it runs many seeded trials,
counts how often node pairs land in the same community, keeps the pairs that
co-occur in at least a threshold fraction of trials, and returns the
connected components of that co-occurrence graph.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._core import KERNEL, local_moves
from .snapshot import UndirectedNetwork

__all__ = [
    "KERNEL",
    "Partition",
    "EnsembleConfig",
    "modularity",
    "louvain",
    "ensemble_louvain",
    "partition_csv",
    "write_partition",
    "read_partition",
]

_SEED_SPACE = 2**32


@dataclass
class Partition:
    """Node -> community id; ids are dense 0..C-1 ordered by descending
    community size (ties by first appearance in node order)."""

    membership: dict[str, int]
    t: int | None = None

    @property
    def n_communities(self) -> int:
        return len(set(self.membership.values())) if self.membership else 0

    def sizes(self) -> list[int]:
        counts = Counter(self.membership.values())
        return [counts[c] for c in range(len(counts))]

    def communities(self) -> list[list[str]]:
        groups: list[list[str]] = [[] for _ in range(self.n_communities)]
        for node, c in self.membership.items():
            groups[c].append(node)
        return groups


@dataclass
class EnsembleConfig:
    trials: int = 100
    threshold: float = 0.9
    base_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError("threshold must be in (0, 1]")


def _finalize_partition(raw: dict[str, int], node_order, t) -> Partition:
    sizes = Counter(raw.values())
    first: dict[int, int] = {}
    for pos, u in enumerate(node_order):
        c = raw[u]
        if c not in first:
            first[c] = pos
    ordered = sorted(sizes, key=lambda c: (-sizes[c], first[c]))
    remap = {c: k for k, c in enumerate(ordered)}
    return Partition(membership={u: remap[raw[u]] for u in node_order}, t=t)


def modularity(g: UndirectedNetwork, p: Partition) -> float:
    """Newman-Girvan weighted modularity Q = sum_c (e_c/m - (d_c/2m)^2).

    The degree of a community accumulates 2w per intra-community edge in the
    same order as m accumulates w, so the all-in-one partition evaluates to
    exactly 0.0. An edgeless graph has Q = 0 by convention.
    """
    if set(p.membership) != set(g.nodes):
        raise ValueError("partition must cover exactly the network's nodes")
    m = 0.0
    intra: dict[int, float] = {}
    degree: dict[int, float] = {}
    for (u, v), w in g.weights.items():
        cu = p.membership[u]
        cv = p.membership[v]
        m += w
        if cu == cv:
            intra[cu] = intra.get(cu, 0.0) + w
            degree[cu] = degree.get(cu, 0.0) + 2.0 * w
        else:
            degree[cu] = degree.get(cu, 0.0) + w
            degree[cv] = degree.get(cv, 0.0) + w
    if m == 0.0:
        return 0.0
    q = 0.0
    for c in sorted(set(p.membership.values())):
        e_c = intra.get(c, 0.0)
        d_c = degree.get(c, 0.0)
        q += e_c / m - (d_c / (2.0 * m)) ** 2
    return q


def _to_csr(net: UndirectedNetwork):
    """CSR arrays over node indices (insertion order): every edge stored in
    both rows, no self entries, plus per-node self weight (zero at level 0),
    weighted degrees, and the total once-counted mass m."""
    nodes = net.nodes
    n = len(nodes)
    index = {u: i for i, u in enumerate(nodes)}
    n_edges = len(net.weights)
    us = np.fromiter((index[u] for u, _ in net.weights), dtype=np.int64, count=n_edges)
    vs = np.fromiter((index[v] for _, v in net.weights), dtype=np.int64, count=n_edges)
    ws = np.fromiter(net.weights.values(), dtype=np.float64, count=n_edges)
    if np.any(ws <= 0.0):
        raise ValueError("edge weights must be positive")
    if np.any(us == vs):
        raise ValueError("self-loops are not allowed in the input network")
    self_w = np.zeros(n, dtype=np.float64)
    return _assemble_csr(n, us, vs, ws, self_w)


def _assemble_csr(n, us, vs, ws, self_w):
    cat_src = np.concatenate([us, vs])
    cat_dst = np.concatenate([vs, us])
    cat_w = np.concatenate([ws, ws])
    perm = np.argsort(cat_src, kind="stable")
    indices = cat_dst[perm]
    weights = cat_w[perm]
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(cat_src, minlength=n), dtype=np.int64)
    degrees = np.bincount(cat_src, weights=cat_w, minlength=n) + 2.0 * self_w
    m = float(np.sum(ws)) + float(np.sum(self_w))
    return indptr, indices, weights, degrees, self_w, m


def _renumber(labels: np.ndarray):
    """Dense ids in order of first occurrence by node index."""
    uniq, first_idx, inv = np.unique(labels, return_index=True, return_inverse=True)
    remap = np.empty(uniq.size, dtype=np.int64)
    remap[np.argsort(first_idx, kind="stable")] = np.arange(uniq.size)
    return remap[inv], uniq.size


def _aggregate(indptr, indices, weights, self_w, dense, ncomm):
    """Collapse communities into meta-nodes. Off-diagonal mass stays in CSR
    rows (both directions); intra-community mass, including carried-over
    self-loops, becomes the meta-node's self weight (counted once)."""
    n = indptr.size - 1
    row = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    upper = indices > row  # each undirected pair once (CSR has no self entries)
    ci = dense[row[upper]]
    cj = dense[indices[upper]]
    w = weights[upper]
    intra = ci == cj
    new_self = np.bincount(dense, weights=self_w, minlength=ncomm)
    if intra.any():
        new_self = new_self + np.bincount(ci[intra], weights=w[intra], minlength=ncomm)
    lo = np.minimum(ci[~intra], cj[~intra])
    hi = np.maximum(ci[~intra], cj[~intra])
    key = lo * ncomm + hi
    uniq, inv = np.unique(key, return_inverse=True)
    if uniq.size:
        agg_w = np.bincount(inv, weights=w[~intra])
    else:
        agg_w = np.zeros(0, dtype=np.float64)
    ua = (uniq // ncomm).astype(np.int64)
    ub = (uniq % ncomm).astype(np.int64)
    return _assemble_csr(ncomm, ua, ub, agg_w, new_self)


def _run_levels(csr_state, rs, kern):
    """Louvain level loop over preassembled CSR state; returns the raw
    community id per original node. The state arrays are never mutated, so
    one CSR build can serve many seeded trials."""
    indptr, indices, weights, degrees, self_w, m = csr_state
    node_comm = np.arange(indptr.size - 1, dtype=np.int64)
    while True:
        n = indptr.size - 1
        if indices.size == 0 or m <= 0.0:
            break
        order = rs.permutation(n).astype(np.int64)
        labels = kern(indptr, indices, weights, degrees, float(m), order, 1e-12 * float(m))
        dense, ncomm = _renumber(labels)
        if ncomm == n:
            break
        node_comm = dense[node_comm]
        indptr, indices, weights, degrees, self_w, m = _aggregate(
            indptr, indices, weights, self_w, dense, ncomm
        )
    return node_comm


def louvain(g: UndirectedNetwork, seed: int, *, _kernel=None) -> Partition:
    """Deterministic seeded Louvain; isolated nodes come out as singletons."""
    if not g.nodes:
        raise ValueError("cannot partition an empty network")
    kern = _kernel if _kernel is not None else local_moves
    rs = np.random.RandomState(seed % _SEED_SPACE)
    node_comm = _run_levels(_to_csr(g), rs, kern)
    raw = {u: int(node_comm[i]) for i, u in enumerate(g.nodes)}
    return _finalize_partition(raw, g.nodes, t=g.t)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def ensemble_louvain(g: UndirectedNetwork, cfg: EnsembleConfig, *, _kernel=None) -> Partition:
    """Consensus over ``cfg.trials`` Louvain runs seeded base_seed + i.

    Nodes with identical trial trajectories are grouped first, so pair
    counting is sparse (only pairs that ever share a community). The
    consensus partition is the set of connected components of the graph of
    pairs whose co-occurrence fraction reaches the threshold.
    """
    if not g.nodes:
        raise ValueError("cannot partition an empty network")
    nodes = list(g.nodes)
    n = len(nodes)
    trials = cfg.trials
    kern = _kernel if _kernel is not None else local_moves
    csr_state = _to_csr(g)  # built once, shared by all trials
    labels = np.empty((trials, n), dtype=np.int64)
    for i in range(trials):
        rs = np.random.RandomState((cfg.base_seed + i) % _SEED_SPACE)
        labels[i] = _run_levels(csr_state, rs, kern)

    # group nodes by identical label trajectories
    sig_to_gid: dict[bytes, int] = {}
    gid_of = np.empty(n, dtype=np.int64)
    rep: list[int] = []
    cols = np.ascontiguousarray(labels.T)
    for col in range(n):
        sig = cols[col].tobytes()
        gid = sig_to_gid.get(sig)
        if gid is None:
            gid = len(sig_to_gid)
            sig_to_gid[sig] = gid
            rep.append(col)
        gid_of[col] = gid
    n_groups = len(rep)

    counts: dict[tuple[int, int], int] = {}
    for trial in range(trials):
        by_comm: dict[int, list[int]] = {}
        row = labels[trial]
        for gid in range(n_groups):
            by_comm.setdefault(int(row[rep[gid]]), []).append(gid)
        for members in by_comm.values():
            for x in range(len(members)):
                gx = members[x]
                for y in range(x + 1, len(members)):
                    key = (gx, members[y])
                    counts[key] = counts.get(key, 0) + 1

    uf = _UnionFind(n_groups)
    need = cfg.threshold * trials - 1e-9
    for (g1, g2), cnt in counts.items():
        if cnt >= need:
            uf.union(g1, g2)

    raw = {nodes[i]: uf.find(int(gid_of[i])) for i in range(n)}
    return _finalize_partition(raw, nodes, t=g.t)


def partition_csv(p: Partition) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node_id", "community_id"])
    for node in sorted(p.membership):
        writer.writerow([node, p.membership[node]])
    return buf.getvalue()


def write_partition(p: Partition, path) -> None:
    Path(path).write_text(partition_csv(p), encoding="utf-8")


def read_partition(path, t: int | None = None) -> Partition:
    """Read a (node_id, community_id) CSV; ids are re-normalized to the dense
    size-ordered scheme so external partitions satisfy the same invariant."""
    raw: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node_id", "community_id"]:
            raise ValueError("partition csv must have header node_id,community_id")
        for row in reader:
            if not row:
                continue
            raw[row[0]] = int(row[1])
    return _finalize_partition(raw, list(raw), t=t)
