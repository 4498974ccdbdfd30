"""Report assembly and end-to-end pipeline orchestration.

The pipeline is a pure function of (input files, config, seed): ingest,
window snapshots, consensus communities per window, timepoint selection,
influence and effect-size statistics, and deterministic exports (CSV
tables, JSON manifest, DOT meta-network, edge lists). Repeated runs with
the same inputs produce byte-identical artifact directories; any stage
error aborts the run and removes partial outputs.

Community identity is not matched across timepoints automatically; the
per-timepoint tables expose top members by h-index so a human can assign
display names in a sidecar labels file (JSON: {"<t>": {"<community>":
"Name"}}) that is consumed when rendering the meta-network and the
label-averaged effect sizes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .community import EnsembleConfig, Partition, ensemble_louvain, write_partition
from .evolution import SelectionConfig, adjacent_similarities, select_timepoints, write_similarities
from .influence import InfluenceSummary, community_influence, gini, influence_csv, user_influence
from .ingest import EventStream, merge_streams, parse_events, validate_stream
from .snapshot import (
    RetweetNetwork,
    WindowConfig,
    project_undirected,
    snapshot_series,
    write_edge_list,
)
from .stats import ContingencyTable, cohens_h, log_odds_ratio
from ._core import KERNEL

__all__ = [
    "CommunityShareRow",
    "MetaNode",
    "MetaEdge",
    "MetaNetwork",
    "PipelineConfig",
    "PipelineError",
    "community_hate_shares",
    "meta_network",
    "render_dot",
    "render_meta_json",
    "run_pipeline",
]

SMALL = "Small"


@dataclass
class CommunityShareRow:
    """Hate-speech shares for one community (or the pooled Small remainder)
    at one timepoint. Fractions are None when their denominator is zero."""

    community: int | str
    size: int
    size_share: float
    originals: int
    unacceptable: int
    unacceptable_fraction: float | None
    unacceptable_share: float | None
    retweeted: int
    retweeted_share: float | None


def community_hate_shares(g: RetweetNetwork, p: Partition, top_n: int = 7) -> list[CommunityShareRow]:
    """Per-community posting aggregates; communities beyond the top_n largest
    are pooled into a single "Small" row so shares sum to 1 per window."""
    if set(p.membership) != set(g.nodes):
        raise ValueError("partition must cover exactly the network's nodes")
    n_comms = p.n_communities
    sizes = [0] * n_comms
    originals = [0] * n_comms
    unacc = [0] * n_comms
    retweeted = [0] * n_comms
    for node, tally in g.nodes.items():
        c = p.membership[node]
        sizes[c] += 1
        originals[c] += tally.originals
        unacc[c] += tally.unacceptable
        retweeted[c] += tally.retweeted
    total_nodes = len(g.nodes)
    total_unacc = sum(unacc)
    total_retweeted = sum(retweeted)

    def row(label, size, orig, una, ret):
        return CommunityShareRow(
            community=label,
            size=size,
            size_share=size / total_nodes,
            originals=orig,
            unacceptable=una,
            unacceptable_fraction=(una / orig) if orig else None,
            unacceptable_share=(una / total_unacc) if total_unacc else None,
            retweeted=ret,
            retweeted_share=(ret / total_retweeted) if total_retweeted else None,
        )

    rows = [row(c, sizes[c], originals[c], unacc[c], retweeted[c]) for c in range(min(n_comms, top_n))]
    if n_comms > top_n:
        pooled = range(top_n, n_comms)
        rows.append(
            row(
                SMALL,
                sum(sizes[c] for c in pooled),
                sum(originals[c] for c in pooled),
                sum(unacc[c] for c in pooled),
                sum(retweeted[c] for c in pooled),
            )
        )
    return rows


@dataclass
class MetaNode:
    t: int
    community: int
    size: int
    unacceptable_fraction: float | None
    label: str


@dataclass
class MetaEdge:
    t: int
    source: int
    target: int
    influence: float


@dataclass
class MetaNetwork:
    nodes: list[MetaNode] = field(default_factory=list)
    edges: list[MetaEdge] = field(default_factory=list)


def meta_network(
    summaries_by_t: dict[int, list[InfluenceSummary]],
    shares_by_t: dict[int, list[CommunityShareRow]],
    top_n: int = 7,
    edge_threshold: float = 0.0,
    labels: dict | None = None,
) -> MetaNetwork:
    """Meta-network of the top communities at each selected timepoint.

    Edges are the external influence values I_ext(c -> j) strictly above the
    display threshold, both endpoints within the top_n of the same window.
    """
    labels = labels or {}
    meta = MetaNetwork()
    for t in sorted(shares_by_t):
        named = labels.get(str(t), {})
        for row_ in shares_by_t[t]:
            if not isinstance(row_.community, int) or row_.community >= top_n:
                continue
            meta.nodes.append(
                MetaNode(
                    t=t,
                    community=row_.community,
                    size=row_.size,
                    unacceptable_fraction=row_.unacceptable_fraction,
                    label=named.get(str(row_.community), f"t{t}/C{row_.community}"),
                )
            )
        for summary in summaries_by_t[t]:
            if summary.community >= top_n:
                continue
            for j in sorted(summary.external):
                if j >= top_n:
                    continue
                value = summary.external[j]
                if value > edge_threshold:
                    meta.edges.append(MetaEdge(t=t, source=summary.community, target=j, influence=value))
    return meta


def _node_id(t: int, c: int) -> str:
    return f"t{t}_c{c}"


def render_dot(meta: MetaNetwork) -> str:
    """Graphviz rendering; node order (t, size rank) and fixed float formats
    keep the output byte-stable. Node width grows with the cube root of the
    community size."""
    out = ["digraph meta_network {", "  rankdir=LR;", '  node [shape=circle style=filled fillcolor="#dddddd"];']
    by_t: dict[int, list[MetaNode]] = {}
    for node in meta.nodes:
        by_t.setdefault(node.t, []).append(node)
    for t in sorted(by_t):
        out.append(f"  subgraph cluster_t{t} {{")
        out.append(f'    label="t={t}";')
        for node in sorted(by_t[t], key=lambda n: n.community):
            frac = "n/a" if node.unacceptable_fraction is None else f"{node.unacceptable_fraction:.4f}"
            width = 0.4 + node.size ** (1.0 / 3.0) / 5.0
            out.append(
                f'    "{_node_id(node.t, node.community)}" '
                f'[label="{node.label}\\nsize={node.size}\\nunacc={frac}" width={width:.3f}];'
            )
        out.append("  }")
    for edge in sorted(meta.edges, key=lambda e: (e.t, e.source, e.target)):
        pen = 1.0 + math.log1p(edge.influence)
        out.append(
            f'  "{_node_id(edge.t, edge.source)}" -> "{_node_id(edge.t, edge.target)}" '
            f'[label="{edge.influence:.4f}" penwidth={pen:.2f}];'
        )
    out.append("}")
    return "\n".join(out) + "\n"


def render_meta_json(meta: MetaNetwork) -> str:
    payload = {
        "nodes": [
            {
                "id": _node_id(n.t, n.community),
                "t": n.t,
                "community": n.community,
                "size": n.size,
                "unacceptable_fraction": None
                if n.unacceptable_fraction is None
                else round(n.unacceptable_fraction, 6),
                "label": n.label,
            }
            for n in sorted(meta.nodes, key=lambda n: (n.t, n.community))
        ],
        "edges": [
            {
                "source": _node_id(e.t, e.source),
                "target": _node_id(e.t, e.target),
                "t": e.t,
                "influence": round(e.influence, 6),
            }
            for e in sorted(meta.edges, key=lambda e: (e.t, e.source, e.target))
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass
class PipelineConfig:
    inputs: list[str]
    fmt: str = "jsonl"
    window_weeks: int = 24
    slide_weeks: int = 1
    half_life_weeks: float = 4.0
    trials: int = 100
    threshold: float = 0.9
    k: int = 3
    top_n: int = 7
    edge_threshold: float = 0.0
    seed: int = 0
    strict: bool = False
    write_snapshots: bool = True
    labels_path: str | None = None


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def _window_seed(base: int, t: int, trials: int) -> int:
    # disjoint seed ranges per window
    return base + t * trials


def _detect_window(args):
    und, trials, threshold, base_seed = args
    return ensemble_louvain(und, EnsembleConfig(trials=trials, threshold=threshold, base_seed=base_seed))


def _workers() -> int:
    raw = os.environ.get("RETNET_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def detect_communities(undirected, trials: int, threshold: float, seed: int) -> list[Partition]:
    """Ensemble detection per window; parallel across windows when
    RETNET_THREADS > 1 (results are identical to the sequential run)."""
    jobs = [
        (und, trials, threshold, _window_seed(seed, und.t if und.t is not None else i, trials))
        for i, und in enumerate(undirected)
    ]
    workers = _workers()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_detect_window, jobs))
    return [_detect_window(job) for job in jobs]


def _fmt_opt(x, spec: str) -> str:
    return "" if x is None else format(x, spec)


def _community_report_csv(share_rows, summary_by_comm, pooled_influence, users_by_id, members_by_comm):
    """Merge hate shares, influence, and member h-index stats into one table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "community",
            "size",
            "size_share",
            "originals",
            "unacceptable",
            "unacceptable_fraction",
            "unacceptable_share",
            "retweeted",
            "retweeted_share",
            "influence_total",
            "influence_internal",
            "influence_external",
            "influence_share",
            "hindex_gini",
            "top_members",
        ]
    )
    for row in share_rows:
        if isinstance(row.community, int):
            summary = summary_by_comm[row.community]
            inf_total, inf_int = summary.influence, summary.internal
            inf_ext = summary.external_total
            inf_share = pooled_influence["by_comm"].get(row.community, 0.0)
            members = members_by_comm.get(row.community, [])
        else:
            inf_total, inf_int, inf_ext = pooled_influence["small_components"]
            inf_share = pooled_influence["small_share"]
            members = []
        hs = [users_by_id[u].hindex if u in users_by_id else 0 for u in members]
        gini_value = gini(hs) if hs and any(hs) else None
        top = sorted(members, key=lambda u: (-(users_by_id[u].hindex if u in users_by_id else 0), u))[:5]
        writer.writerow(
            [
                row.community,
                row.size,
                f"{row.size_share:.4f}",
                row.originals,
                row.unacceptable,
                _fmt_opt(row.unacceptable_fraction, ".4f"),
                _fmt_opt(row.unacceptable_share, ".4f"),
                row.retweeted,
                _fmt_opt(row.retweeted_share, ".4f"),
                f"{inf_total:.6f}",
                f"{inf_int:.6f}",
                f"{inf_ext:.6f}",
                f"{inf_share:.4f}",
                _fmt_opt(gini_value, ".4f"),
                ";".join(top),
            ]
        )
    return buf.getvalue()


def _users_csv(users, partition):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["user_id", "community", "hindex", "originals", "unacceptable_fraction"])
    for u in users:
        writer.writerow(
            [
                u.user_id,
                partition.membership.get(u.user_id, ""),
                u.hindex,
                u.originals,
                f"{u.unacceptable_fraction:.4f}",
            ]
        )
    return buf.getvalue()


_COMPARISONS = (
    ("unacceptable_share", "size_share"),
    ("retweeted_share", "size_share"),
    ("influence_share", "size_share"),
    ("unacceptable_share", "influence_share"),
)


def _effect_rows(shares_by_t, influence_share_by_t, labels: dict | None):
    """Cohen's h comparisons of community shares, per selected timepoint,
    plus label-averaged rows when a sidecar names communities over time."""
    rows = []
    per_name: dict[str, dict[str, list[float]]] = {}
    for t in sorted(shares_by_t):
        named = (labels or {}).get(str(t), {})
        for row in shares_by_t[t]:
            if not isinstance(row.community, int):
                continue
            values = {
                "size_share": row.size_share,
                "unacceptable_share": row.unacceptable_share,
                "retweeted_share": row.retweeted_share,
                "influence_share": influence_share_by_t[t]["by_comm"].get(row.community, 0.0),
            }
            for p1_name, p2_name in _COMPARISONS:
                p1, p2 = values[p1_name], values[p2_name]
                if p1 is None or p2 is None:
                    continue
                effect = cohens_h(min(p1, 1.0), min(p2, 1.0))
                rows.append((str(t), str(row.community), f"{p1_name}_vs_{p2_name}", p1, p2, effect))
            name = named.get(str(row.community))
            if name:
                acc = per_name.setdefault(name, {})
                for key, value in values.items():
                    if value is not None:
                        acc.setdefault(key, []).append(value)
    for name in sorted(per_name):
        acc = per_name[name]
        means = {key: sum(vals) / len(vals) for key, vals in acc.items()}
        for p1_name, p2_name in _COMPARISONS:
            if p1_name not in means or p2_name not in means:
                continue
            p1, p2 = means[p1_name], means[p2_name]
            effect = cohens_h(min(p1, 1.0), min(p2, 1.0))
            rows.append(("avg", name, f"{p1_name}_vs_{p2_name}", p1, p2, effect))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "community", "comparison", "p1", "p2", "h", "magnitude"])
    for t, comm, comparison, p1, p2, effect in rows:
        writer.writerow([t, comm, comparison, f"{p1:.4f}", f"{p2:.4f}", f"{effect.h:.4f}", effect.magnitude])
    return buf.getvalue()


def _influence_shares(g: RetweetNetwork, summaries) -> dict:
    """Share of the window's total weighted out-mass per community, plus the
    pooled remainder and pooled I components for the Small row."""
    total_mass = g.total_weight()
    by_comm = {}
    for s in summaries:
        mass = sum(s.mass_by_target.values())
        by_comm[s.community] = (mass / total_mass) if total_mass else 0.0
    return {"by_comm": by_comm, "total_mass": total_mass}


def _pooled_small(summaries, top_n: int, influence_shares: dict):
    pooled = [s for s in summaries if s.community >= top_n]
    info = dict(influence_shares)
    if pooled:
        size = sum(s.size for s in pooled)
        total = sum(sum(s.mass_by_target.values()) for s in pooled)
        internal = sum(s.mass_by_target.get(s.community, 0.0) for s in pooled)
        info["small_components"] = (total / size, internal / size, (total - internal) / size)
        info["small_share"] = sum(influence_shares["by_comm"][s.community] for s in pooled)
    else:
        info["small_components"] = (0.0, 0.0, 0.0)
        info["small_share"] = 0.0
    return info


def _odds_ratio_payload(stream: EventStream) -> dict:
    retweeted_ids = {ev.retweet_of.original_tweet_id for ev in stream if ev.retweet_of is not None}
    n11 = n10 = n01 = n00 = 0
    for ev in stream:
        if ev.retweet_of is not None:
            continue
        retweeted = ev.tweet_id in retweeted_ids
        if ev.label.unacceptable:
            n10, n00 = (n10 + 1, n00) if retweeted else (n10, n00 + 1)
        else:
            n11, n01 = (n11 + 1, n01) if retweeted else (n11, n01 + 1)
    table = {"retweeted_acceptable": n11, "retweeted_unacceptable": n10,
             "not_retweeted_acceptable": n01, "not_retweeted_unacceptable": n00}
    try:
        result = log_odds_ratio(ContingencyTable(n11=n11, n10=n10, n01=n01, n00=n00))
    except ValueError as exc:
        return {"table": table, "defined": False, "reason": str(exc)}
    return {
        "table": table,
        "defined": True,
        "log_odds_ratio": round(result.log_or, 9),
        "se": round(result.se, 9),
        "confidence": result.confidence,
        "z": round(result.z, 9),
        "ci_halfwidth": round(result.ci_halfwidth, 9),
        "odds_ratio": round(result.odds_ratio, 9),
        "or_ci": [round(result.or_low, 9), round(result.or_high, 9)],
    }


def _config_dict(cfg: PipelineConfig) -> dict:
    d = asdict(cfg)
    d["inputs"] = [str(Path(p).name) for p in cfg.inputs]  # content-identifying, location-free
    return d


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_pipeline(cfg: PipelineConfig, out_dir) -> Path:
    """Execute the full pipeline into ``out_dir`` (must not exist yet).

    Stages: ingest -> snapshots -> communities -> timepoint selection ->
    influence/stats -> reports. Output is built in a staging directory and
    moved into place only on success.
    """
    out = Path(out_dir)
    if out.exists():
        raise PipelineError("setup", f"output directory {out} already exists")
    staging = out.parent / (out.name + ".partial")
    if staging.exists():
        shutil.rmtree(staging)
    try:
        _run_stages(cfg, staging)
        staging.rename(out)
        return out
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


def _run_stages(cfg: PipelineConfig, root: Path):
    def fail(stage, exc):
        raise PipelineError(stage, exc) from exc

    root.mkdir(parents=True)

    # ingest
    try:
        streams = []
        reports = []
        for path in cfg.inputs:
            stream_i, report_i = parse_events(path, fmt=cfg.fmt, strict=cfg.strict)
            streams.append(stream_i)
            reports.append(report_i)
        stream = merge_streams(streams)
        if not len(stream):
            raise ValueError("no events parsed from input")
        validation = validate_stream(stream)
    except (OSError, ValueError) as exc:
        fail("ingest", exc)

    labels = None
    if cfg.labels_path:
        try:
            labels = json.loads(Path(cfg.labels_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            fail("ingest", exc)

    # snapshots
    try:
        wcfg = WindowConfig.for_stream(
            stream,
            window_weeks=cfg.window_weeks,
            slide_weeks=cfg.slide_weeks,
            half_life_weeks=cfg.half_life_weeks,
        )
        networks = snapshot_series(stream, wcfg)
        undirected = [project_undirected(g) for g in networks]
        if cfg.write_snapshots:
            snap_dir = root / "snapshots"
            snap_dir.mkdir()
            for g in networks:
                write_edge_list(g, snap_dir / f"edges_t{g.t:04d}.csv")
    except ValueError as exc:
        fail("snapshot", exc)

    # communities
    try:
        partitions = detect_communities(undirected, cfg.trials, cfg.threshold, cfg.seed)
        part_dir = root / "partitions"
        part_dir.mkdir()
        for p in partitions:
            write_partition(p, part_dir / f"partition_t{p.t:04d}.csv")
    except ValueError as exc:
        fail("communities", exc)

    # timepoint selection
    try:
        sims = adjacent_similarities(partitions)
        write_similarities(sims, root / "similarity_adjacent.csv")
        selected = select_timepoints(partitions, SelectionConfig(k=cfg.k))
        _write_json(root / "selected_timepoints.json", selected)
    except ValueError as exc:
        fail("select", exc)

    # influence + reports at selected timepoints
    try:
        inf_dir = root / "influence"
        rep_dir = root / "reports"
        inf_dir.mkdir()
        rep_dir.mkdir()
        shares_by_t: dict[int, list[CommunityShareRow]] = {}
        summaries_by_t: dict[int, list[InfluenceSummary]] = {}
        influence_share_by_t: dict[int, dict] = {}
        for t in selected:
            g = networks[t]
            p = partitions[t]
            summaries = community_influence(g, p)
            summaries_by_t[t] = summaries
            (inf_dir / f"influence_t{t:04d}.csv").write_text(influence_csv(summaries, t=t), encoding="utf-8")
            share_rows = community_hate_shares(g, p, top_n=cfg.top_n)
            shares_by_t[t] = share_rows
            inf_shares = _pooled_small(summaries, cfg.top_n, _influence_shares(g, summaries))
            influence_share_by_t[t] = inf_shares
            users = user_influence(stream, g.window_start, g.t_end)
            users_by_id = {u.user_id: u for u in users}
            members_by_comm: dict[int, list[str]] = {}
            for node in g.nodes:
                members_by_comm.setdefault(p.membership[node], []).append(node)
            (rep_dir / f"communities_t{t:04d}.csv").write_text(
                _community_report_csv(share_rows, {s.community: s for s in summaries},
                                      inf_shares, users_by_id, members_by_comm),
                encoding="utf-8",
            )
            (rep_dir / f"users_t{t:04d}.csv").write_text(_users_csv(users, p), encoding="utf-8")
        (rep_dir / "cohens_h.csv").write_text(
            _effect_rows(shares_by_t, influence_share_by_t, labels), encoding="utf-8"
        )
        meta = meta_network(summaries_by_t, shares_by_t, cfg.top_n, cfg.edge_threshold, labels)
        (root / "meta_network.dot").write_text(render_dot(meta), encoding="utf-8")
        (root / "meta_network.json").write_text(render_meta_json(meta), encoding="utf-8")
        _write_json(root / "odds_ratio.json", _odds_ratio_payload(stream))
    except ValueError as exc:
        fail("report", exc)

    # manifest
    config_dict = _config_dict(cfg)
    config_json = json.dumps(config_dict, sort_keys=True)
    skipped_total: dict[str, int] = {}
    for r in reports:
        for reason, count in sorted(r.skipped.items()):
            skipped_total[reason] = skipped_total.get(reason, 0) + count
    manifest = {
        "config": config_dict,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "kernel": KERNEL,
        "seeds": {"base": cfg.seed, "window_rule": "base + t * trials"},
        "counts": {
            "lines": sum(r.lines for r in reports),
            "events": len(stream),
            "skipped": skipped_total,
            "originals": validation.n_originals,
            "retweets": validation.n_retweets,
            "duplicate_tweet_ids": len(validation.duplicate_ids),
            "dangling_retweets": validation.dangling_retweets,
            "self_retweets": validation.self_retweets,
            "labels": validation.label_counts,
            "users": len({ev.author_id for ev in stream}),
        },
        "windows": {"n": len(networks), "t_ends": [g.t_end for g in networks]},
        "selected_timepoints": selected,
    }
    _write_json(root / "manifest.json", manifest)
    return root
