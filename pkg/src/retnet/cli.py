"""Command-line interface.

``retnet run`` executes the whole pipeline; ``snapshot``, ``communities``,
``select`` and ``report`` expose the stages individually, exchanging data
through the exported file formats (edge lists, partition CSVs, selected
timepoints JSON). RETNET_THREADS caps per-window parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .community import read_partition, write_partition
from .evolution import SelectionConfig, adjacent_similarities, select_timepoints, write_similarities
from .ingest import merge_streams, parse_events, validate_stream
from .report import PipelineConfig, PipelineError, run_pipeline
from .snapshot import WindowConfig, project_undirected, snapshot_series, write_edge_list


def _add_input_args(p):
    p.add_argument("--input", nargs="+", required=True, help="input event file(s)")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--strict", action="store_true", help="fail on malformed lines")


def _add_window_args(p):
    p.add_argument("--window-weeks", type=int, default=24)
    p.add_argument("--slide-weeks", type=int, default=1)
    p.add_argument("--half-life-weeks", type=float, default=4.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the full pipeline")
    _add_input_args(run)
    _add_window_args(run)
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--threshold", type=float, default=0.9)
    run.add_argument("--k", type=int, default=3)
    run.add_argument("--top-n", type=int, default=7)
    run.add_argument("--edge-threshold", type=float, default=0.0)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--labels", help="sidecar JSON naming communities for rendering")
    run.add_argument("--no-snapshots", action="store_true", help="skip edge-list exports")
    run.add_argument("--out", required=True)

    snap = sub.add_parser("snapshot", help="write per-window edge lists")
    _add_input_args(snap)
    _add_window_args(snap)
    snap.add_argument("--out", required=True)

    comm = sub.add_parser("communities", help="write per-window consensus partitions")
    _add_input_args(comm)
    _add_window_args(comm)
    comm.add_argument("--trials", type=int, default=100)
    comm.add_argument("--threshold", type=float, default=0.9)
    comm.add_argument("--seed", type=int, default=0)
    comm.add_argument("--out", required=True)

    sel = sub.add_parser("select", help="select timepoints from partition CSVs")
    sel.add_argument("--partitions", required=True, help="directory of partition_t*.csv files")
    sel.add_argument("--k", type=int, default=3)
    sel.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="build reports from events + partitions + selection")
    _add_input_args(rep)
    _add_window_args(rep)
    rep.add_argument("--partitions", required=True)
    rep.add_argument("--selected", required=True, help="selected_timepoints.json")
    rep.add_argument("--top-n", type=int, default=7)
    rep.add_argument("--edge-threshold", type=float, default=0.0)
    rep.add_argument("--labels")
    rep.add_argument("--out", required=True)
    return parser


def _load_stream(args):
    streams = []
    for path in args.input:
        stream, report = parse_events(path, fmt=args.format, strict=args.strict)
        if report.total_skipped:
            print(f"{path}: skipped {dict(report.skipped)}", file=sys.stderr)
        streams.append(stream)
    merged = merge_streams(streams)
    if not len(merged):
        raise ValueError("no events parsed from input")
    return merged


def _window_config(stream, args) -> WindowConfig:
    return WindowConfig.for_stream(
        stream,
        window_weeks=args.window_weeks,
        slide_weeks=args.slide_weeks,
        half_life_weeks=args.half_life_weeks,
    )


def _read_partitions_dir(path):
    files = sorted(Path(path).glob("partition_t*.csv"))
    if not files:
        raise ValueError(f"no partition_t*.csv files in {path}")
    partitions = []
    for f in files:
        t = int(f.stem.removeprefix("partition_t"))
        partitions.append(read_partition(f, t=t))
    return partitions


def cmd_run(args) -> int:
    cfg = PipelineConfig(
        inputs=args.input,
        fmt=args.format,
        window_weeks=args.window_weeks,
        slide_weeks=args.slide_weeks,
        half_life_weeks=args.half_life_weeks,
        trials=args.trials,
        threshold=args.threshold,
        k=args.k,
        top_n=args.top_n,
        edge_threshold=args.edge_threshold,
        seed=args.seed,
        strict=args.strict,
        write_snapshots=not args.no_snapshots,
        labels_path=args.labels,
    )
    out = run_pipeline(cfg, args.out)
    print(f"wrote {out}", file=sys.stderr)
    return 0


def cmd_snapshot(args) -> int:
    stream = _load_stream(args)
    networks = snapshot_series(stream, _window_config(stream, args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for g in networks:
        write_edge_list(g, out / f"edges_t{g.t:04d}.csv")
    print(f"wrote {len(networks)} edge lists to {out}", file=sys.stderr)
    return 0


def cmd_communities(args) -> int:
    from .report import detect_communities

    stream = _load_stream(args)
    networks = snapshot_series(stream, _window_config(stream, args))
    undirected = [project_undirected(g) for g in networks]
    partitions = detect_communities(undirected, args.trials, args.threshold, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for p in partitions:
        write_partition(p, out / f"partition_t{p.t:04d}.csv")
    print(f"wrote {len(partitions)} partitions to {out}", file=sys.stderr)
    return 0


def cmd_select(args) -> int:
    partitions = _read_partitions_dir(args.partitions)
    sims = adjacent_similarities(partitions)
    selected = select_timepoints(partitions, SelectionConfig(k=args.k))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_similarities(sims, out / "similarity_adjacent.csv")
    (out / "selected_timepoints.json").write_text(
        json.dumps(selected, indent=2) + "\n", encoding="utf-8"
    )
    print(f"selected timepoints: {selected}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    from .influence import community_influence, influence_csv, user_influence
    from .report import (
        _community_report_csv,
        _effect_rows,
        _influence_shares,
        _pooled_small,
        _users_csv,
        community_hate_shares,
        meta_network,
        render_dot,
        render_meta_json,
    )

    stream = _load_stream(args)
    networks = snapshot_series(stream, _window_config(stream, args))
    partitions = _read_partitions_dir(args.partitions)
    if len(partitions) != len(networks):
        raise ValueError(
            f"partition count ({len(partitions)}) does not match window count ({len(networks)}); "
            "rerun 'communities' with the same window settings"
        )
    selected = json.loads(Path(args.selected).read_text(encoding="utf-8"))
    labels = json.loads(Path(args.labels).read_text(encoding="utf-8")) if args.labels else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shares_by_t, summaries_by_t, influence_share_by_t = {}, {}, {}
    for t in selected:
        g, p = networks[t], partitions[t]
        summaries = community_influence(g, p)
        summaries_by_t[t] = summaries
        (out / f"influence_t{t:04d}.csv").write_text(influence_csv(summaries, t=t), encoding="utf-8")
        share_rows = community_hate_shares(g, p, top_n=args.top_n)
        shares_by_t[t] = share_rows
        inf_shares = _pooled_small(summaries, args.top_n, _influence_shares(g, summaries))
        influence_share_by_t[t] = inf_shares
        users = user_influence(stream, g.window_start, g.t_end)
        users_by_id = {u.user_id: u for u in users}
        members_by_comm = {}
        for node in g.nodes:
            members_by_comm.setdefault(p.membership[node], []).append(node)
        (out / f"communities_t{t:04d}.csv").write_text(
            _community_report_csv(share_rows, {s.community: s for s in summaries},
                                  inf_shares, users_by_id, members_by_comm),
            encoding="utf-8",
        )
        (out / f"users_t{t:04d}.csv").write_text(_users_csv(users, p), encoding="utf-8")
    (out / "cohens_h.csv").write_text(_effect_rows(shares_by_t, influence_share_by_t, labels), encoding="utf-8")
    meta = meta_network(summaries_by_t, shares_by_t, args.top_n, args.edge_threshold, labels)
    (out / "meta_network.dot").write_text(render_dot(meta), encoding="utf-8")
    (out / "meta_network.json").write_text(render_meta_json(meta), encoding="utf-8")
    print(f"wrote reports for timepoints {selected} to {out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "run": cmd_run,
    "snapshot": cmd_snapshot,
    "communities": cmd_communities,
    "select": cmd_select,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
