import csv
import json
from pathlib import Path

import pytest

from retnet.community import EnsembleConfig, Partition, ensemble_louvain
from retnet.influence import InfluenceSummary
from retnet.ingest import write_events
from retnet.report import (
    CommunityShareRow,
    PipelineConfig,
    PipelineError,
    community_hate_shares,
    meta_network,
    render_dot,
    render_meta_json,
    run_pipeline,
)
from retnet.snapshot import NodeTally, RetweetNetwork, WindowConfig, build_snapshot, project_undirected
from retnet.synthgen import BlockSpec, SynthConfig, generate_stream

DATA = Path(__file__).parent / "data"


def _net_with_tallies(tallies, edges=()):
    net = RetweetNetwork(t=0, t_end=0, window_start=-1)
    for user, (orig, unacc, ret) in tallies.items():
        net.nodes[user] = NodeTally(originals=orig, unacceptable=unacc, retweeted=ret)
    for key, w in dict(edges).items():
        net.edges[key] = w
    return net


def test_fraction_of_unacceptable_originals():
    g = _net_with_tallies({"a": (6, 2, 0), "b": (4, 2, 1)})
    p = Partition({"a": 0, "b": 0})
    (row,) = community_hate_shares(g, p)
    assert row.originals == 10
    assert row.unacceptable_fraction == 0.4


def test_two_community_shares():
    g = _net_with_tallies({"a": (10, 6, 0), "b": (10, 4, 0)})
    p = Partition({"a": 0, "b": 1})
    rows = community_hate_shares(g, p)
    assert [r.unacceptable_share for r in rows] == [0.6, 0.4]


def test_zero_originals_reports_absent_fraction():
    g = _net_with_tallies({"a": (3, 1, 0), "b": (0, 0, 0)})
    p = Partition({"a": 0, "b": 1})
    rows = community_hate_shares(g, p)
    assert rows[1].unacceptable_fraction is None
    assert rows[1].unacceptable_share == 0.0


def test_small_pooling_and_share_conservation():
    tallies = {f"u{i}": (i + 1, (i + 1) // 2, i % 3) for i in range(12)}
    g = _net_with_tallies(tallies)
    p = Partition({f"u{i}": i % 5 for i in range(12)})  # sizes: 3,3,2,2,2
    rows = community_hate_shares(g, p, top_n=3)
    assert [r.community for r in rows] == [0, 1, 2, "Small"]
    assert abs(sum(r.size_share for r in rows) - 1.0) < 1e-9
    assert abs(sum(r.unacceptable_share for r in rows) - 1.0) < 1e-9
    assert abs(sum(r.retweeted_share for r in rows) - 1.0) < 1e-9
    assert sum(r.originals for r in rows) == sum(t[0] for t in tallies.values())


def test_planted_hate_rates_recovered():
    cfg = SynthConfig(
        blocks=[BlockSpec(20, 0.5), BlockSpec(20, 0.1)],
        p_in=0.2,
        p_out=0.01,
        weeks=50,
        seed=13,
    )
    stream, truth = generate_stream(cfg)
    # window 51 weeks: covers (end - 51w, end], including the week-0 originals
    g = build_snapshot(stream, stream.end, WindowConfig.for_stream(stream, window_weeks=51))
    p = ensemble_louvain(project_undirected(g), EnsembleConfig(trials=20, threshold=0.9, base_seed=2))
    rows = community_hate_shares(g, p, top_n=2)
    assert sum(r.originals for r in rows) == 2000
    fractions = sorted(r.unacceptable_fraction for r in rows if isinstance(r.community, int))
    assert abs(fractions[1] - 0.5) <= 0.05
    assert abs(fractions[0] - 0.1) <= 0.05


def _summary(c, size, mass):
    total = sum(mass.values())
    return InfluenceSummary(
        community=c,
        size=size,
        mass_by_target=mass,
        influence=total / size,
        internal=mass.get(c, 0.0) / size,
        external={j: w / size for j, w in mass.items() if j != c},
    )


def _share_row(c, size, frac):
    return CommunityShareRow(
        community=c,
        size=size,
        size_share=size / 100,
        originals=10 * size,
        unacceptable=int(10 * size * frac),
        unacceptable_fraction=frac,
        unacceptable_share=0.5,
        retweeted=5,
        retweeted_share=0.5,
    )


def test_meta_network_edge_inclusion_by_threshold():
    shares = {0: [_share_row(0, 10, 0.2), _share_row(1, 5, 0.3)]}
    summaries = {0: [_summary(0, 10, {0: 1.0, 1: 30.0}), _summary(1, 5, {1: 2.0})]}
    meta = meta_network(summaries, shares, top_n=7, edge_threshold=1.0)
    assert [(e.source, e.target, e.influence) for e in meta.edges] == [(0, 1, 3.0)]
    meta_cut = meta_network(summaries, shares, top_n=7, edge_threshold=3.0)
    assert meta_cut.edges == []  # strict inequality at the threshold


def test_meta_network_edge_set_is_exactly_thresholded_topn():
    shares = {
        8: [_share_row(0, 40, 0.25), _share_row(1, 30, 0.5)],
        17: [_share_row(0, 55, 0.3), _share_row(1, 20, 0.1), _share_row("Small", 25, 0.2)],
    }
    summaries = {
        8: [_summary(0, 40, {0: 12.0, 1: 6.5}), _summary(1, 30, {1: 9.0, 0: 0.25})],
        17: [
            _summary(0, 55, {0: 20.0, 1: 3.0}),
            _summary(1, 20, {1: 5.0}),
            _summary(2, 25, {2: 1.0, 0: 4.0}),
        ],
    }
    meta = meta_network(summaries, shares, top_n=2, edge_threshold=0.05)
    expected = set()
    for t, ss in summaries.items():
        for s in ss:
            if s.community >= 2:
                continue
            for j, v in s.external.items():
                if j < 2 and v > 0.05:
                    expected.add((t, s.community, j))
    assert {(e.t, e.source, e.target) for e in meta.edges} == expected
    assert all(n.community < 2 for n in meta.nodes)


def test_meta_network_golden_renderings_are_byte_stable():
    shares = {
        8: [_share_row(0, 40, 0.25), _share_row(1, 30, 0.5)],
        17: [_share_row(0, 55, 0.3), _share_row(1, 20, 0.1), _share_row("Small", 25, 0.2)],
    }
    summaries = {
        8: [_summary(0, 40, {0: 12.0, 1: 6.5}), _summary(1, 30, {1: 9.0, 0: 0.25})],
        17: [
            _summary(0, 55, {0: 20.0, 1: 3.0}),
            _summary(1, 20, {1: 5.0}),
            _summary(2, 25, {2: 1.0, 0: 4.0}),
        ],
    }
    meta = meta_network(summaries, shares, top_n=2, edge_threshold=0.05)
    assert render_dot(meta) == (DATA / "meta_network_golden.dot").read_text()
    assert render_meta_json(meta) == (DATA / "meta_network_golden.json").read_text()


def test_labels_sidecar_names_meta_nodes():
    shares = {0: [_share_row(0, 10, 0.2)]}
    summaries = {0: [_summary(0, 10, {0: 1.0})]}
    meta = meta_network(summaries, shares, labels={"0": {"0": "Sports"}})
    assert meta.nodes[0].label == "Sports"
    assert 'label="Sports' in render_dot(meta)


def _synth_stream_file(tmp_path, seed=4, weeks=26):
    cfg = SynthConfig(
        blocks=[BlockSpec(12, 0.5), BlockSpec(8, 0.1)],
        p_in=0.3,
        p_out=0.02,
        weeks=weeks,
        seed=seed,
    )
    stream, _ = generate_stream(cfg)
    path = tmp_path / "events.jsonl"
    write_events(stream, path)
    return path


def _pipeline_cfg(path, **kwargs):
    defaults = dict(
        inputs=[str(path)],
        window_weeks=8,
        slide_weeks=1,
        half_life_weeks=4.0,
        trials=10,
        threshold=0.9,
        k=1,
        seed=9,
    )
    defaults.update(kwargs)
    return PipelineConfig(**defaults)


def test_pipeline_window_arithmetic_and_manifest(tmp_path):
    path = _synth_stream_file(tmp_path)
    out = run_pipeline(_pipeline_cfg(path), tmp_path / "out")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["windows"]["n"] == 19
    assert len(manifest["selected_timepoints"]) == 3
    assert manifest["selected_timepoints"][0] == 0
    assert manifest["selected_timepoints"][-1] == 18
    assert len(list((out / "partitions").glob("*.csv"))) == 19
    assert (out / "odds_ratio.json").exists()


def test_pipeline_is_deterministic(tmp_path):
    path = _synth_stream_file(tmp_path)
    out1 = run_pipeline(_pipeline_cfg(path), tmp_path / "out1")
    out2 = run_pipeline(_pipeline_cfg(path), tmp_path / "out2")
    files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    assert files1 == files2
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel


def test_pipeline_share_conservation_in_reports(tmp_path):
    path = _synth_stream_file(tmp_path)
    out = run_pipeline(_pipeline_cfg(path), tmp_path / "out")
    report_files = sorted((out / "reports").glob("communities_t*.csv"))
    assert report_files
    for f in report_files:
        with open(f, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        for column in ("size_share", "unacceptable_share", "retweeted_share"):
            values = [float(r[column]) for r in rows if r[column] != ""]
            assert abs(sum(values) - 1.0) < 5e-4 * max(1, len(values))


def test_pipeline_missing_input_leaves_no_artifacts(tmp_path):
    cfg = _pipeline_cfg(tmp_path / "absent.jsonl")
    with pytest.raises(PipelineError) as err:
        run_pipeline(cfg, tmp_path / "out")
    assert err.value.stage == "ingest"
    assert not (tmp_path / "out").exists()
    assert not list(tmp_path.glob("*.partial"))


def test_pipeline_refuses_existing_output(tmp_path):
    target = tmp_path / "out"
    target.mkdir()
    with pytest.raises(PipelineError):
        run_pipeline(_pipeline_cfg(_synth_stream_file(tmp_path)), target)


def test_pipeline_failure_mid_run_removes_partial_outputs(tmp_path, monkeypatch):
    path = _synth_stream_file(tmp_path)
    import retnet.report as report_mod

    def boom(*args, **kwargs):
        raise ValueError("synthetic failure")

    monkeypatch.setattr(report_mod, "select_timepoints", boom)
    with pytest.raises(PipelineError) as err:
        run_pipeline(_pipeline_cfg(path), tmp_path / "out")
    assert err.value.stage == "select"
    assert not (tmp_path / "out").exists()
    assert not list(tmp_path.glob("*.partial"))


def test_pipeline_respects_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("RETNET_THREADS", "2")
    path = _synth_stream_file(tmp_path, weeks=12)
    out = run_pipeline(_pipeline_cfg(path), tmp_path / "out_par")
    monkeypatch.setenv("RETNET_THREADS", "1")
    out_seq = run_pipeline(_pipeline_cfg(path), tmp_path / "out_seq")
    for rel in sorted(p.relative_to(out) for p in out.rglob("*") if p.is_file()):
        assert (out / rel).read_bytes() == (out_seq / rel).read_bytes(), rel
