"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with ``pytest tests/test_acceptance.py -v -s``).

Every tolerance and runtime budget is pinned here; nothing is deferred to
later calibration.
"""

import csv
import json
import math
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from retnet.community import EnsembleConfig, Partition, ensemble_louvain, louvain, modularity
from retnet.evolution import SelectionConfig, bcubed, select_timepoints
from retnet.influence import gini, retweet_hindex
from retnet.ingest import write_events
from retnet.snapshot import (
    SECONDS_PER_WEEK,
    WindowConfig,
    build_snapshot,
    decay_weight,
    project_undirected,
)
from retnet.stats import ContingencyTable, cohens_h, log_odds_ratio
from retnet.synthgen import BlockSpec, SynthConfig, generate_stream
from oracles import (
    bcubed_pairwise,
    best_partition_modularity,
    gini_mad,
    original,
    partitions_equal_over_union,
    retweet,
    snapshot_mass,
    undirected,
)


@contextmanager
def criterion(number, description, budget_seconds=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number} FAIL: {description}")
        raise
    elapsed = time.perf_counter() - start
    if budget_seconds is not None:
        assert elapsed < budget_seconds, f"criterion {number} exceeded {budget_seconds}s ({elapsed:.1f}s)"
    print(f"[acceptance] criterion {number} PASS: {description} ({elapsed:.2f}s)")


def test_criterion_1_odds_ratio_regression():
    with criterion(1, "odds ratio regression on the three-year contingency", 30):
        table = ContingencyTable(n11=708_094, n10=270_282, n01=5_866_259, n00=1_518_636)
        result = log_odds_ratio(table)  # warm-up
        assert abs(result.log_or - (-0.388)) <= 0.001
        assert abs(result.ci_halfwidth - 0.006) <= 0.001
        assert abs(result.odds_ratio - 0.678) <= 0.001
        start = time.perf_counter()
        log_odds_ratio(table)
        assert time.perf_counter() - start < 1e-3, "single evaluation must run under 1 ms"


def test_criterion_2_louvain_vs_exhaustive_modularity():
    # Louvain is greedy and any single run can stall in a local optimum
    # (the reference networkx implementation stalls on the same graphs), so
    # the check mirrors production usage (many seeded trials) and takes the
    # best of a fixed 20-seed set per graph.
    with criterion(2, "louvain >= 0.95x exhaustive optimum on 50 small graphs", 30):
        rs = np.random.RandomState(202)
        checked = 0
        while checked < 50:
            n = int(rs.randint(4, 9))
            nodes = [f"n{i}" for i in range(n)]
            weights = {
                (nodes[i], nodes[j]): float(rs.uniform(0.1, 2.0))
                for i in range(n)
                for j in range(i + 1, n)
                if rs.rand() < 0.55
            }
            if not weights:
                continue
            checked += 1
            g = undirected(weights, extra_nodes=nodes)
            best_q, _ = best_partition_modularity(weights, nodes)
            q = max(modularity(g, louvain(g, seed)) for seed in range(20))
            assert q >= 0.95 * best_q - 1e-12, f"graph {checked}: {q} < 0.95 * {best_q}"
            assert modularity(g, Partition({u: 0 for u in nodes})) == 0.0


def test_criterion_3_bcubed_against_pairwise_oracle():
    with criterion(3, "bcubed matches the per-node pairwise oracle on 200 pairs", 10):
        rs = np.random.RandomState(303)
        pairs = 0
        while pairs < 200:
            n_union = int(rs.randint(2, 21))
            union = [f"n{i}" for i in range(n_union)]
            p_nodes = [u for u in union if rs.rand() < 0.85]
            q_nodes = [u for u in union if rs.rand() < 0.85]
            if pairs % 5 == 0:  # include exact-equality cases for the iff check
                membership = {u: int(rs.randint(0, 4)) for u in union}
                p = Partition(dict(membership))
                q = Partition(dict(membership))
            else:
                p = Partition({u: int(rs.randint(0, 5)) for u in p_nodes})
                q = Partition({u: int(rs.randint(0, 5)) for u in q_nodes})
            if not p.membership and not q.membership:
                continue
            pairs += 1
            s = bcubed(p, q)
            pre, rec, f1 = bcubed_pairwise(p.membership, q.membership)
            assert abs(s.pre - pre) < 1e-12
            assert abs(s.rec - rec) < 1e-12
            assert abs(s.f1 - f1) < 1e-12
            assert (abs(s.f1 - 1.0) < 1e-12) == partitions_equal_over_union(
                p.membership, q.membership
            )


def test_criterion_4_consensus_recovers_planted_blocks():
    with criterion(4, "ensemble recovers 2 planted blocks on 20 seeds (F1 >= 0.95)", 120):
        for seed in range(20):
            cfg = SynthConfig(
                blocks=[BlockSpec(50, 0.5), BlockSpec(50, 0.1)],
                p_in=0.3,
                p_out=0.01,
                weeks=30,
                seed=seed,
            )
            stream, truth = generate_stream(cfg)
            g = build_snapshot(stream, stream.end, WindowConfig.for_stream(stream))
            und = project_undirected(g)
            p = ensemble_louvain(
                und, EnsembleConfig(trials=100, threshold=0.9, base_seed=1000 + seed)
            )
            f1 = bcubed(p, truth.partition_at(cfg.weeks - 1)).f1
            assert f1 >= 0.95, f"seed {seed}: F1 {f1:.4f} < 0.95"


def test_criterion_5_decay_exactness_and_window_mass():
    with criterion(5, "decay halving to 1e-12 and window mass equals the event oracle", 30):
        rs = np.random.RandomState(505)
        for age in rs.uniform(0, 80, size=1000):
            assert abs(decay_weight(age + 4, 4) - decay_weight(age, 4) / 2.0) < 1e-12
        for trial in range(5):
            events = []
            for i in range(500):
                ts = int(rs.randint(0, 40 * SECONDS_PER_WEEK))
                if rs.rand() < 0.75:
                    a, b = rs.choice(25, size=2, replace=False)
                    events.append(retweet(f"r{i}", f"u{b}", ts, f"o{i}", f"u{a}"))
                else:
                    events.append(original(f"o{i}", f"u{rs.randint(25)}", ts))
            from retnet.ingest import EventStream

            stream = EventStream.from_events(events)
            cfg = WindowConfig(stream.start, stream.end, window_weeks=24, half_life_weeks=4)
            for t_end in (24 * SECONDS_PER_WEEK, stream.end):
                g = build_snapshot(stream, t_end, cfg)
                expected = snapshot_mass(events, t_end, cfg.window_seconds, 4)
                assert abs(g.total_weight() - expected) < 1e-9


def test_criterion_6_timepoint_elimination_heuristic():
    with criterion(6, "elimination heuristic: counts, hand-derived fixture, k = n-1", 30):
        def P(groups):
            return Partition({u: c for c, grp in enumerate(groups) for u in grp})

        parts = [
            P([["1", "2", "3", "4", "5", "6"]]),
            P([["1", "2", "3"], ["4", "5", "6"]]),
            P([["1", "2", "3"], ["4", "5", "6"]]),
            P([["1", "2"], ["3"], ["4", "5", "6"]]),
            P([["1"], ["2"], ["3"], ["4", "5", "6"]]),
            P([["1"], ["2"], ["3"], ["4"], ["5"], ["6"]]),
        ]
        n = len(parts) - 1
        # hand-computed adjacent F1 chain: 2/3, 1, 7/8, 10/11, 4/5
        hand = [2 / 3, 1.0, 7 / 8, 10 / 11, 4 / 5]
        for i, expected in enumerate(hand):
            assert abs(bcubed(parts[i], parts[i + 1]).f1 - expected) < 1e-12
        evaluations = 0

        def counting(a, b):
            nonlocal evaluations
            evaluations += 1
            return bcubed(a, b).f1

        k = 2
        result = select_timepoints(parts, SelectionConfig(k=k), similarity=counting)
        assert result == [0, 1, 4, 5]  # hand-derived elimination of 2 then 3
        assert len(result) == k + 2  # exactly n - 1 - k eliminations happened
        assert evaluations <= n + (n - 1 - k)
        assert select_timepoints(parts, SelectionConfig(k=n - 1)) == list(range(n + 1))


def test_criterion_7_hindex_and_gini():
    with criterion(7, "h-index examples and Gini dual-formula agreement", 30):
        assert retweet_hindex([5, 4, 3, 2, 1]) == 3
        assert retweet_hindex([10, 10, 10]) == 3
        assert retweet_hindex([]) == 0
        for c in (0.5, 1.0, 7.0):
            assert abs(gini([c, c, c, c])) < 1e-12
        assert abs(gini([0, 0, 0, 1]) - 0.75) < 1e-12
        rs = np.random.RandomState(707)
        for _ in range(100):
            values = rs.uniform(0, 10, size=int(rs.randint(1, 50))).tolist()
            if sum(values) == 0:
                continue
            assert abs(gini(values) - gini_mad(values)) < 1e-12


def test_criterion_8_cohens_h_closed_forms():
    with criterion(8, "Cohen's h closed forms, antisymmetry, magnitude thresholds", 30):
        effect = cohens_h(0.5, 0.25)
        assert abs(effect.h - math.pi / 6) < 1e-12
        assert effect.magnitude == "medium"
        rs = np.random.RandomState(808)
        for _ in range(100):
            p1, p2 = rs.uniform(0, 1, size=2)
            assert abs(cohens_h(p1, p2).h + cohens_h(p2, p1).h) < 1e-12
        assert cohens_h(0.5, 0.5).magnitude == "negligible"
        for h_target, name in ((0.21, "small"), (0.51, "medium"), (0.81, "large")):
            p1 = math.sin(h_target / 2.0) ** 2
            assert cohens_h(p1, 0.0).magnitude == name


def test_criterion_9_end_to_end_determinism(tmp_path):
    with criterion(9, "CLI run is byte-identical across reruns; shares conserved", 60):
        cfg = SynthConfig(
            blocks=[BlockSpec(12, 0.5), BlockSpec(8, 0.1)],
            p_in=0.3,
            p_out=0.02,
            weeks=26,
            seed=4,
        )
        stream, _ = generate_stream(cfg)
        events = tmp_path / "events.jsonl"
        write_events(stream, events)
        outs = []
        for name in ("out1", "out2"):
            out = tmp_path / name
            proc = subprocess.run(
                [
                    sys.executable,
                    "-m",
                    "retnet",
                    "run",
                    "--input",
                    str(events),
                    "--window-weeks",
                    "8",
                    "--slide-weeks",
                    "1",
                    "--half-life-weeks",
                    "4",
                    "--k",
                    "1",
                    "--seed",
                    "9",
                    "--out",
                    str(out),
                ],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
            outs.append(out)
        files1 = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
        assert files1 == files2 and files1
        for rel in files1:
            assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel

        manifest = json.loads((outs[0] / "manifest.json").read_text())
        assert manifest["windows"]["n"] == 19
        assert len(manifest["selected_timepoints"]) == 3

        report_files = sorted((outs[0] / "reports").glob("communities_t*.csv"))
        assert len(report_files) == 3
        for f in report_files:
            with open(f, newline="") as fh:
                rows = list(csv.DictReader(fh))
            assert rows
            total_unacc = sum(int(r["unacceptable"]) for r in rows)
            total_ret = sum(int(r["retweeted"]) for r in rows)
            total_size = sum(int(r["size"]) for r in rows)
            for r in rows:
                # rendered share must match the exact count ratio at 4 decimals
                assert abs(float(r["size_share"]) - int(r["size"]) / total_size) <= 5e-5
                if total_unacc and r["unacceptable_share"]:
                    assert (
                        abs(float(r["unacceptable_share"]) - int(r["unacceptable"]) / total_unacc)
                        <= 5e-5
                    )
                if total_ret and r["retweeted_share"]:
                    assert (
                        abs(float(r["retweeted_share"]) - int(r["retweeted"]) / total_ret) <= 5e-5
                    )
            for column in ("size_share", "unacceptable_share", "retweeted_share"):
                values = [float(r[column]) for r in rows if r[column] != ""]
                if values:
                    assert abs(sum(values) - 1.0) <= 5e-4 * len(values)
