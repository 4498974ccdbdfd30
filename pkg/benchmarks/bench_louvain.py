#!/usr/bin/env python3
"""Benchmark: compiled vs pure-Python Louvain kernel.

Builds a planted two-block retweet stream, projects the last window, and
times repeated seeded Louvain runs through each kernel. The partitions are
asserted identical, so the speedup is a pure kernel comparison.

Usage:
  python benchmarks/bench_louvain.py [--users 300] [--weeks 20] [--trials 50]
"""

import argparse
import time

import numpy as np

from retnet._core import _louvain_py

try:
    from retnet._core import _louvain_cy
except ImportError:
    _louvain_cy = None

from retnet.community import _run_levels, _to_csr, louvain
from retnet.snapshot import WindowConfig, build_snapshot, project_undirected
from retnet.synthgen import BlockSpec, SynthConfig, generate_stream


def build_graph(users: int, weeks: int, seed: int):
    half = users // 2
    cfg = SynthConfig(
        blocks=[BlockSpec(half, 0.4), BlockSpec(users - half, 0.1)],
        p_in=0.15,
        p_out=0.01,
        weeks=weeks,
        seed=seed,
    )
    stream, _ = generate_stream(cfg)
    g = build_snapshot(stream, stream.end, WindowConfig.for_stream(stream, window_weeks=weeks))
    return project_undirected(g)


def time_full(net, kernel, trials: int):
    """End-to-end louvain per trial (CSR build + levels + finalize)."""
    start = time.perf_counter()
    partitions = [louvain(net, seed, _kernel=kernel) for seed in range(trials)]
    return time.perf_counter() - start, [p.membership for p in partitions]


def time_levels(net, kernel, trials: int):
    """Hot path only: CSR built once, seeded level runs per trial (the way
    the consensus ensemble drives the kernel)."""
    state = _to_csr(net)
    start = time.perf_counter()
    labels = [
        _run_levels(state, np.random.RandomState(seed), kernel) for seed in range(trials)
    ]
    return time.perf_counter() - start, labels


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=300)
    parser.add_argument("--weeks", type=int, default=20)
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    net = build_graph(args.users, args.weeks, args.seed)
    n_edges = len(net.weights)
    print(f"graph: {net.n_nodes} nodes, {n_edges} undirected edges, {args.trials} trials")

    py_full, py_parts = time_full(net, _louvain_py.local_moves, args.trials)
    py_hot, py_labels = time_levels(net, _louvain_py.local_moves, args.trials)
    print(
        f"pure-python kernel: full {py_full:.3f}s "
        f"({py_full / args.trials * 1e3:.1f} ms/run), "
        f"hot path {py_hot:.3f}s ({py_hot / args.trials * 1e3:.1f} ms/run)"
    )

    if _louvain_cy is None:
        print("compiled kernel not available (build with: pip install -e . --no-build-isolation)")
        return 1

    cy_full, cy_parts = time_full(net, _louvain_cy.local_moves, args.trials)
    cy_hot, cy_labels = time_levels(net, _louvain_cy.local_moves, args.trials)
    print(
        f"compiled kernel:    full {cy_full:.3f}s "
        f"({cy_full / args.trials * 1e3:.1f} ms/run), "
        f"hot path {cy_hot:.3f}s ({cy_hot / args.trials * 1e3:.1f} ms/run)"
    )

    for a, b in zip(py_parts, cy_parts):
        assert a == b, "kernels disagree; bit-for-bit contract broken"
    for a, b in zip(py_labels, cy_labels):
        assert np.array_equal(a, b), "kernels disagree; bit-for-bit contract broken"
    print(
        f"partitions identical across kernels; "
        f"speedup x{py_full / cy_full:.1f} full, x{py_hot / cy_hot:.1f} hot path"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
