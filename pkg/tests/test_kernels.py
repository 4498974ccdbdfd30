"""The compiled and pure-Python Louvain kernels must be interchangeable:
identical labels on identical inputs, at every level of the driver."""

import os

import numpy as np
import pytest

from retnet._core import KERNEL, _louvain_py
from retnet.community import louvain
from retnet.snapshot import WindowConfig, project_undirected, snapshot_series
from retnet.synthgen import BlockSpec, SynthConfig, generate_stream
from oracles import random_undirected

cy = pytest.importorskip("retnet._core._louvain_cy")


def _csr_from(net):
    from retnet.community import _to_csr

    return _to_csr(net)


def test_kernel_labels_identical_on_random_graphs():
    rs = np.random.RandomState(0)
    for trial in range(40):
        net = random_undirected(rs, n_max=25, p=0.35)
        if not net.weights:
            continue
        indptr, indices, weights, degrees, _, m = _csr_from(net)
        n = len(net.nodes)
        for seed in range(3):
            order = np.random.RandomState(seed).permutation(n).astype(np.int64)
            a = _louvain_py.local_moves(indptr, indices, weights, degrees, m, order, 1e-12 * m)
            b = cy.local_moves(indptr, indices, weights, degrees, m, order, 1e-12 * m)
            assert np.array_equal(a, b), f"trial {trial} seed {seed}"


def test_full_louvain_identical_across_kernels():
    cfg = SynthConfig(
        blocks=[BlockSpec(25, 0.4), BlockSpec(20, 0.1), BlockSpec(15, 0.2)],
        p_in=0.25,
        p_out=0.02,
        weeks=10,
        seed=5,
    )
    stream, _ = generate_stream(cfg)
    nets = snapshot_series(stream, WindowConfig.for_stream(stream, window_weeks=8))
    for net in nets[:: max(1, len(nets) // 3)]:
        und = project_undirected(net)
        for seed in range(10):
            p_py = louvain(und, seed, _kernel=_louvain_py.local_moves)
            p_cy = louvain(und, seed, _kernel=cy.local_moves)
            assert p_py.membership == p_cy.membership


def test_default_kernel_is_compiled_when_available():
    if os.environ.get("RETNET_PURE_PYTHON"):
        assert KERNEL == "python"
    else:
        assert KERNEL == "cython"
