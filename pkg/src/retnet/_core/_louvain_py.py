"""Pure-Python Louvain local-move sweep.

Fallback twin of the Cython kernel in ``_louvain_cy.pyx``. The two must stay
in lockstep: same visit order, same accumulation order, same expression
shapes, so that both return bit-identical labels. CPython floats are IEEE
doubles, so matching the expression shapes is sufficient.

Graph encoding: CSR over node indices 0..n-1 with every undirected edge
stored in both rows and no self entries. ``degrees`` must already include
twice the node's self-loop weight (self-loops appear in aggregated graphs);
``m`` is the total graph weight with every edge and self-loop counted once.
"""

import numpy as np

_MAX_SWEEPS = 10000


def local_moves(indptr, indices, weights, degrees, m, order, min_gain):
    """Greedy best-gain moves, sweeping in ``order`` until no move improves
    modularity by more than ``min_gain`` (in edge-weight units). Ties between
    equally good target communities go to the lowest community id. Returns
    the community label per node (labels live in the node-index space)."""
    n = len(order)
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    weights_l = weights.tolist()
    degrees_l = degrees.tolist()
    order_l = order.tolist()

    comm = list(range(n))
    s_tot = degrees_l.copy()  # total degree per community
    w_acc = [0.0] * n  # edge weight from the current node into each community
    touched = [0] * n
    inv2m = 1.0 / (2.0 * m)

    sweeps = 0
    while sweeps < _MAX_SWEEPS:
        sweeps += 1
        moves = 0
        for oi in range(n):
            i = order_l[oi]
            a = comm[i]
            ntouch = 0
            for e in range(indptr_l[i], indptr_l[i + 1]):
                j = indices_l[e]
                if j == i:
                    continue
                c = comm[j]
                if w_acc[c] == 0.0:
                    touched[ntouch] = c
                    ntouch += 1
                w_acc[c] += weights_l[e]
            di = degrees_l[i]
            s_tot[a] -= di
            base = w_acc[a] - di * s_tot[a] * inv2m
            best_c = a
            best_s = base
            for t in range(ntouch):
                c = touched[t]
                if c == a:
                    continue
                s = w_acc[c] - di * s_tot[c] * inv2m
                if s > best_s or (s == best_s and c < best_c):
                    best_c = c
                    best_s = s
            if best_c != a and not (best_s - base > min_gain):
                best_c = a
            s_tot[best_c] += di
            if best_c != a:
                comm[i] = best_c
                moves += 1
            for t in range(ntouch):
                w_acc[touched[t]] = 0.0
        if moves == 0:
            break
    return np.asarray(comm, dtype=np.int64)
