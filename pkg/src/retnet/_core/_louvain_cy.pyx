# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled Louvain local-move sweep.

Twin of ``_louvain_py.local_moves``; keep the traversal and the arithmetic
expression shapes identical so both kernels return bit-identical labels
(the build uses -ffp-contract=off to rule out FMA fusion).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def local_moves(indptr_arr, indices_arr, weights_arr, degrees_arr, double m,
                order_arr, double min_gain):
    """See ``retnet._core._louvain_py.local_moves``."""
    cdef cnp.int64_t[::1] indptr = indptr_arr
    cdef cnp.int64_t[::1] indices = indices_arr
    cdef double[::1] weights = weights_arr
    cdef double[::1] degrees = degrees_arr
    cdef cnp.int64_t[::1] order = order_arr

    cdef Py_ssize_t n = order.shape[0]
    comm_np = np.arange(n, dtype=np.int64)
    s_tot_np = np.asarray(degrees_arr, dtype=np.float64).copy()
    w_acc_np = np.zeros(n, dtype=np.float64)
    touched_np = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] comm = comm_np
    cdef double[::1] s_tot = s_tot_np
    cdef double[::1] w_acc = w_acc_np
    cdef cnp.int64_t[::1] touched = touched_np

    cdef double inv2m = 1.0 / (2.0 * m)
    cdef Py_ssize_t max_sweeps = 10000
    cdef Py_ssize_t sweeps = 0, oi, e, t, moves, ntouch
    cdef cnp.int64_t i, j, a, c, best_c
    cdef double di, base, best_s, s

    while sweeps < max_sweeps:
        sweeps += 1
        moves = 0
        for oi in range(n):
            i = order[oi]
            a = comm[i]
            ntouch = 0
            for e in range(indptr[i], indptr[i + 1]):
                j = indices[e]
                if j == i:
                    continue
                c = comm[j]
                if w_acc[c] == 0.0:
                    touched[ntouch] = c
                    ntouch += 1
                w_acc[c] += weights[e]
            di = degrees[i]
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
    return comm_np
