"""Louvain sweep kernel selection.

The compiled Cython kernel is preferred; the pure-Python twin is used when
the extension is unavailable or when RETNET_PURE_PYTHON is set. Both kernels
implement the same traversal and the same arithmetic expression shapes (the
extension is compiled with -ffp-contract=off), so they return identical
labels for identical inputs.
"""

import os

if os.environ.get("RETNET_PURE_PYTHON"):
    from ._louvain_py import local_moves

    KERNEL = "python"
else:
    try:
        from ._louvain_cy import local_moves  # type: ignore[no-redef]

        KERNEL = "cython"
    except ImportError:
        from ._louvain_py import local_moves  # type: ignore[no-redef]

        KERNEL = "python"

__all__ = ["local_moves", "KERNEL"]
