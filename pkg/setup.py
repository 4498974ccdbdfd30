"""Build script for the optional compiled Louvain kernel.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed Cython/numpy import just skips the build.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "retnet._core._louvain_cy",
                ["src/retnet/_core/_louvain_cy.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: no FMA fusion, so the compiled kernel
                # matches the pure-Python kernel bit for bit.
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
