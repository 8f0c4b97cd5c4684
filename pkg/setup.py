"""Builds the optional compiled kernels.

The package works without them: cpareto.kernels falls back to pure
NumPy implementations when the extension is absent or fails to import.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - source dist without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "cpareto._ckern",
                ["src/cpareto/_ckern.pyx"],
                # no FP contraction: pivot arithmetic must match the fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
