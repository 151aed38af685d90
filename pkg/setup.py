"""Build script: compiles the optional Cython kernel.

The package works without the extension (a numpy/pure-Python fallback with
identical semantics is selected at import time), so the extension is marked
optional: a missing compiler degrades performance, not correctness.
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "rfimlab._kernels._core",
                ["src/rfimlab/_kernels/_core.pyx"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
