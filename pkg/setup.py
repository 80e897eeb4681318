"""Build hook for the optional compiled stepping kernel.

The package works without the extension (a NumPy fallback is selected at
import time); the build therefore tolerates a missing compiler toolchain.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("GEMSIM_NO_EXT", "0") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/gemsim/kernel/_ckernel.pyx"],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": 3,
            },
        )
        for ext in ext_modules:
            ext.include_dirs.append(numpy.get_include())
            ext.extra_compile_args = ["-O3"]
    except Exception as exc:  # pragma: no cover - toolchain-dependent
        print(f"gemsim: skipping compiled kernel ({exc})", file=sys.stderr)
        ext_modules = []

setup(ext_modules=ext_modules)
