"""Build the compiled scoring kernel when Cython and a C compiler are present.

The package works without the extension: quartet.fastcost falls back to the
pure-Python mirror at import time. Set QUARTET_NO_EXT=1 to skip the build.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUARTET_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            "src/quartet/_kernel.pyx",
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
        # -ffp-contract=off: the pure-Python mirror must match bit for bit,
        # so fused multiply-adds are not allowed to change rounding.
        for ext in ext_modules:
            ext.extra_compile_args = ["-O3", "-ffp-contract=off"]
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
