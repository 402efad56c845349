"""Build script for the optional compiled kernel extension.

The package works without the extension (numpy fallbacks are selected at
import time), so any failure here degrades to a pure-Python install.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/doanet/_accel/_kernels.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    for ext in ext_modules:
        ext.extra_compile_args = ["-O3"]
except ImportError:
    pass

setup(ext_modules=ext_modules)
