"""Build script for the optional compiled OSC codec.

The extension is marked optional: if Cython or a C compiler is missing the
install still succeeds and the package falls back to the pure-Python codec
at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "notemotion.osc._codec",
                ["src/notemotion/osc/_codec.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
