"""Build script: compiles the optional BDD core extension.

The package works without the extension (pure-Python backend is selected
at import time), so a failed compile only costs speed. Set MATBOOL_NO_EXT=1
to skip the extension entirely.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("MATBOOL_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "matbool._core",
                    ["src/matbool/_core.pyx"],
                    language="c++",
                    extra_compile_args=["-O2", "-std=c++17"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
