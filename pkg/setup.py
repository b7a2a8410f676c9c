"""Builds the optional compiled kernel; the package works without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RANKRECOVERY_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("rankrecovery._kernels", ["src/rankrecovery/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            language_level="3",
        )

setup(ext_modules=ext_modules)
