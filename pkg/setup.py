"""Build script for the optional compiled kernels.

If Cython or a C compiler is unavailable the package still installs and falls
back to the pure-Python kernels at import time.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - exercised only without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "lozenge_cooling._ckernels",
                ["src/lozenge_cooling/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
