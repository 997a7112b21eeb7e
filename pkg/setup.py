"""Build script for the optional compiled simulation kernel.

The package is fully functional without the extension (a vectorized numpy
fallback is selected at import time), so a failed compile is downgraded to a
warning rather than aborting the install.
"""

import warnings

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    # -ffp-contract=off: the numpy fallback must be bit-identical to the
    # compiled kernel, and GCC's default contraction of a*b+c into fma changes
    # results in the last ulp.
    extensions = cythonize(
        [
            Extension(
                "raterbench._kernel",
                ["src/raterbench/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    warnings.warn("Cython not available; installing with the pure-python kernel only")
    extensions = []

setup(ext_modules=extensions)
