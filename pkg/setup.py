"""Build script for the compiled kernel extension.

The extension is optional: if it fails to build or import, the package
falls back to the pure-Python kernels in genoogle.kernels._pure.
"""

from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "genoogle.kernels._core",
                ["src/genoogle/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
else:
    extensions = []

setup(ext_modules=extensions)
