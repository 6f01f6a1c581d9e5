"""Build the optional compiled simulation kernels.

The package works without them (qnash.kernels falls back to the pure
Python module), so any failure here should abort only the extension,
not the install.  Set QNASH_SKIP_BUILD=1 to skip compilation outright.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("QNASH_SKIP_BUILD"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "qnash._kernels",
        sources=["src/qnash/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions())
