"""Build script for the optional compiled kernel core.

The package works without the extension (a NumPy fallback is selected at
import time); the build is therefore tolerant of a missing compiler.
"""
from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "relaysim.kernels._speed",
        ["src/relaysim/kernels/_speed.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
