"""Build script: compiles the optional C kernel extension.

The package is fully functional without the extension (pure-Python kernels
are selected at import time when ammlab._speedups is missing), so the
extension is marked optional and a failed compile only downgrades speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    speedups = Extension(
        "ammlab._speedups",
        ["src/ammlab/_speedups.pyx"],
        extra_compile_args=["-O3"],
    )
    speedups.optional = True
    ext_modules = cythonize([speedups], language_level=3)
except ImportError:
    # No Cython available: ship pure Python only.
    pass

setup(ext_modules=ext_modules)
