"""Build the optional Cython integrator kernels.

The package works without the extension (a NumPy fallback is selected at
import time), but the compiled kernels are 1-2 orders of magnitude faster
for long stochastic runs.
"""
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "washboard._kernels",
        ["src/washboard/_kernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
