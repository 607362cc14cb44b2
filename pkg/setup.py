"""Builds the optional compiled routing kernel.

The package works without it (a numpy fallback is selected at import time),
so the extension build is best-effort: if Cython or a C compiler is missing
the install proceeds with the pure-Python kernel.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "actiforest._kernels._routing",
                ["src/actiforest/_kernels/_routing.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
