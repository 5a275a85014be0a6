"""Build hook for the optional compiled kernels.

The compiled extension is a speedup only: if Cython or a C compiler is
missing the build proceeds without it and the package falls back to the
numpy implementation at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "cricseg.kernels._native",
                sources=["src/cricseg/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
