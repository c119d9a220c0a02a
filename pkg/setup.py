import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "imcflab._kernels._core",
                ["src/imcflab/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # the package still works on the pure numpy kernels
    ext_modules = []

setup(ext_modules=ext_modules)
