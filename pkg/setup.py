from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "tsactive._kernels._cdtw",
        sources=["src/tsactive/_kernels/_cdtw.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
