"""Build hook for the optional compiled kernels.

The package works without them: ``fsnoma._backend`` falls back to the
pure-Python twin when the extension is missing.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("fsnoma._kernels", ["src/fsnoma/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:  # no Cython available: pure-Python install
    ext_modules = []

setup(ext_modules=ext_modules)
