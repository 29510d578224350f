"""Build script: compiles the forest-traversal kernel when Cython and a C
compiler are available. The package works without the extension (a NumPy
fallback is selected at import), so any build failure here is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "acme_ad._kernels",
                ["src/acme_ad/_kernels.pyx"],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [np.get_include()]
except ImportError:
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
