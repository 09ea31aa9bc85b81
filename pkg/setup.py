"""Build script: compiles the optional direct-convolution core.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed on the direct path.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sqfn._convcore",
                ["src/sqfn/_convcore.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"sqfn: skipping compiled convolution core ({exc})")

setup(ext_modules=ext_modules)
