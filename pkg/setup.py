"""Build script: compiles the optional projection/z-buffer extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile downgrades to a pure build instead of
aborting the install.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "navseg.kernels._ext",
                ["src/navseg/kernels/_ext.pyx"],
                include_dirs=[numpy.get_include()],
                # no -ffast-math: the fallback must match bit for bit
                extra_compile_args=["-O2"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"navseg: extension build skipped ({exc}); installing pure-Python kernels")
    extensions = []

setup(ext_modules=extensions)
