"""Build the optional compiled kernels.

The package works without them: ``aptattrib.kernels`` falls back to the
numpy implementation when ``aptattrib._kernels`` cannot be imported.
"""
import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            sys.stderr.write(f"warning: compiled kernels not built ({exc}); using numpy fallback\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            sys.stderr.write(f"warning: failed to build {ext.name} ({exc}); using numpy fallback\n")


def extensions():
    if os.environ.get("APTATTRIB_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "aptattrib._kernels",
        ["src/aptattrib/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # no fast-math / FMA: results must match the numpy fallback bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
