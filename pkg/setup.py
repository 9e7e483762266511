"""Build script for the optional compiled kernels.

The extension is a pure speedup; if Cython or a C compiler is missing
the install degrades to the numpy fallback selected at import time.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


def extensions():
    if os.environ.get("PHOTONPAIR_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "photonpair._kernels._core",
        ["src/photonpair/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            print(f"warning: compiled kernels skipped ({exc}); "
                  "using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using the numpy fallback")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
