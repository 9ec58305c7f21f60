"""Build the optional Cython kernels.

The extension is best-effort: if Cython or a C compiler is unavailable the
package installs anyway and s2body.kernels falls back to the numpy
implementations.
"""
from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            print(f"skipping C kernels ({exc}); pure-python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); pure-python fallback will be used")


def extensions():
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError as exc:
        print(f"skipping C kernels ({exc})")
        return []
    ext = Extension(
        "s2body._kernels_c",
        ["src/s2body/_kernels_c.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
