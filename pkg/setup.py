"""Build script: compiles the optional closed-itemset mining kernel.

The package works without the extension (a pure-Python miner is selected at
import time), so a missing compiler or Cython only costs speed.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython kernel if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building likemind._fim failed ({exc}); "
            "falling back to the pure-Python miner",
            file=sys.stderr,
        )


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/likemind/_fim.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("warning: Cython not available, skipping the compiled miner", file=sys.stderr)

setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": OptionalBuildExt},
)
