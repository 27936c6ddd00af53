"""Build script: compiles the optional GF(256) Cython kernel.

The extension is a pure accelerator. If Cython or a C compiler is missing
the build falls back to a pure-Python wheel; fairshare.gf256 then selects
the stdlib kernel at import time.
"""

import sys

from setuptools import setup
from setuptools.errors import CCompilerError, ExecError, PlatformError

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("fairshare._gfcore", ["src/fairshare/_gfcore.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("Cython not available; building without the compiled GF kernel", file=sys.stderr)


def run_setup(with_ext):
    setup(ext_modules=ext_modules if with_ext else [])


try:
    run_setup(bool(ext_modules))
except (CCompilerError, ExecError, PlatformError):
    print("C extension failed to build; retrying pure-Python build", file=sys.stderr)
    run_setup(False)
