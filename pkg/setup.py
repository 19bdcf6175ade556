# Builds the optional compiled kernel. The package is fully functional
# without it (a pure-Python fallback is selected at import time), so a
# failed extension build must never fail the install.
import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/orbitkit/_kernel/_core.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": False,  # keep IEEE division semantics identical to Python
        },
    )
except Exception as exc:  # pragma: no cover - environment dependent
    print(f"orbitkit: compiled kernel skipped ({exc}); pure-Python fallback will be used",
          file=sys.stderr)

setup(ext_modules=ext_modules)
