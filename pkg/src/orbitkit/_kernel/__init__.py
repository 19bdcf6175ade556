"""Kernel selection: compiled extension if built, pure-Python otherwise.

Set ORBITKIT_PURE=1 to force the fallback (used by the benchmark and for
cross-checking the two implementations, which are bit-identical).
"""
import os

from . import fallback
from .tape import CompiledField, Program, compile_field, compile_program

if os.environ.get("ORBITKIT_PURE"):
    backend = fallback
else:
    try:
        from . import _core as backend  # type: ignore[attr-defined]
    except ImportError:
        backend = fallback

BACKEND_NAME = backend.NAME

eval_program = backend.eval_program
rk45 = backend.rk45
rk45_jac = backend.rk45_jac

__all__ = [
    "BACKEND_NAME", "CompiledField", "Program", "backend", "compile_field",
    "compile_program", "eval_program", "fallback", "rk45", "rk45_jac",
]
