"""Flat instruction tapes compiled from expression trees.

The integrator evaluates vector-field components thousands of times per
flow, so expressions are compiled once into a register program that both
the compiled kernel and the pure-Python fallback execute with identical
operation order (results are bit-for-bit equal across backends).

Opcodes (columns of ``code`` are op, a, b, dst):

  0 CONST   dst <- fval[pc]
  1 VAR     dst <- x[a]
  2 ADD     dst <- r[a] + r[b]
  3 SUB     dst <- r[a] - r[b]
  4 MUL     dst <- r[a] * r[b]
  5 DIV     dst <- r[a] / r[b]     (r[b] == 0 -> status 1)
  6 POWI    dst <- r[a] ** b       (repeated multiply; 0**neg -> status 3)
  7 EXP     dst <- exp(r[a])       (overflow -> +inf)
  8 SIN     dst <- sin(r[a])
  9 COS     dst <- cos(r[a])
 10 SQRT    dst <- sqrt(r[a])      (r[a] < 0 -> status 2)
 11 JMP     pc <- a
 12 CJF     if not cmp(r[a], rel b): pc <- dst   (guard test, jump if false)
 13 COPY    dst <- r[a]

Relation codes: 0 '>', 1 '>=', 2 '<', 3 '<=', 4 '!=', 5 '=='.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..expr import ScalarExpr

OP_CONST, OP_VAR, OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POWI = range(7)
OP_EXP, OP_SIN, OP_COS, OP_SQRT, OP_JMP, OP_CJF, OP_COPY = range(7, 14)

_REL_CODE = {">": 0, ">=": 1, "<": 2, "<=": 3, "!=": 4, "==": 5}

_BIN_OP = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV}
_UN_OP = {"exp": OP_EXP, "sin": OP_SIN, "cos": OP_COS, "sqrt": OP_SQRT}


@dataclass
class Program:
    n_in: int
    n_regs: int
    code: np.ndarray        # (m, 4) int32
    fval: np.ndarray        # (m,) float64
    out_regs: np.ndarray    # (k,) int32
    labels: list            # str per instruction, for error reports
    _py: Optional[tuple] = field(default=None, repr=False)

    def py_arrays(self):
        """Plain-list mirror of the arrays, built once (fallback fast path)."""
        if self._py is None:
            c = self.code
            self._py = (
                c[:, 0].tolist(), c[:, 1].tolist(), c[:, 2].tolist(),
                c[:, 3].tolist(), self.fval.tolist(), self.out_regs.tolist(),
            )
        return self._py

    @property
    def n_out(self) -> int:
        return len(self.out_regs)


class _Emitter:
    def __init__(self, n_in: int):
        self.n_in = n_in
        self.rows = []      # [op, a, b, dst]
        self.fvals = []
        self.labels = []
        self.next_reg = 0

    def reg(self) -> int:
        r = self.next_reg
        self.next_reg += 1
        return r

    def emit(self, op, a=0, b=0, dst=0, fval=0.0, label="") -> int:
        self.rows.append([op, a, b, dst])
        self.fvals.append(fval)
        self.labels.append(label)
        return len(self.rows) - 1

    def compile(self, e: ScalarExpr) -> int:
        k = e.kind
        if k == "const":
            r = self.reg()
            self.emit(OP_CONST, dst=r, fval=e.value, label=str(e))
            return r
        if k == "var":
            if e.index >= self.n_in:
                raise ValueError(
                    f"expression uses x{e.index} but dimension is {self.n_in}")
            r = self.reg()
            self.emit(OP_VAR, a=e.index, dst=r, label=str(e))
            return r
        if k in _BIN_OP:
            ra = self.compile(e.args[0])
            rb = self.compile(e.args[1])
            r = self.reg()
            self.emit(_BIN_OP[k], a=ra, b=rb, dst=r, label=str(e))
            return r
        if k == "powi":
            ra = self.compile(e.args[0])
            r = self.reg()
            self.emit(OP_POWI, a=ra, b=e.exponent, dst=r, label=str(e))
            return r
        if k in _UN_OP:
            ra = self.compile(e.args[0])
            r = self.reg()
            self.emit(_UN_OP[k], a=ra, dst=r, label=str(e))
            return r
        if k == "piecewise":
            result = self.reg()
            end_jumps = []
            for g, branch in e.branches:
                rg = self.compile(g.poly)
                cjf = self.emit(OP_CJF, a=rg, b=_REL_CODE[g.rel], label=str(g))
                rb = self.compile(branch)
                self.emit(OP_COPY, a=rb, dst=result, label=str(e))
                end_jumps.append(self.emit(OP_JMP, label=str(e)))
                self.rows[cjf][3] = len(self.rows)  # guard false -> next branch
            rd = self.compile(e.default)
            self.emit(OP_COPY, a=rd, dst=result, label=str(e))
            for j in end_jumps:
                self.rows[j][1] = len(self.rows)
            return result
        raise ValueError(f"cannot compile node kind {k!r}")


def compile_program(exprs, n_in: int) -> Program:
    em = _Emitter(n_in)
    outs = [em.compile(e) for e in exprs]
    return Program(
        n_in=n_in,
        n_regs=max(em.next_reg, 1),
        code=np.asarray(em.rows if em.rows else np.zeros((0, 4)), dtype=np.int32).reshape(-1, 4),
        fval=np.asarray(em.fvals, dtype=np.float64),
        out_regs=np.asarray(outs, dtype=np.int32),
        labels=em.labels,
    )


@dataclass
class CompiledField:
    """Programs for one vector field: components, Jacobian entries, guards."""

    n: int
    prog: Program
    jac: Optional[Program] = None         # n*n outputs, row-major dF_r/dx_c
    guard_prog: Optional[Program] = None  # one output per guard polynomial
    guard_rels: Optional[np.ndarray] = None

    def guard_py(self):
        if self.guard_prog is None:
            return None
        return (self.guard_prog, self.guard_rels.tolist())


def compile_field(components, guards=(), jacobian_exprs=None) -> CompiledField:
    n = len(components)
    prog = compile_program(components, n)
    jac = None
    if jacobian_exprs is not None:
        jac = compile_program(jacobian_exprs, n)
    gprog = None
    grels = None
    if guards:
        gprog = compile_program([g.poly for g in guards], n)
        grels = np.asarray([_REL_CODE[g.rel] for g in guards], dtype=np.int32)
    return CompiledField(n=n, prog=prog, jac=jac, guard_prog=gprog, guard_rels=grels)
