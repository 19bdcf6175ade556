"""Pure-Python kernel: tape interpreter and embedded RK4(5) integrator.

Mirrors ``_core.pyx`` operation for operation so both backends produce
bit-identical trajectories.  Status codes returned by ``rk45``/``rk45_jac``:
0 ok, 1 escaped, 2 guard-violation, 3 step-underflow.  Program evaluation
statuses: 0 ok, 1 division by zero, 2 sqrt of negative, 3 zero to a
negative power.
"""
from __future__ import annotations

import math

NAME = "fallback"

ESCAPE_NORM = 1.0e8
MIN_STEP_FRACTION = 1.0e-14
MAX_ITERS = 1_000_000

# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated and the
# last stage is first-same-as-last.
A21 = 1.0 / 5.0
A31 = 3.0 / 40.0
A32 = 9.0 / 40.0
A41 = 44.0 / 45.0
A42 = -56.0 / 15.0
A43 = 32.0 / 9.0
A51 = 19372.0 / 6561.0
A52 = -25360.0 / 2187.0
A53 = 64448.0 / 6561.0
A54 = -212.0 / 729.0
A61 = 9017.0 / 3168.0
A62 = -355.0 / 33.0
A63 = 46732.0 / 5247.0
A64 = 49.0 / 176.0
A65 = -5103.0 / 18656.0
A71 = 35.0 / 384.0
A73 = 500.0 / 1113.0
A74 = 125.0 / 192.0
A75 = -2187.0 / 6784.0
A76 = 11.0 / 84.0
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0


def _exec(ops, aa, bb, dd, fv, x, regs):
    """Run one program; returns (status, failing instruction index)."""
    pc = 0
    m = len(ops)
    while pc < m:
        op = ops[pc]
        if op == 4:    # MUL
            regs[dd[pc]] = regs[aa[pc]] * regs[bb[pc]]
        elif op == 2:  # ADD
            regs[dd[pc]] = regs[aa[pc]] + regs[bb[pc]]
        elif op == 3:  # SUB
            regs[dd[pc]] = regs[aa[pc]] - regs[bb[pc]]
        elif op == 1:  # VAR
            regs[dd[pc]] = x[aa[pc]]
        elif op == 0:  # CONST
            regs[dd[pc]] = fv[pc]
        elif op == 5:  # DIV
            den = regs[bb[pc]]
            if den == 0.0:
                return 1, pc
            regs[dd[pc]] = regs[aa[pc]] / den
        elif op == 6:  # POWI
            base = regs[aa[pc]]
            k = bb[pc]
            if k < 0:
                if base == 0.0:
                    return 3, pc
                out = 1.0
                for _ in range(-k):
                    out = out * base
                regs[dd[pc]] = 1.0 / out
            else:
                out = 1.0
                for _ in range(k):
                    out = out * base
                regs[dd[pc]] = out
        elif op == 7:  # EXP
            v = regs[aa[pc]]
            if v > 709.782712893384:
                regs[dd[pc]] = math.inf
            else:
                regs[dd[pc]] = math.exp(v)
        elif op == 8:  # SIN
            regs[dd[pc]] = math.sin(regs[aa[pc]])
        elif op == 9:  # COS
            regs[dd[pc]] = math.cos(regs[aa[pc]])
        elif op == 10:  # SQRT
            v = regs[aa[pc]]
            if v < 0.0:
                return 2, pc
            regs[dd[pc]] = math.sqrt(v)
        elif op == 11:  # JMP
            pc = aa[pc]
            continue
        elif op == 12:  # CJF
            v = regs[aa[pc]]
            rel = bb[pc]
            if rel == 0:
                ok = v > 0.0
            elif rel == 1:
                ok = v >= 0.0
            elif rel == 2:
                ok = v < 0.0
            elif rel == 3:
                ok = v <= 0.0
            elif rel == 4:
                ok = v != 0.0
            else:
                ok = v == 0.0
            if not ok:
                pc = dd[pc]
                continue
        else:          # COPY
            regs[dd[pc]] = regs[aa[pc]]
        pc += 1
    return 0, -1


def eval_program(prog, x):
    """Evaluate a Program at x; returns (outputs, status, err_instr)."""
    ops, aa, bb, dd, fv, outs = prog.py_arrays()
    regs = [0.0] * prog.n_regs
    status, err = _exec(ops, aa, bb, dd, fv, x, regs)
    if status:
        return None, status, err
    return [regs[r] for r in outs], 0, -1


def _guards_ok(gprog, grels, x, regs):
    ops, aa, bb, dd, fv, outs = gprog.py_arrays()
    status, _ = _exec(ops, aa, bb, dd, fv, x, regs)
    if status:
        return False
    for r, rel in zip(outs, grels):
        v = regs[r]
        if rel == 0:
            ok = v > 0.0
        elif rel == 1:
            ok = v >= 0.0
        elif rel == 2:
            ok = v < 0.0
        elif rel == 3:
            ok = v <= 0.0
        elif rel == 4:
            ok = v != 0.0
        else:
            ok = v == 0.0
        if not ok:
            return False
    return True


class _FieldEval:
    """Derivative evaluations for the plain and variational systems."""

    def __init__(self, cf):
        self.cf = cf
        self.n = cf.n
        self.f_arrays = cf.prog.py_arrays()
        self.f_regs = [0.0] * cf.prog.n_regs
        self.j_arrays = cf.jac.py_arrays() if cf.jac is not None else None
        self.j_regs = [0.0] * cf.jac.n_regs if cf.jac is not None else None
        if cf.guard_prog is not None:
            self.g_prog = cf.guard_prog
            self.g_rels = cf.guard_rels.tolist()
            self.g_regs = [0.0] * cf.guard_prog.n_regs
        else:
            self.g_prog = None

    def guards_ok(self, y):
        if self.g_prog is None:
            return True
        return _guards_ok(self.g_prog, self.g_rels, y, self.g_regs)

    def deriv(self, y, out):
        """Plain system: out[i] = F_i(y). Returns status."""
        ops, aa, bb, dd, fv, outs = self.f_arrays
        regs = self.f_regs
        status, _ = _exec(ops, aa, bb, dd, fv, y, regs)
        if status:
            return status
        for i, r in enumerate(outs):
            out[i] = regs[r]
        return 0

    def deriv_aug(self, y, out):
        """Variational system on (x, J): dx = F(x), dJ = DF(x) J."""
        n = self.n
        ops, aa, bb, dd, fv, outs = self.f_arrays
        regs = self.f_regs
        status, _ = _exec(ops, aa, bb, dd, fv, y, regs)
        if status:
            return status
        for i, r in enumerate(outs):
            out[i] = regs[r]
        jops, jaa, jbb, jdd, jfv, jouts = self.j_arrays
        jregs = self.j_regs
        status, _ = _exec(jops, jaa, jbb, jdd, jfv, y, jregs)
        if status:
            return status
        # out[n + r*n + c] = sum_m DF[r][m] * J[m][c]
        for r in range(n):
            base = n + r * n
            for c in range(n):
                acc = 0.0
                for m_ in range(n):
                    acc += jregs[jouts[r * n + m_]] * y[n + m_ * n + c]
                out[base + c] = acc
        return 0


def _rk45_core(fe, nstate, nbase, y, t, tol, want_trace):
    """Shared adaptive loop; y is mutated in place. Returns (status, steps, trace)."""
    trace = [(0.0, tuple(y[:nbase]))] if want_trace else None
    if t == 0.0:
        return 0, 0, trace
    aug = nstate != nbase
    k1 = [0.0] * nstate
    k2 = [0.0] * nstate
    k3 = [0.0] * nstate
    k4 = [0.0] * nstate
    k5 = [0.0] * nstate
    k6 = [0.0] * nstate
    k7 = [0.0] * nstate
    ytmp = [0.0] * nstate
    y5 = [0.0] * nstate

    if not fe.guards_ok(y):
        return 2, 0, trace
    status = fe.deriv_aug(y, k1) if aug else fe.deriv(y, k1)
    if status:
        return 2, 0, trace

    s = 0.0
    h = t / 100.0
    nsteps = 0
    min_h = MIN_STEP_FRACTION * abs(t)

    for _ in range(MAX_ITERS):
        rem = t - s
        if rem == 0.0:
            return 0, nsteps, trace
        last = abs(h) >= abs(rem)
        if last:
            h = rem

        bad = 0
        for i in range(nstate):
            ytmp[i] = y[i] + h * (A21 * k1[i])
        bad = fe.deriv_aug(ytmp, k2) if aug else fe.deriv(ytmp, k2)
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            bad = fe.deriv_aug(ytmp, k3) if aug else fe.deriv(ytmp, k3)
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            bad = fe.deriv_aug(ytmp, k4) if aug else fe.deriv(ytmp, k4)
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i])
            bad = fe.deriv_aug(ytmp, k5) if aug else fe.deriv(ytmp, k5)
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            bad = fe.deriv_aug(ytmp, k6) if aug else fe.deriv(ytmp, k6)
        if not bad:
            for i in range(nstate):
                y5[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i]
                                    + A75 * k5[i] + A76 * k6[i])
            bad = fe.deriv_aug(y5, k7) if aug else fe.deriv(y5, k7)

        if bad:
            # domain error in a trial stage: treat as leaving the field's domain
            h = 0.5 * h
            if abs(h) < min_h:
                return 2, nsteps, trace
            continue

        errnorm = 0.0
        finite = True
        for i in range(nstate):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                     + E6 * k6[i] + E7 * k7[i])
            yx = abs(y[i])
            yn = abs(y5[i])
            sc = tol + tol * (yx if yx > yn else yn)
            v = abs(e) / sc
            if v != v or yn != yn or math.isinf(yn):
                finite = False
                break
            if v > errnorm:
                errnorm = v

        if not finite:
            h = 0.5 * h
            if abs(h) < min_h:
                return 3, nsteps, trace
            continue

        if errnorm <= 1.0:
            if not fe.guards_ok(y5):
                h = 0.5 * h
                if abs(h) < min_h:
                    return 2, nsteps, trace
                continue
            s = s + h
            for i in range(nstate):
                y[i] = y5[i]
                k1[i] = k7[i]
            nsteps += 1
            if trace is not None:
                trace.append((s, tuple(y[:nbase])))
            norm2 = 0.0
            for i in range(nbase):
                norm2 += y[i] * y[i]
            if norm2 > ESCAPE_NORM * ESCAPE_NORM:
                return 1, nsteps, trace
            if last:
                return 0, nsteps, trace
            if errnorm == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * errnorm ** -0.2
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            h = h * fac
        else:
            fac = 0.9 * errnorm ** -0.2
            if fac < 0.2:
                fac = 0.2
            h = h * fac
            if abs(h) < min_h:
                return 3, nsteps, trace
    return 3, nsteps, trace


def rk45(cf, x0, t, tol, want_trace=False):
    """Integrate dx/ds = F(x) from x0 over [0, t].

    Returns (endpoint list, status, accepted steps, trace or None).
    """
    fe = _FieldEval(cf)
    y = [float(v) for v in x0]
    status, nsteps, trace = _rk45_core(fe, cf.n, cf.n, y, float(t), tol, want_trace)
    return y, status, nsteps, trace


def rk45_jac(cf, x0, t, tol):
    """Integrate the flow jointly with its Jacobian (variational equation).

    Returns (endpoint list, jacobian row-major list, status, accepted steps).
    """
    n = cf.n
    fe = _FieldEval(cf)
    y = [float(v) for v in x0] + [0.0] * (n * n)
    for i in range(n):
        y[n + i * n + i] = 1.0
    status, nsteps, _ = _rk45_core(fe, n + n * n, n, y, float(t), tol, False)
    return y[:n], y[n:], status, nsteps
