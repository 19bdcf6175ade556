# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernel: tape interpreter and embedded RK4(5) integrator.

Must stay operation-for-operation identical to ``fallback.py`` so both
backends produce bit-identical trajectories.
"""

from libc.math cimport exp as c_exp, sin as c_sin, cos as c_cos
from libc.math cimport sqrt as c_sqrt, fabs, pow as c_pow

import numpy as np

NAME = "compiled"

cdef double ESCAPE_NORM = 1.0e8
cdef double MIN_STEP_FRACTION = 1.0e-14
cdef int MAX_ITERS = 1000000
cdef double INF = float("inf")

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0
cdef double A73 = 500.0 / 1113.0
cdef double A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0
cdef double A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0


cdef int _exec(int[:, ::1] code, double[::1] fv, double* x, double* regs,
               int m, int* err) nogil:
    cdef int pc = 0
    cdef int op, k, j
    cdef double den, base, out, v
    cdef bint ok
    while pc < m:
        op = code[pc, 0]
        if op == 4:    # MUL
            regs[code[pc, 3]] = regs[code[pc, 1]] * regs[code[pc, 2]]
        elif op == 2:  # ADD
            regs[code[pc, 3]] = regs[code[pc, 1]] + regs[code[pc, 2]]
        elif op == 3:  # SUB
            regs[code[pc, 3]] = regs[code[pc, 1]] - regs[code[pc, 2]]
        elif op == 1:  # VAR
            regs[code[pc, 3]] = x[code[pc, 1]]
        elif op == 0:  # CONST
            regs[code[pc, 3]] = fv[pc]
        elif op == 5:  # DIV
            den = regs[code[pc, 2]]
            if den == 0.0:
                err[0] = pc
                return 1
            regs[code[pc, 3]] = regs[code[pc, 1]] / den
        elif op == 6:  # POWI
            base = regs[code[pc, 1]]
            k = code[pc, 2]
            if k < 0:
                if base == 0.0:
                    err[0] = pc
                    return 3
                out = 1.0
                for j in range(-k):
                    out = out * base
                regs[code[pc, 3]] = 1.0 / out
            else:
                out = 1.0
                for j in range(k):
                    out = out * base
                regs[code[pc, 3]] = out
        elif op == 7:  # EXP
            v = regs[code[pc, 1]]
            if v > 709.782712893384:
                regs[code[pc, 3]] = INF
            else:
                regs[code[pc, 3]] = c_exp(v)
        elif op == 8:  # SIN
            regs[code[pc, 3]] = c_sin(regs[code[pc, 1]])
        elif op == 9:  # COS
            regs[code[pc, 3]] = c_cos(regs[code[pc, 1]])
        elif op == 10:  # SQRT
            v = regs[code[pc, 1]]
            if v < 0.0:
                err[0] = pc
                return 2
            regs[code[pc, 3]] = c_sqrt(v)
        elif op == 11:  # JMP
            pc = code[pc, 1]
            continue
        elif op == 12:  # CJF
            v = regs[code[pc, 1]]
            k = code[pc, 2]
            if k == 0:
                ok = v > 0.0
            elif k == 1:
                ok = v >= 0.0
            elif k == 2:
                ok = v < 0.0
            elif k == 3:
                ok = v <= 0.0
            elif k == 4:
                ok = v != 0.0
            else:
                ok = v == 0.0
            if not ok:
                pc = code[pc, 3]
                continue
        else:          # COPY
            regs[code[pc, 3]] = regs[code[pc, 1]]
        pc += 1
    err[0] = -1
    return 0


def eval_program(prog, x):
    """Evaluate a Program at x; returns (outputs, status, err_instr)."""
    cdef int[:, ::1] code = np.ascontiguousarray(prog.code, dtype=np.int32)
    cdef double[::1] fv = np.ascontiguousarray(prog.fval, dtype=np.float64)
    cdef int[::1] outs = np.ascontiguousarray(prog.out_regs, dtype=np.int32)
    xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] xv = xs
    regs_arr = np.zeros(prog.n_regs, dtype=np.float64)
    cdef double[::1] regs = regs_arr
    cdef int err = -1
    cdef int status
    cdef double* xptr = &xv[0] if xv.shape[0] > 0 else NULL
    status = _exec(code, fv, xptr, &regs[0], code.shape[0], &err)
    if status:
        return None, status, err
    return [regs[outs[i]] for i in range(outs.shape[0])], 0, -1


cdef class FieldEval:
    """Evaluator for the plain and variational systems of one field."""

    cdef int n
    cdef int[:, ::1] f_code
    cdef double[::1] f_fv
    cdef int[::1] f_outs
    cdef double[::1] f_regs
    cdef bint has_jac
    cdef int[:, ::1] j_code
    cdef double[::1] j_fv
    cdef int[::1] j_outs
    cdef double[::1] j_regs
    cdef bint has_guard
    cdef int[:, ::1] g_code
    cdef double[::1] g_fv
    cdef int[::1] g_outs
    cdef double[::1] g_regs
    cdef int[::1] g_rels

    def __init__(self, cf, bint need_jac):
        self.n = cf.n
        self.f_code = np.ascontiguousarray(cf.prog.code, dtype=np.int32)
        self.f_fv = np.ascontiguousarray(cf.prog.fval, dtype=np.float64)
        self.f_outs = np.ascontiguousarray(cf.prog.out_regs, dtype=np.int32)
        self.f_regs = np.zeros(cf.prog.n_regs, dtype=np.float64)
        self.has_jac = need_jac
        if need_jac:
            self.j_code = np.ascontiguousarray(cf.jac.code, dtype=np.int32)
            self.j_fv = np.ascontiguousarray(cf.jac.fval, dtype=np.float64)
            self.j_outs = np.ascontiguousarray(cf.jac.out_regs, dtype=np.int32)
            self.j_regs = np.zeros(cf.jac.n_regs, dtype=np.float64)
        self.has_guard = cf.guard_prog is not None
        if self.has_guard:
            self.g_code = np.ascontiguousarray(cf.guard_prog.code, dtype=np.int32)
            self.g_fv = np.ascontiguousarray(cf.guard_prog.fval, dtype=np.float64)
            self.g_outs = np.ascontiguousarray(cf.guard_prog.out_regs, dtype=np.int32)
            self.g_regs = np.zeros(cf.guard_prog.n_regs, dtype=np.float64)
            self.g_rels = np.ascontiguousarray(cf.guard_rels, dtype=np.int32)

    cdef bint guards_ok(self, double* y) nogil:
        cdef int err, i, rel
        cdef double v
        cdef bint ok
        if not self.has_guard:
            return True
        if _exec(self.g_code, self.g_fv, y, &self.g_regs[0],
                 self.g_code.shape[0], &err):
            return False
        for i in range(self.g_outs.shape[0]):
            v = self.g_regs[self.g_outs[i]]
            rel = self.g_rels[i]
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

    cdef int deriv(self, double* y, double* out) nogil:
        cdef int err, i, status
        status = _exec(self.f_code, self.f_fv, y, &self.f_regs[0],
                       self.f_code.shape[0], &err)
        if status:
            return status
        for i in range(self.n):
            out[i] = self.f_regs[self.f_outs[i]]
        return 0

    cdef int deriv_aug(self, double* y, double* out) nogil:
        cdef int err, i, r, c, m_, status
        cdef int n = self.n
        cdef double acc
        status = _exec(self.f_code, self.f_fv, y, &self.f_regs[0],
                       self.f_code.shape[0], &err)
        if status:
            return status
        for i in range(n):
            out[i] = self.f_regs[self.f_outs[i]]
        status = _exec(self.j_code, self.j_fv, y, &self.j_regs[0],
                       self.j_code.shape[0], &err)
        if status:
            return status
        for r in range(n):
            for c in range(n):
                acc = 0.0
                for m_ in range(n):
                    acc += self.j_regs[self.j_outs[r * n + m_]] * y[n + m_ * n + c]
                out[n + r * n + c] = acc
        return 0


cdef int _rk45_core(FieldEval fe, int nstate, int nbase, double[::1] y,
                    double t, double tol, bint aug, list trace,
                    int* steps_out):
    cdef double[::1] k1 = np.zeros(nstate)
    cdef double[::1] k2 = np.zeros(nstate)
    cdef double[::1] k3 = np.zeros(nstate)
    cdef double[::1] k4 = np.zeros(nstate)
    cdef double[::1] k5 = np.zeros(nstate)
    cdef double[::1] k6 = np.zeros(nstate)
    cdef double[::1] k7 = np.zeros(nstate)
    cdef double[::1] ytmp = np.zeros(nstate)
    cdef double[::1] y5 = np.zeros(nstate)
    cdef double s, h, rem, errnorm, e, yx, yn, sc, v, fac, norm2, min_h
    cdef int i, nsteps, it, bad
    cdef bint last, finite

    steps_out[0] = 0
    if t == 0.0:
        return 0
    if not fe.guards_ok(&y[0]):
        return 2
    bad = fe.deriv_aug(&y[0], &k1[0]) if aug else fe.deriv(&y[0], &k1[0])
    if bad:
        return 2

    s = 0.0
    h = t / 100.0
    nsteps = 0
    min_h = MIN_STEP_FRACTION * fabs(t)

    for it in range(MAX_ITERS):
        rem = t - s
        if rem == 0.0:
            steps_out[0] = nsteps
            return 0
        last = fabs(h) >= fabs(rem)
        if last:
            h = rem

        for i in range(nstate):
            ytmp[i] = y[i] + h * (A21 * k1[i])
        bad = fe.deriv_aug(&ytmp[0], &k2[0]) if aug else fe.deriv(&ytmp[0], &k2[0])
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
            bad = fe.deriv_aug(&ytmp[0], &k3[0]) if aug else fe.deriv(&ytmp[0], &k3[0])
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            bad = fe.deriv_aug(&ytmp[0], &k4[0]) if aug else fe.deriv(&ytmp[0], &k4[0])
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                      + A54 * k4[i])
            bad = fe.deriv_aug(&ytmp[0], &k5[0]) if aug else fe.deriv(&ytmp[0], &k5[0])
        if not bad:
            for i in range(nstate):
                ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                      + A64 * k4[i] + A65 * k5[i])
            bad = fe.deriv_aug(&ytmp[0], &k6[0]) if aug else fe.deriv(&ytmp[0], &k6[0])
        if not bad:
            for i in range(nstate):
                y5[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i]
                                    + A75 * k5[i] + A76 * k6[i])
            bad = fe.deriv_aug(&y5[0], &k7[0]) if aug else fe.deriv(&y5[0], &k7[0])

        if bad:
            h = 0.5 * h
            if fabs(h) < min_h:
                steps_out[0] = nsteps
                return 2
            continue

        errnorm = 0.0
        finite = True
        for i in range(nstate):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                     + E6 * k6[i] + E7 * k7[i])
            yx = fabs(y[i])
            yn = fabs(y5[i])
            sc = tol + tol * (yx if yx > yn else yn)
            v = fabs(e) / sc
            if v != v or yn != yn or yn == INF:
                finite = False
                break
            if v > errnorm:
                errnorm = v

        if not finite:
            h = 0.5 * h
            if fabs(h) < min_h:
                steps_out[0] = nsteps
                return 3
            continue

        if errnorm <= 1.0:
            if not fe.guards_ok(&y5[0]):
                h = 0.5 * h
                if fabs(h) < min_h:
                    steps_out[0] = nsteps
                    return 2
                continue
            s = s + h
            for i in range(nstate):
                y[i] = y5[i]
                k1[i] = k7[i]
            nsteps += 1
            if trace is not None:
                trace.append((s, tuple(y[i] for i in range(nbase))))
            norm2 = 0.0
            for i in range(nbase):
                norm2 += y[i] * y[i]
            if norm2 > ESCAPE_NORM * ESCAPE_NORM:
                steps_out[0] = nsteps
                return 1
            if last:
                steps_out[0] = nsteps
                return 0
            if errnorm == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * c_pow(errnorm, -0.2)
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            h = h * fac
        else:
            fac = 0.9 * c_pow(errnorm, -0.2)
            if fac < 0.2:
                fac = 0.2
            h = h * fac
            if fabs(h) < min_h:
                steps_out[0] = nsteps
                return 3
    steps_out[0] = nsteps
    return 3


def rk45(cf, x0, t, tol, want_trace=False):
    """Integrate dx/ds = F(x) from x0 over [0, t].

    Returns (endpoint list, status, accepted steps, trace or None).
    """
    cdef int n = cf.n
    y_arr = np.array(x0, dtype=np.float64)
    cdef double[::1] y = y_arr
    fe = FieldEval(cf, False)
    trace = [(0.0, tuple(float(v) for v in x0))] if want_trace else None
    cdef int nsteps = 0
    cdef int status = _rk45_core(fe, n, n, y, float(t), tol, False, trace, &nsteps)
    return [y[i] for i in range(n)], status, nsteps, trace


def rk45_jac(cf, x0, t, tol):
    """Integrate the flow jointly with its Jacobian (variational equation).

    Returns (endpoint list, jacobian row-major list, status, accepted steps).
    """
    cdef int n = cf.n
    y_arr = np.zeros(n + n * n, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef int i
    for i in range(n):
        y[i] = float(x0[i])
        y[n + i * n + i] = 1.0
    fe = FieldEval(cf, True)
    cdef int nsteps = 0
    cdef int status = _rk45_core(fe, n + n * n, n, y, float(t), tol, True,
                                 None, &nsteps)
    return ([y[i] for i in range(n)],
            [y[n + i] for i in range(n * n)], status, nsteps)
