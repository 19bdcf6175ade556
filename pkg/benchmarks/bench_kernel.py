#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times identical flow workloads on both backends and verifies the outputs
are bit-identical.  Run from the repository root:

    python benchmarks/bench_kernel.py
"""
import sys
import time

import orbitkit._kernel as K
from orbitkit._kernel import fallback
from orbitkit.expr import Guard, const, exp, piecewise, var
from orbitkit.fields import VectorField, compiled


def workloads():
    x, y, z = var(0), var(1), var(2)
    zero = const(0.0)
    rho2 = x * x + y * y
    phi = piecewise([(Guard(rho2, ">"), exp(const(-1.0) / rho2))], zero)
    yield ("rotation 2d", VectorField((zero - y, x + zero), name="rot"),
           [1.0, 0.0], 1.0)
    yield ("flat pair 2d", VectorField((phi, rho2), name="flat"),
           [0.7, -0.2], 0.8)
    yield ("so3 generator", VectorField((zero - y, x + zero, zero), name="rz"),
           [1.0, 0.0, 0.0], 1.0)


def time_call(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        out = fn()
    return (time.perf_counter() - t0) / reps, out


def main() -> int:
    if K.BACKEND_NAME != "compiled":
        print("compiled kernel not available; nothing to compare", file=sys.stderr)
        return 1
    tol = 1e-9
    reps = 200
    print(f"{'workload':<16} {'kind':<10} {'compiled':>12} {'fallback':>12} "
          f"{'speedup':>8}  identical")
    for name, field, x0, t in workloads():
        cf = compiled(field)
        for kind, comp, fall in (
            ("flow",
             lambda: K.backend.rk45(cf, x0, t, tol),
             lambda: fallback.rk45(cf, x0, t, tol)),
            ("flow+jac",
             lambda: K.backend.rk45_jac(cf, x0, t, tol),
             lambda: fallback.rk45_jac(cf, x0, t, tol)),
        ):
            tc, a = time_call(comp, reps)
            tf, b = time_call(fall, max(reps // 10, 10))
            same = a[0] == b[0] and a[1] == b[1]
            if not same:
                print(f"MISMATCH in {name}/{kind}", file=sys.stderr)
                return 1
            print(f"{name:<16} {kind:<10} {tc*1e6:>10.1f}us {tf*1e6:>10.1f}us "
                  f"{tf/tc:>7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
