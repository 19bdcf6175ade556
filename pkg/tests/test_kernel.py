import random

import pytest

import orbitkit._kernel as K
from orbitkit._kernel import compile_program, fallback
from orbitkit.expr import Guard, const, exp, piecewise, powi, var
from orbitkit.fields import VectorField, compiled

import gen

COMPILED = K.BACKEND_NAME == "compiled"
X, Y = var(0), var(1)


def test_backend_reported():
    assert K.BACKEND_NAME in ("compiled", "fallback")


def test_eval_program_matches_tree_eval():
    rng = random.Random(77)
    for _ in range(200):
        e = gen.random_expr(rng, 2)
        prog = compile_program([e], 2)
        p = gen.random_point(rng, 2)
        out, status, _ = K.eval_program(prog, p)
        assert status == 0
        assert out[0] == e.eval(p)


def test_eval_program_piecewise_short_circuit():
    chi = piecewise([(Guard(X, ">"), exp(const(-1.0) / X))], const(0.0))
    prog = compile_program([chi], 1)
    out, status, _ = K.eval_program(prog, [0.0])
    assert status == 0 and out[0] == 0.0
    out, status, _ = K.eval_program(prog, [1.0])
    assert out[0] == chi.eval((1.0,))


def test_eval_program_error_statuses():
    div = const(1.0) / X
    _, status, err = K.eval_program(compile_program([div], 1), [0.0])
    assert status == 1 and err >= 0
    root = var(0)
    from orbitkit.expr import sqrt
    _, status, _ = K.eval_program(compile_program([sqrt(root)], 1), [-1.0])
    assert status == 2
    _, status, _ = K.eval_program(compile_program([powi(X, -1)], 1), [0.0])
    assert status == 3


def test_powi_zero_exponent_convention():
    prog = compile_program([powi(X, 0)], 1)
    out, status, _ = K.eval_program(prog, [0.0])
    assert status == 0 and out[0] == 1.0


@pytest.mark.skipif(not COMPILED, reason="compiled kernel not built")
def test_backends_bit_identical():
    rng = random.Random(123)
    rho2 = X * X + Y * Y
    phi = piecewise([(Guard(rho2, ">"), exp(const(-1.0) / rho2))], const(0.0))
    fields = [
        VectorField((const(0.0) - Y, X + const(0.0)), name="rot"),
        VectorField((phi, rho2), name="flat"),
        gen.random_poly_field(rng, 2, degree=2),
        VectorField((const(1.0), const(0.0)), name="guarded",
                    guards=(Guard(X + 2.0, ">"),)),
    ]
    for f in fields:
        cf = compiled(f)
        for t in (0.7, -0.4, 1.0, -1.0):
            for p in ([0.3, -0.2], [1.0, 0.5]):
                a = K.backend.rk45(cf, p, t, 1e-9)
                b = fallback.rk45(cf, p, t, 1e-9)
                assert a[0] == b[0] and a[1] == b[1] and a[2] == b[2], f.name
                aj = K.backend.rk45_jac(cf, p, t, 1e-8)
                bj = fallback.rk45_jac(cf, p, t, 1e-8)
                assert aj[0] == bj[0] and aj[1] == bj[1], f.name


@pytest.mark.skipif(not COMPILED, reason="compiled kernel not built")
def test_backends_agree_on_statuses():
    down = VectorField((const(0.0), const(-1.0)), name="down",
                       guards=(Guard(Y, ">"),))
    cf = compiled(down)
    a = K.backend.rk45(cf, [0.0, 0.5], 2.0, 1e-9)
    b = fallback.rk45(cf, [0.0, 0.5], 2.0, 1e-9)
    assert a[1] == b[1] == 2  # guard-violation
    assert a[0] == b[0]
    ricatti = VectorField((const(1.0) + X * X,), name="ricatti")
    cf = compiled(ricatti)
    a = K.backend.rk45(cf, [1.0], 1.5, 1e-9)
    b = fallback.rk45(cf, [1.0], 1.5, 1e-9)
    assert a[1] == b[1] == 1  # escaped


def test_fallback_forced_by_env(monkeypatch):
    # re-importing the package under ORBITKIT_PURE must select the fallback
    import subprocess
    import sys
    code = ("import orbitkit._kernel as K; "
            "print(K.BACKEND_NAME)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"ORBITKIT_PURE": "1", "PATH": "/usr/bin:/bin"},
                         capture_output=True, text=True)
    assert out.stdout.strip() == "fallback"
