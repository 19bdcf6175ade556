"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Tolerances are fixed here and nowhere else.
"""
import io
import contextlib
import json
import random
import time

import numpy as np

from orbitkit.cli import main as cli_main
from orbitkit.conditions import check_curve_condition, check_lobry, integrable_at
from orbitkit.corpus import CASE_NAMES, builtin_cases
from orbitkit.expr import const, dumps_json, simplify, var
from orbitkit.fields import (Family, VectorField, family_to_json, lie_bracket,
                             lie_closure)
from orbitkit.flows import flow, flow_with_jacobian
from orbitkit.orbits import orbit_tangent_dim, sample_orbit

import gen


def _report(name: str, detail: str):
    print(f"[PASS] {name}: {detail}")


def _case(name):
    return [c for c in builtin_cases() if c.name == name][0]


def _run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main(argv)
    return code, out.getvalue(), err.getvalue()


def test_corpus_gate():
    """All six cases pass at budget 2000, seed 0, one thread, within 60 s."""
    t0 = time.monotonic()
    code, out, _ = _run_cli(["--threads", "1", "corpus", "--budget", "2000",
                             "--seed", "0"])
    elapsed = time.monotonic() - t0
    report = json.loads(out)
    assert code == 0
    assert report["passed"] is True
    assert tuple(c["case"] for c in report["cases"]) == CASE_NAMES
    assert elapsed <= 60.0, f"corpus took {elapsed:.1f}s"
    _report("corpus gate", f"6/6 cases in {elapsed:.1f}s")


def test_sphere_conservation():
    """so(3) sampling at budget 2000, tol 1e-9: max | |p|-1 | <= 1e-5."""
    cloud = sample_orbit(_case("so3-spheres").family, (1.0, 0.0, 0.0),
                         budget=2000, tmax=1.0, seed=0, tol=1e-9, cell=0.05)
    dev = max(abs(float(np.linalg.norm(p)) - 1.0) for p in cloud.points)
    assert dev <= 1e-5
    _report("sphere conservation",
            f"max deviation {dev:.2e} over {len(cloud)} points")


def test_refutation_triple():
    """On the procedural module at the origin, in one run, within 30 s:
    finite-type holds, curve-local holds, uniform-neighborhood fails,
    integrability fails."""
    t0 = time.monotonic()
    fam = _case("arjen-module").family
    origin = (0.0, 0.0)
    lobry = check_lobry(fam, origin, radius=0.1, samples=12, rule_samples=[0.4])
    sussmann = check_curve_condition("sussmann", fam, origin, eps=0.5)
    balan = check_curve_condition("balan", fam, origin, u_radius=0.3)
    integ = integrable_at(fam, origin, budget=300)
    elapsed = time.monotonic() - t0
    got = (lobry.outcome, sussmann.outcome, balan.outcome, integ.outcome)
    assert got == ("holds", "holds", "fails", "fails"), got
    assert elapsed <= 30.0, f"triple took {elapsed:.1f}s"
    _report("refutation triple",
            f"lobry=holds sussmann=holds balan=fails integrable=fails "
            f"in {elapsed:.1f}s")


def test_balan_pair_split():
    """Involutivity fails with a coefficient blowup witnessed within 0.2 of
    the origin while integrability holds at (0,0) and (1,0)."""
    case = _case("balan-pair")
    fam = case.family
    entry = [e for e in case.expectations
             if e["kind"] == "check" and e["condition"] == "involutive"
             and e["expect"] == "fails"][0]
    from orbitkit.conditions import run_check
    v = run_check("involutive", fam, dict(entry["params"]))
    assert v.outcome == "fails"
    assert v.evidence["failure"] == "coefficient-blowup"
    witness = np.asarray(v.evidence["witness"])
    assert float(np.linalg.norm(witness)) <= 0.2
    v0 = integrable_at(fam, (0.0, 0.0), budget=100)
    v1 = integrable_at(fam, (1.0, 0.0), budget=200)
    assert v0.outcome == "holds" and v1.outcome == "holds"
    _report("balan-pair split",
            f"blowup witness at {witness.round(4).tolist()} "
            f"(|w|={np.linalg.norm(witness):.3f}); integrable at both probes")


def test_orbit_theorem_consistency():
    """On the analytic families, the sampled orbit tangent dimension equals
    the pointwise Lie-closure rank at 20 random probes (exact equality)."""
    x, y, z = var(0), var(1), var(2)
    zero = const(0.0)
    aux = Family(2, (VectorField((const(1.0), zero), name="dx"),
                     VectorField((zero, x + zero), name="xdy")))
    analytic = [(_case("so3-spheres").family, 3), (aux, 2)]
    rng = random.Random(2026)
    checked = 0
    for fam, n in analytic:
        for _ in range(10):
            p = gen.random_point(rng, n, scale=1.0)
            _, closure_rank = lie_closure(fam, 4, p)
            dim, _ = orbit_tangent_dim(fam, p, budget=300)
            assert dim == closure_rank, (p, dim, closure_rank)
            checked += 1
    assert checked == 20
    _report("orbit theorem consistency", f"{checked}/20 probes exact")


def test_numerical_integrity_derivatives():
    """Symbolic vs central-difference derivatives: rel err <= 1e-5 on 1000
    random samples."""
    rng = random.Random(99)
    for _ in range(1000):
        e = gen.random_expr(rng, 2)
        p = gen.random_point(rng, 2)
        i = rng.randrange(2)
        fd = gen.central_diff(lambda q: e.eval(q), p, i, 1e-6)
        assert abs(e.partial(i).eval(p) - fd) <= 1e-5 * (1.0 + abs(fd))
    _report("integrity/derivatives", "1000 samples within 1e-5")


def test_numerical_integrity_flow_group_law():
    """|flow(s+t) - flow(t) o flow(s)| <= 1e-6 on random smooth fields."""
    rng = random.Random(17)
    checked = 0
    while checked < 20:
        f = gen.random_smooth_field(rng, 2)
        p = gen.random_point(rng, 2, scale=0.5)
        s, t = rng.uniform(-1, 1), rng.uniform(-1, 1)
        a = flow(f, p, s + t, 1e-10)
        b1 = flow(f, p, s, 1e-10)
        if not (a.ok and b1.ok):
            continue
        b2 = flow(f, b1.point, t, 1e-10)
        if not b2.ok:
            continue
        assert float(np.linalg.norm(a.point - b2.point)) <= 1e-6
        checked += 1
    _report("integrity/group law", f"{checked} compositions within 1e-6")


def test_numerical_integrity_jacobian():
    """Flow Jacobian columns vs central differences: rel err <= 1e-4."""
    rng = random.Random(3)
    checked = 0
    while checked < 10:
        f = gen.random_poly_field(rng, 2, degree=2)
        p = gen.random_point(rng, 2, scale=0.5)
        t = rng.uniform(-0.6, 0.6)
        res = flow_with_jacobian(f, p, t, tol=1e-10)
        if not res.ok:
            continue
        h = 1e-5
        ok_cols = 0
        for i in range(2):
            up = p.copy(); up[i] += h
            dn = p.copy(); dn[i] -= h
            ru, rd = flow(f, up, t, 1e-10), flow(f, dn, t, 1e-10)
            if not (ru.ok and rd.ok):
                break
            col = (ru.point - rd.point) / (2 * h)
            scale = 1.0 + float(np.max(np.abs(col)))
            assert np.max(np.abs(res.jacobian[:, i] - col)) <= 1e-4 * scale
            ok_cols += 1
        if ok_cols == 2:
            checked += 1
    _report("integrity/jacobian", f"{checked} fields within 1e-4")


def test_numerical_integrity_bracket_identities():
    """Antisymmetry, Jacobi and Leibniz pointwise, rel err <= 1e-8."""
    rng = random.Random(41)
    for _ in range(10):
        a = gen.random_poly_field(rng, 2, degree=3)
        b = gen.random_poly_field(rng, 2, degree=3)
        c = gen.random_poly_field(rng, 2, degree=3)
        anti = [simplify(u + v) for u, v in
                zip(lie_bracket(a, b).components, lie_bracket(b, a).components)]
        cyc = [lie_bracket(a, lie_bracket(b, c)),
               lie_bracket(b, lie_bracket(c, a)),
               lie_bracket(c, lie_bracket(a, b))]
        f = gen.random_poly(rng, 2)
        fb = VectorField(tuple(simplify(f * comp) for comp in b.components))
        leib_lhs = lie_bracket(a, fb)
        br_ab = lie_bracket(a, b)
        for _ in range(10):
            p = gen.random_point(rng, 2, scale=1.0)
            assert max(abs(u.eval(p)) for u in anti) <= 1e-8
            terms = [g.value_at(p) for g in cyc]
            scale = 1.0 + max(float(np.max(np.abs(t))) for t in terms)
            assert float(np.max(np.abs(terms[0] + terms[1] + terms[2]))) \
                <= 1e-8 * scale
            fv = f.eval(p)
            xf = sum(a.components[i].eval(p) * f.partial(i).eval(p)
                     for i in range(2))
            rhs = fv * br_ab.value_at(p) + xf * b.value_at(p)
            scale = 1.0 + float(np.max(np.abs(rhs)))
            assert float(np.max(np.abs(leib_lhs.value_at(p) - rhs))) \
                <= 1e-8 * scale
    _report("integrity/bracket identities", "antisymmetry+Jacobi+Leibniz <= 1e-8")


def test_determinism_cli(tmp_path):
    """Equal seeds give byte-identical orbit and leafmap files; 4 threads
    reproduce the single-thread output."""
    fam_path = tmp_path / "so3.json"
    fam_path.write_text(dumps_json(family_to_json(_case("so3-spheres").family)))
    orbit_args = ["orbit", str(fam_path), "--from", "1,0,0",
                  "--budget", "400", "--seed", "5"]
    files = []
    for i, extra in enumerate(([], [], ["--threads", "4"])):
        out = tmp_path / f"orbit{i}.csv"
        code, _, _ = _run_cli(extra + orbit_args + ["--out", str(out)])
        assert code == 0
        files.append(out.read_bytes())
    assert files[0] == files[1] == files[2]

    leafmap_args = ["leafmap", str(fam_path), "--box", "-1,1,-1,1,-1,1",
                    "--res", "3,3,3", "--budget", "40", "--seed", "2"]
    maps = []
    for i, extra in enumerate(([], [], ["--threads", "4"])):
        out = tmp_path / f"map{i}.csv"
        code, _, _ = _run_cli(extra + leafmap_args + ["--out", str(out)])
        assert code == 0
        maps.append(out.read_bytes())
    assert maps[0] == maps[1] == maps[2]
    _report("determinism", "orbit and leafmap byte-identical; threads 4 == 1")
