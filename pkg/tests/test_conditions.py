import numpy as np
import pytest

from orbitkit.conditions import (Region, Verdict, check_curve_condition,
                                 check_frobenius, check_hermann,
                                 check_invariance, check_involutive,
                                 check_lobry, integrable_at, region_sample,
                                 run_check)
from orbitkit.corpus import builtin_cases
from orbitkit.expr import const, var
from orbitkit.fields import Family, VectorField

X, Y, Z = var(0), var(1), var(2)
ZERO = const(0.0)
DX = VectorField((const(1.0), ZERO), name="dx")
DY = VectorField((ZERO, const(1.0)), name="dy")
XDY = VectorField((ZERO, X + ZERO), name="xdy")

BOX2 = Region.box([-1, -1], [1, 1])


def _case(name):
    return [c for c in builtin_cases() if c.name == name][0]


def so3_family():
    return _case("so3-spheres").family


def exflag_family():
    return _case("halfplane-x-noninteg").family


def balan_family():
    return _case("balan-pair").family


def arjen_family():
    return _case("arjen-module").family


def arjen_companion():
    return _case("arjen-module").companion


# -- involutive ------------------------------------------------------------------

def test_involutive_so3_holds():
    v = check_involutive(so3_family(), Region.box([-1] * 3, [1] * 3), samples=48,
                         tol=1e-6)
    assert v.outcome == "holds"
    assert v.evidence["max_residual"] <= 1e-9


def test_involutive_exflag_holds_at_standard_budget():
    v = check_involutive(exflag_family(), BOX2, samples=32, cap=1000.0)
    assert v.outcome == "holds"


def test_involutive_balan_fails_with_blowup_near_origin():
    v = check_involutive(balan_family(),
                         Region.annulus([0, 0], 0.04, 0.2), samples=16,
                         cap=25.0, tol=1e-6)
    assert v.outcome == "fails"
    assert v.evidence["failure"] == "coefficient-blowup"
    witness = np.asarray(v.evidence["witness"])
    assert float(np.linalg.norm(witness)) <= 0.2


def test_involutive_balan_holds_away_from_origin():
    v = check_involutive(balan_family(),
                         Region.annulus([0, 0], 0.5, 1.0), samples=16,
                         cap=25.0, tol=1e-6)
    assert v.outcome == "holds"


def test_involutive_single_member_vacuous():
    v = check_involutive(Family(2, (DX,)), BOX2, samples=8)
    assert v.outcome == "holds"


# -- invariance ------------------------------------------------------------------

def test_invariance_exflag_fails_pushing_left():
    fam = exflag_family()
    v = check_invariance(fam, fam, [((0.5, 0.0), 0, -1.0)], tol=1e-6)
    assert v.outcome == "fails"
    assert v.evidence["residual"] > 0.1
    assert v.evidence["endpoint"][0] == pytest.approx(-0.5, abs=1e-8)


def test_invariance_so3_holds():
    fam = so3_family()
    probes = [(p, k % 3, 0.8 if k % 2 else -0.8)
              for k, p in enumerate(region_sample(Region.box([-1] * 3, [1] * 3), 12))]
    v = check_invariance(fam, fam, probes, tol=1e-6)
    assert v.outcome == "holds"


def test_invariance_full_tangent_bundle_holds():
    full = Family(2, (DX, DY))
    fam = exflag_family()
    probes = [((0.5, 0.0), 0, -1.0), ((0.2, 0.3), 1, 0.5)]
    v = check_invariance(fam, full, probes, tol=1e-6)
    assert v.outcome == "holds"


# -- lobry -----------------------------------------------------------------------

def test_lobry_coordinate_fields_hold():
    v = check_lobry(Family(2, (DX, DY)), (0.3, -0.2), radius=0.5)
    assert v.outcome == "holds"


def test_lobry_arjen_holds_with_matched_samples():
    v = check_lobry(arjen_family(), (0.0, 0.0), radius=0.1, samples=12,
                    rule_samples=[0.4])
    assert v.outcome == "holds"


def test_lobry_arjen_holds_at_small_radius_full_grid():
    v = check_lobry(arjen_family(), (0.0, 0.0), radius=0.04, samples=12)
    assert v.outcome == "holds"


def test_lobry_finite_presentation_fails_with_blowup():
    v = check_lobry(arjen_companion(), (0.0, 0.0), radius=0.1, samples=16)
    assert v.outcome == "fails"
    assert v.evidence["failure"] == "coefficient-blowup"
    # oracle: the exact coefficient of [rho dy, dx] on rho dy is
    # -2x/(x^2+y^2)^2, which grows without bound along a shrinking sequence
    prev = 0.0
    for k in range(1, 5):
        x = 0.2 / (2.0 ** k)
        c = 2.0 * x / (x * x) ** 2
        assert c > prev
        prev = c
    assert v.evidence["max_coefficient"] > 1000.0


# -- curve conditions --------------------------------------------------------------

def test_curve_conditions_trivial_family():
    fam = Family(2, (DX, DY))
    for mode in ("sussmann", "stefan74", "balan"):
        v = check_curve_condition(mode, fam, (0.4, 0.1), eps=0.5, u_radius=0.3)
        assert v.outcome == "holds", mode


def test_sussmann_arjen_holds_with_member_dependent_eps():
    v = check_curve_condition("sussmann", arjen_family(), (0.0, 0.0), eps=0.5)
    assert v.outcome == "holds"
    eps_small_bump = v.evidence["per_member"]["bump[0.05]"]["eps"]
    eps_dx = v.evidence["per_member"]["dx"]["eps"]
    assert eps_small_bump < eps_dx  # the epsilon shrinks with the bump radius
    assert v.evidence["eps_uniform"] is False


def test_balan_mode_arjen_fails():
    v = check_curve_condition("balan", arjen_family(), (0.0, 0.0), u_radius=0.3)
    assert v.outcome == "fails"
    failing = v.evidence["failing_member"]
    assert failing.startswith("bump") and float(failing[5:-1]) < 0.3


def test_balan_mode_respects_large_bumps():
    v = check_curve_condition("balan", arjen_family(), (0.0, 0.0), u_radius=0.3,
                              rule_samples=[0.4])
    assert v.outcome == "holds"


def test_stefan74_spanning_check_detects_rank_growth():
    # spanning set chosen at the origin is {dx}; along its curve the family
    # becomes rank 2, so the 2-part test must fail the spanning condition
    # while the curve stays at scales where the flat member is visible
    v = check_curve_condition("stefan74", exflag_family(), (0.0, 0.0), eps=0.5,
                              eps_halvings=3)
    assert v.outcome == "fails"
    assert v.evidence["per_member"]["dx"]["failure"] == "spanning-rank"
    # with an unbounded epsilon search the curve shrinks below the scale at
    # which exp(-1/x) is numerically distinguishable from zero, and the
    # checker honestly reports no violation found
    deep = check_curve_condition("stefan74", exflag_family(), (0.0, 0.0),
                                 eps=0.5, eps_halvings=6)
    assert deep.outcome == "holds"
    assert deep.evidence["per_member"]["dx"]["eps"] <= 0.04


# -- hermann / frobenius -----------------------------------------------------------

def test_hermann_so3_holds():
    v = check_hermann(so3_family(), region=Region.box([-1] * 3, [1] * 3),
                      samples=24, tol=1e-6)
    assert v.outcome == "holds"


def test_hermann_xdy_fails_module_check():
    v = check_hermann(Family(2, (DX, XDY)), region=BOX2, samples=16)
    assert v.outcome == "fails"


def test_hermann_single_generator_holds():
    fam = Family(1, (VectorField((X,), name="xdx"),))
    v = check_hermann(fam, region=Region.box([-1], [1]), samples=8)
    assert v.outcome == "holds"


def test_frobenius_constant_rank_holds():
    v = check_frobenius(Family(2, (DX, DY)), BOX2, samples=16)
    assert v.outcome == "holds"
    assert v.evidence["rank"] == 2


def test_frobenius_so3_shell_holds():
    v = check_frobenius(so3_family(), Region.annulus([0, 0, 0], 0.9, 1.1),
                        samples=32, tol=1e-6)
    assert v.outcome == "holds"
    assert v.evidence["rank"] == 2


def test_frobenius_exflag_inconclusive():
    v = check_frobenius(exflag_family(), BOX2, samples=32)
    assert v.outcome == "inconclusive"
    assert v.evidence["reason"] == "rank-variation"


# -- integrability -----------------------------------------------------------------

def test_integrable_exflag_fails_at_origin():
    v = integrable_at(exflag_family(), (0.0, 0.0), budget=300)
    assert v.outcome == "fails"
    assert v.evidence["rank"] == 1
    assert v.evidence["saturated_dim"] == 2


def test_integrable_so3_holds():
    v = integrable_at(so3_family(), (1.0, 0.0, 0.0), budget=300)
    assert v.outcome == "holds"
    assert v.evidence["rank"] == v.evidence["saturated_dim"] == 2


def test_integrable_finite_arjen_fails():
    v = integrable_at(arjen_companion(), (0.0, 0.0), budget=300)
    assert v.outcome == "fails"
    assert v.evidence["rank"] == 1
    assert v.evidence["saturated_dim"] == 2


def test_integrable_balan_holds_at_origin_and_e1():
    fam = balan_family()
    v0 = integrable_at(fam, (0.0, 0.0), budget=100)
    assert v0.outcome == "holds"
    assert v0.evidence["rank"] == v0.evidence["saturated_dim"] == 0
    v1 = integrable_at(fam, (1.0, 0.0), budget=200)
    assert v1.outcome == "holds"
    assert v1.evidence["rank"] == v1.evidence["saturated_dim"] == 2


def test_refutation_triple_arjen():
    # the historical failure chain in one run: finite-type and curve-local
    # conditions pass, the uniform-neighborhood condition and integrability
    # fail, all at the same point of the same presentation
    fam = arjen_family()
    origin = (0.0, 0.0)
    lobry = check_lobry(fam, origin, radius=0.1, samples=12, rule_samples=[0.4])
    sussmann = check_curve_condition("sussmann", fam, origin, eps=0.5)
    balan = check_curve_condition("balan", fam, origin, u_radius=0.3)
    integ = integrable_at(fam, origin, budget=300)
    assert (lobry.outcome, sussmann.outcome, balan.outcome, integ.outcome) == \
        ("holds", "holds", "fails", "fails")


def test_soundness_hermann_implies_integrable():
    fam = so3_family()
    h = check_hermann(fam, region=Region.box([-1] * 3, [1] * 3), samples=24,
                      tol=1e-6)
    assert h.outcome == "holds"
    for p in [(1, 0, 0), (0.3, -0.4, 0.2), (0, 0, 0)]:
        assert integrable_at(fam, p, budget=200).outcome == "holds"


def test_soundness_frobenius_implies_integrable_on_region():
    fam = so3_family()
    shell = Region.annulus([0, 0, 0], 0.9, 1.1)
    f = check_frobenius(fam, shell, samples=32, tol=1e-6)
    assert f.outcome == "holds"
    for p in region_sample(shell, 5):
        assert integrable_at(fam, p, budget=200).outcome == "holds"


def test_verdict_requires_witness_or_reason():
    with pytest.raises(ValueError):
        Verdict("holds")
    with pytest.raises(ValueError):
        Verdict("inconclusive")
    with pytest.raises(ValueError):
        Verdict("maybe", evidence={"witness": [0]})


def test_checker_determinism():
    fam = balan_family()
    region = Region.annulus([0, 0], 0.04, 0.2)
    a = check_involutive(fam, region, samples=16, cap=25.0, tol=1e-6).to_json()
    b = check_involutive(fam, region, samples=16, cap=25.0, tol=1e-6).to_json()
    assert a == b
    pa = run_check("integrable", fam, {"at": [1, 0], "budget": 150}).to_json()
    pb = run_check("integrable", fam, {"at": [1, 0], "budget": 150}).to_json()
    assert pa == pb
