"""Numeric checkers for the classical integrability conditions.

Every checker is an evidence-producing numeric test, not a proof: `holds`
means no violation was found at the stated tolerances, caps and budgets,
and every verdict records the parameters it ran with.  Witness points
accompany both `holds` and `fails`; `inconclusive` carries its reason.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ._linalg import as_matrix, greedy_span_indices, numeric_rank
from .fields import Family, VectorField, evaluate_family, lie_bracket
from .flows import flow, flow_with_jacobian
from .frames import (DEFAULT_CAP, DEFAULT_RANK_TOL, SubspaceBasis,
                     fit_coefficients, rank_at, span_contains)
from .orbits import saturate

__all__ = [
    "Verdict", "Region", "region_sample",
    "check_involutive", "check_invariance", "check_lobry",
    "check_curve_condition", "check_hermann", "check_frobenius",
    "integrable_at", "run_check", "CONDITION_NAMES",
]

DEFAULT_FIT_TOL = 1.0e-7
DEFAULT_SPAN_TOL = 1.0e-6
EPS_HALVINGS = 6          # how far the per-member epsilon search shrinks
DEFAULT_RULE_GRID = (0.4, 0.2, 0.1, 0.05)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [float(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class Verdict:
    outcome: str              # holds | fails | inconclusive
    evidence: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.outcome not in ("holds", "fails", "inconclusive"):
            raise ValueError(f"bad outcome {self.outcome!r}")
        if self.outcome in ("holds", "fails") and not self.evidence.get("witness"):
            raise ValueError(f"{self.outcome} verdict needs a witness")
        if self.outcome == "inconclusive" and not self.evidence.get("reason"):
            raise ValueError("inconclusive verdict needs a reason")

    @property
    def holds(self) -> bool:
        return self.outcome == "holds"

    def to_json(self) -> dict:
        return {"outcome": self.outcome,
                "evidence": _jsonable(self.evidence),
                "params": _jsonable(self.params)}


# -- deterministic region sampling -------------------------------------------------

def _halton(i: int, base: int) -> float:
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


_BASES = (2, 3, 5, 7)


@dataclass(frozen=True)
class Region:
    """Box, ball, or annulus sampling region."""

    kind: str
    lo: tuple = ()
    hi: tuple = ()
    center: tuple = ()
    rmin: float = 0.0
    rmax: float = 0.0

    @staticmethod
    def box(lo, hi) -> "Region":
        return Region("box", lo=tuple(map(float, lo)), hi=tuple(map(float, hi)))

    @staticmethod
    def ball(center, radius) -> "Region":
        return Region("ball", center=tuple(map(float, center)), rmax=float(radius))

    @staticmethod
    def annulus(center, rmin, rmax) -> "Region":
        return Region("annulus", center=tuple(map(float, center)),
                      rmin=float(rmin), rmax=float(rmax))

    @property
    def dimension(self) -> int:
        return len(self.lo) if self.kind == "box" else len(self.center)

    def to_json(self):
        if self.kind == "box":
            return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}
        if self.kind == "ball":
            return {"kind": "ball", "center": list(self.center), "radius": self.rmax}
        return {"kind": "annulus", "center": list(self.center),
                "rmin": self.rmin, "rmax": self.rmax}

    @staticmethod
    def from_json(obj) -> "Region":
        if obj["kind"] == "box":
            return Region.box(obj["lo"], obj["hi"])
        if obj["kind"] == "ball":
            return Region.ball(obj["center"], obj["radius"])
        if obj["kind"] == "annulus":
            return Region.annulus(obj["center"], obj["rmin"], obj["rmax"])
        raise ValueError(f"unknown region kind {obj['kind']!r}")


def region_sample(region: Region, count: int) -> list:
    """Deterministic low-discrepancy sample; boxes lead with their center."""
    n = region.dimension
    if n > len(_BASES):
        raise ValueError(f"sampling supports dimension <= {len(_BASES)}")
    pts: list = []
    if region.kind == "box":
        lo = np.asarray(region.lo)
        hi = np.asarray(region.hi)
        pts.append(0.5 * (lo + hi))
        i = 1
        while len(pts) < count:
            u = np.array([_halton(i, _BASES[d]) for d in range(n)])
            pts.append(lo + u * (hi - lo))
            i += 1
        return pts
    center = np.asarray(region.center)
    lo = center - region.rmax
    hi = center + region.rmax
    if region.kind == "ball" and region.rmin == 0.0:
        pts.append(center.copy())
    i = 1
    guard = 0
    while len(pts) < count and guard < 100000:
        guard += 1
        u = np.array([_halton(i, _BASES[d]) for d in range(n)])
        p = lo + u * (hi - lo)
        r = float(np.linalg.norm(p - center))
        i += 1
        if region.rmin <= r <= region.rmax:
            pts.append(p)
    return pts


# -- helpers -----------------------------------------------------------------------

def _bracket_targets(bracket: VectorField, points) -> list:
    out = []
    for p in points:
        if bracket.in_domain(p):
            out.append((p, bracket.value_at(p)))
    return out


def _spanning_set(family: Family, x, tol: float, rule_samples):
    """Members whose values at x span the family's pointwise span there.

    Greedy by largest residual (equivalently largest singular direction),
    ties broken toward the lowest member index; explicit members come
    first in the candidate order.
    """
    members = family.all_members(rule_samples)
    usable = [(i, m) for i, m in enumerate(members) if m.in_domain(x)]
    values = [m.value_at(x) for _, m in usable]
    target = numeric_rank(as_matrix(values, family.dimension), tol)
    chosen = greedy_span_indices(values, target, family.dimension)
    return [usable[i][1] for i in chosen], target


# -- checkers ----------------------------------------------------------------------

def check_involutive(family: Family, region: Region, samples: int = 32,
                     tol: float = DEFAULT_FIT_TOL, cap: float = DEFAULT_CAP,
                     rule_samples=None) -> Verdict:
    """Do all pairwise brackets fit back into the family with bounded
    smooth-looking coefficients over the region?"""
    members = family.all_members(rule_samples)
    params = {"region": region.to_json(), "samples": samples, "tol": tol,
              "cap": cap, "members": len(members)}
    pts = region_sample(region, samples)
    worst = None
    max_resid = 0.0
    max_coeff = 0.0
    pairs = 0
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            br = lie_bracket(members[i], members[j])
            targets = _bracket_targets(br, pts)
            if not targets:
                continue
            pairs += 1
            rep = fit_coefficients(targets, family, cap, tol, rule_samples)
            max_resid = max(max_resid, rep.max_residual)
            max_coeff = max(max_coeff, rep.max_coefficient)
            if rep.outcome != "fit":
                ev = {"witness": _jsonable(rep.witness),
                      "pair": [members[i].name, members[j].name],
                      "failure": rep.outcome,
                      "max_residual": rep.max_residual,
                      "max_coefficient": rep.max_coefficient}
                if worst is None or rep.max_coefficient > worst["max_coefficient"]:
                    worst = ev
    if worst is not None:
        return Verdict("fails", evidence={**worst, "pairs": pairs}, params=params)
    if pairs == 0:
        if len(members) < 2:
            # a single field commutes with itself; the condition is vacuous
            return Verdict("holds", evidence={"witness": _jsonable(pts[0]),
                                              "pairs": 0,
                                              "max_residual": 0.0,
                                              "max_coefficient": 0.0},
                           params=params)
        return Verdict("inconclusive",
                       evidence={"reason": "no bracket defined on the region"},
                       params=params)
    return Verdict("holds", evidence={"witness": _jsonable(pts[0]),
                                      "pairs": pairs,
                                      "max_residual": max_resid,
                                      "max_coefficient": max_coeff},
                   params=params)


def check_invariance(family: Family, dist: Family, probes,
                     tol: float = DEFAULT_SPAN_TOL,
                     rank_tol: float = DEFAULT_RANK_TOL,
                     flow_tol: float = 1.0e-9,
                     rule_samples=None) -> Verdict:
    """Push a basis of the distribution along member flows and test that it
    stays inside the distribution at the endpoint.

    Probes are (point, member index, time) triples; member indices refer to
    the family's member list (explicit followed by sampled rule members).
    """
    if family.dimension != dist.dimension:
        raise ValueError("family and distribution dimension differ")
    members = family.all_members(rule_samples)
    params = {"probes": len(probes), "tol": tol, "rank_tol": rank_tol,
              "flow_tol": flow_tol}
    flow_failures = 0
    checked = 0
    max_resid = 0.0
    for y, idx, t in probes:
        y = np.asarray(y, dtype=float)
        member = members[int(idx)]
        vals = evaluate_family(dist, y, rule_samples)
        mat = vals.matrix()
        r = numeric_rank(mat, rank_tol)
        if r == 0:
            checked += 1
            continue
        u, s, _ = np.linalg.svd(mat, full_matrices=False)
        res = flow_with_jacobian(member, y, float(t), flow_tol)
        if not res.ok:
            flow_failures += 1
            continue
        end_vals = evaluate_family(dist, res.point, rule_samples)
        end_basis = SubspaceBasis(res.point, end_vals.vectors, rank_tol)
        for k in range(r):
            pushed = res.jacobian @ (u[:, k] * s[k])
            contained, resid = span_contains(end_basis, pushed, tol)
            max_resid = max(max_resid, resid)
            if not contained:
                return Verdict("fails", evidence={
                    "witness": _jsonable(y),
                    "endpoint": _jsonable(res.point),
                    "member": member.name,
                    "time": float(t),
                    "residual": resid,
                }, params=params)
        checked += 1
    if checked == 0:
        return Verdict("inconclusive",
                       evidence={"reason": "all probe flows failed",
                                 "flow_failures": flow_failures},
                       params=params)
    first = np.asarray(probes[0][0], dtype=float)
    return Verdict("holds", evidence={"witness": _jsonable(first),
                                      "checked": checked,
                                      "flow_failures": flow_failures,
                                      "max_residual": max_resid},
                   params=params)


def check_lobry(family: Family, x, radius: float, tol: float = DEFAULT_FIT_TOL,
                cap: float = DEFAULT_CAP, samples: int = 16,
                rank_tol: float = DEFAULT_RANK_TOL,
                rule_samples=None) -> Verdict:
    """Finite-type test: brackets of every member with a spanning set must
    fit into the family with bounded coefficients on a ball around x."""
    x = np.asarray(x, dtype=float)
    members = family.all_members(rule_samples)
    span_set, span_rank = _spanning_set(family, x, rank_tol, rule_samples)
    params = {"at": _jsonable(x), "radius": radius, "tol": tol, "cap": cap,
              "samples": samples, "members": len(members),
              "spanning": [m.name for m in span_set]}
    pts = region_sample(Region.ball(x, radius), samples)
    per_member = {}
    worst = None
    for member in members:
        outcome = "fit"
        detail = {}
        for xi in span_set:
            br = lie_bracket(member, xi)
            targets = _bracket_targets(br, pts)
            if not targets:
                continue
            rep = fit_coefficients(targets, family, cap, tol, rule_samples)
            detail = {"max_residual": max(detail.get("max_residual", 0.0),
                                          rep.max_residual),
                      "max_coefficient": max(detail.get("max_coefficient", 0.0),
                                             rep.max_coefficient)}
            if rep.outcome != "fit":
                outcome = rep.outcome
                detail["witness"] = _jsonable(rep.witness)
                detail["against"] = xi.name
                break
        per_member[member.name or str(id(member))] = {"outcome": outcome, **detail}
        if outcome != "fit" and worst is None:
            worst = {"member": member.name, **detail, "failure": outcome}
    if worst is not None:
        return Verdict("fails",
                       evidence={"witness": worst.get("witness", _jsonable(x)),
                                 **worst, "per_member": per_member,
                                 "span_rank": span_rank},
                       params=params)
    return Verdict("holds", evidence={"witness": _jsonable(x),
                                      "per_member": per_member,
                                      "span_rank": span_rank},
                   params=params)


def _curve_points(member: VectorField, x, times, flow_tol: float):
    """Points of the integral curve at the requested times, or None."""
    out = []
    for t in times:
        if t == 0.0:
            out.append((0.0, np.asarray(x, dtype=float)))
            continue
        res = flow(member, x, float(t), flow_tol)
        if not res.ok:
            return None
        out.append((t, res.point))
    return out


def _fit_along_curve(member: VectorField, span_set, curve, family_for_rank,
                     tol, cap, rank_tol, check_spanning, rule_samples):
    """Fit [member, X_i] against the spanning set along one curve.

    Returns (ok, detail) where detail carries the deciding residual or
    coefficient and the witness time.
    """
    span_fam = Family(member.dimension, tuple(span_set))
    detail = {"max_residual": 0.0, "max_coefficient": 0.0}
    if check_spanning:
        for t, p in curve:
            vals = evaluate_family(span_fam, p)
            r_span = numeric_rank(vals.matrix(), rank_tol)
            r_full = rank_at(family_for_rank, p, rank_tol, rule_samples)
            if r_span != r_full:
                detail.update({"failure": "spanning-rank", "time": t,
                               "witness": _jsonable(p),
                               "span_rank": r_span, "full_rank": r_full})
                return False, detail
    for xi in span_set:
        br = lie_bracket(member, xi)
        targets = []
        times = []
        for t, p in curve:
            if br.in_domain(p):
                targets.append((p, br.value_at(p)))
                times.append(t)
        if not targets:
            continue
        rep = fit_coefficients(targets, span_fam, cap, tol)
        detail["max_residual"] = max(detail["max_residual"], rep.max_residual)
        detail["max_coefficient"] = max(detail["max_coefficient"], rep.max_coefficient)
        if rep.outcome != "fit":
            detail.update({"failure": rep.outcome, "against": xi.name,
                           "witness": _jsonable(rep.witness)})
            return False, detail
    return True, detail


def _exit_time(member: VectorField, x, center, radius, t_cap, flow_tol, sign):
    """Largest |t| (up to t_cap) with the curve still inside the closed ball."""
    inside = np.asarray(x, dtype=float)
    t = 0.0
    step = max(radius / 4.0, 1.0e-3)
    while t < t_cap:
        dt = min(step, t_cap - t)
        res = flow(member, inside, sign * dt, flow_tol)
        if not res.ok:
            return t
        if float(np.linalg.norm(res.point - center)) > radius:
            lo_t, hi_t = 0.0, dt
            for _ in range(30):
                mid = 0.5 * (lo_t + hi_t)
                r2 = flow(member, inside, sign * mid, flow_tol)
                if not r2.ok:
                    hi_t = mid
                    continue
                if float(np.linalg.norm(r2.point - center)) > radius:
                    hi_t = mid
                else:
                    lo_t = mid
            return t + lo_t
        inside = res.point
        t += dt
    return t_cap


def check_curve_condition(mode: str, family: Family, x, eps: float = 0.5,
                          u_center=None, u_radius: float = 0.3,
                          t_cap: float = 2.0, tol: float = DEFAULT_FIT_TOL,
                          cap: float = DEFAULT_CAP,
                          rank_tol: float = DEFAULT_RANK_TOL,
                          flow_tol: float = 1.0e-9, member: Optional[int] = None,
                          times_per_side: int = 6, eps_halvings: int = EPS_HALVINGS,
                          rule_samples=None) -> Verdict:
    """Bracket conditions evaluated along integral curves through x.

    mode 'sussmann': for each member X, search a per-member epsilon (halving
    from eps) such that [X, X_i] fits against the spanning set along the
    curve for |t| < epsilon.  mode 'stefan74': same, but the spanning set
    must also span the family's full pointwise span at every sampled curve
    point.  mode 'balan': no shrinking; the fit must hold for all |t| up to
    the exit time of the curve from the ball U = (u_center, u_radius),
    computed by bisection (t_cap stands in for curves that never leave).
    """
    if mode not in ("sussmann", "stefan74", "balan"):
        raise ValueError(f"unknown mode {mode!r}")
    x = np.asarray(x, dtype=float)
    members = family.all_members(rule_samples)
    tested = members if member is None else [members[member]]
    span_set, span_rank = _spanning_set(family, x, rank_tol, rule_samples)
    params = {"mode": mode, "at": _jsonable(x), "tol": tol, "cap": cap,
              "flow_tol": flow_tol, "times_per_side": times_per_side,
              "spanning": [m.name for m in span_set]}
    if mode == "balan":
        center = x if u_center is None else np.asarray(u_center, dtype=float)
        params.update({"u_center": _jsonable(center), "u_radius": u_radius,
                       "t_cap": t_cap})
    else:
        params["eps"] = eps
        params["eps_halvings"] = eps_halvings

    per_member = {}
    flow_failures = 0
    failure = None
    for m in tested:
        name = m.name or f"member{members.index(m)}"
        if mode == "balan":
            mu_p = _exit_time(m, x, center, u_radius, t_cap, flow_tol, 1.0)
            mu_m = _exit_time(m, x, center, u_radius, t_cap, flow_tol, -1.0)
            mu = min(mu_p, mu_m)
            span_t = mu * (1.0 - 1.0e-9)
            times = [span_t * k / times_per_side
                     for k in range(-times_per_side, times_per_side + 1)]
            curve = _curve_points(m, x, times, flow_tol)
            if curve is None:
                flow_failures += 1
                per_member[name] = {"outcome": "flow-failure", "mu": mu}
                continue
            ok, detail = _fit_along_curve(m, span_set, curve, family, tol, cap,
                                          rank_tol, False, rule_samples)
            per_member[name] = {"outcome": "fit" if ok else detail["failure"],
                                "mu": mu, **detail}
            if not ok and failure is None:
                failure = {"member": name, "mu": mu, **detail}
        else:
            found = None
            detail = {}
            cur_eps = eps
            for _ in range(eps_halvings + 1):
                times = [cur_eps * k / times_per_side
                         for k in range(-times_per_side, times_per_side + 1)]
                curve = _curve_points(m, x, times, flow_tol)
                if curve is not None:
                    ok, detail = _fit_along_curve(
                        m, span_set, curve, family, tol, cap, rank_tol,
                        mode == "stefan74", rule_samples)
                    if ok:
                        found = cur_eps
                        break
                else:
                    flow_failures += 1
                cur_eps *= 0.5
            if found is not None:
                per_member[name] = {"outcome": "fit", "eps": found, **detail}
            else:
                per_member[name] = {"outcome": detail.get("failure", "flow-failure"),
                                    **detail}
                if failure is None and detail:
                    failure = {"member": name, **detail}

    evidence = {"per_member": per_member, "span_rank": span_rank,
                "flow_failures": flow_failures}
    if mode != "balan":
        eps_seen = [v["eps"] for v in per_member.values() if "eps" in v]
        if eps_seen:
            evidence["eps_min"] = min(eps_seen)
            evidence["eps_max"] = max(eps_seen)
            evidence["eps_uniform"] = min(eps_seen) == max(eps_seen)
    if failure is not None:
        return Verdict("fails", evidence={
            "witness": failure.get("witness", _jsonable(x)), **evidence,
            "failing_member": failure["member"]}, params=params)
    if all(v["outcome"] == "flow-failure" for v in per_member.values()):
        return Verdict("inconclusive",
                       evidence={"reason": "all member curves failed to integrate",
                                 **evidence}, params=params)
    return Verdict("holds", evidence={"witness": _jsonable(x), **evidence},
                   params=params)


def check_hermann(family: Family, generators=None, region: Region = None,
                  tol: float = DEFAULT_FIT_TOL, cap: float = DEFAULT_CAP,
                  samples: int = 32, curve_starts: int = 6,
                  curve_times=(-1.0, -0.5, 0.5, 1.0),
                  rank_tol: float = DEFAULT_RANK_TOL, flow_tol: float = 1.0e-8,
                  rule_samples=None) -> Verdict:
    """Module closure of the generators plus rank constancy along their
    integral curves, the two halves of the locally-finitely-generated
    Lie-algebra route to integrability."""
    gens = (list(family.members) if generators is None
            else [family.members[i] for i in generators])
    if not gens:
        raise ValueError("check_hermann needs at least one generator")
    params = {"region": region.to_json(), "generators": [g.name for g in gens],
              "tol": tol, "cap": cap, "samples": samples,
              "curve_starts": curve_starts, "curve_times": list(curve_times)}
    gen_family = Family(family.dimension, tuple(gens))
    pts = region_sample(region, samples)

    module_ok = True
    module_detail = {"max_residual": 0.0, "max_coefficient": 0.0}
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            br = lie_bracket(gens[i], gens[j])
            targets = _bracket_targets(br, pts)
            if not targets:
                continue
            rep = fit_coefficients(targets, gen_family, cap, tol)
            module_detail["max_residual"] = max(module_detail["max_residual"],
                                                rep.max_residual)
            module_detail["max_coefficient"] = max(module_detail["max_coefficient"],
                                                   rep.max_coefficient)
            if rep.outcome != "fit":
                module_ok = False
                module_detail.update({"failure": rep.outcome,
                                      "pair": [gens[i].name, gens[j].name],
                                      "witness": _jsonable(rep.witness)})
                break
        if not module_ok:
            break

    rank_ok = True
    rank_detail = {}
    curves = 0
    for start in pts[:curve_starts]:
        for g in gens:
            base_rank = rank_at(family, start, rank_tol, rule_samples)
            ranks = [base_rank]
            failed = False
            for t in curve_times:
                res = flow(g, start, float(t), flow_tol)
                if not res.ok:
                    failed = True
                    break
                ranks.append(rank_at(family, res.point, rank_tol, rule_samples))
            if failed:
                continue
            curves += 1
            if len(set(ranks)) > 1:
                rank_ok = False
                rank_detail = {"witness": _jsonable(start), "generator": g.name,
                               "ranks": ranks}
                break
        if not rank_ok:
            break

    evidence = {"module": module_detail, "rank_curves": curves}
    if not module_ok:
        return Verdict("fails", evidence={"witness": module_detail["witness"],
                                          "failure": "module", **evidence},
                       params=params)
    if not rank_ok:
        return Verdict("fails", evidence={"witness": rank_detail["witness"],
                                          "failure": "rank-constancy",
                                          **evidence, **rank_detail},
                       params=params)
    if curves == 0:
        return Verdict("inconclusive",
                       evidence={"reason": "no integral curve could be sampled",
                                 **evidence}, params=params)
    return Verdict("holds", evidence={"witness": _jsonable(pts[0]), **evidence},
                   params=params)


def check_frobenius(family: Family, region: Region, tol: float = DEFAULT_FIT_TOL,
                    cap: float = DEFAULT_CAP, samples: int = 32,
                    rank_tol: float = DEFAULT_RANK_TOL,
                    rule_samples=None) -> Verdict:
    """Constant-rank fast path: constant rank over the region plus
    involutivity.  Varying rank makes the test inapplicable, which is
    reported as inconclusive (the distribution may still be integrable)."""
    pts = region_sample(region, samples)
    ranks = [rank_at(family, p, rank_tol, rule_samples) for p in pts]
    params = {"region": region.to_json(), "samples": samples, "tol": tol,
              "cap": cap, "rank_tol": rank_tol}
    if len(set(ranks)) > 1:
        lo = int(np.argmin(ranks))
        hi = int(np.argmax(ranks))
        return Verdict("inconclusive", evidence={
            "reason": "rank-variation",
            "rank_low": {"point": _jsonable(pts[lo]), "rank": ranks[lo]},
            "rank_high": {"point": _jsonable(pts[hi]), "rank": ranks[hi]},
        }, params=params)
    inv = check_involutive(family, region, samples, tol, cap, rule_samples)
    evidence = {"rank": ranks[0], **inv.evidence}
    return Verdict(inv.outcome, evidence=evidence, params=params)


def integrable_at(family: Family, x, budget: int = 400,
                  tol: float = DEFAULT_RANK_TOL, seed: int = 0,
                  tmax: float = 1.0, span_tol: float = DEFAULT_SPAN_TOL,
                  rule_samples=None) -> Verdict:
    """Is the family's own pointwise span the orbit tangent at x?

    Fails when the saturated dimension exceeds the pointwise rank, or when
    a pushforward of the span escapes the family's span at a sampled orbit
    point (a direct invariance violation).
    """
    x = np.asarray(x, dtype=float)
    r = rank_at(family, x, tol, rule_samples)
    sat = saturate(family, x, budget, tol, tmax, seed, rule_samples=rule_samples)
    s = sat.dim
    params = {"at": _jsonable(x), "budget": budget, "tol": tol, "seed": seed,
              "tmax": tmax, "span_tol": span_tol}
    evidence = {"rank": r, "saturated_dim": s, "stable": sat.stable,
                "orbit_samples": len(sat.samples),
                "flow_failures": sat.flow_failures}
    if s > r:
        return Verdict("fails", evidence={"witness": _jsonable(x),
                                          "failure": "saturation-exceeds-rank",
                                          **evidence}, params=params)
    escape = None
    vals = evaluate_family(family, x, rule_samples)
    mat = vals.matrix()
    if r > 0 and sat.samples:
        u, sv, _ = np.linalg.svd(mat, full_matrices=False)
        base_dirs = [u[:, k] * sv[k] for k in range(r)]
        for point, word, jac in sat.samples:
            end_vals = evaluate_family(family, point, rule_samples)
            end_basis = SubspaceBasis(point, end_vals.vectors, tol)
            for b in base_dirs:
                pushed = jac @ b
                contained, resid = span_contains(end_basis, pushed, span_tol)
                if not contained:
                    escape = {"witness": _jsonable(point),
                              "word": word.to_text(), "residual": resid}
                    break
            if escape:
                break
    if escape is not None:
        return Verdict("fails", evidence={"failure": "span-escape",
                                          **escape, **evidence}, params=params)
    if not sat.stable:
        return Verdict("inconclusive",
                       evidence={"reason": "budget exhausted before saturation stabilized",
                                 **evidence}, params=params)
    return Verdict("holds", evidence={"witness": _jsonable(x), **evidence},
                   params=params)


# -- dispatcher --------------------------------------------------------------------

CONDITION_NAMES = ("involutive", "invariance", "lobry", "sussmann",
                   "stefan74", "balan", "hermann", "frobenius", "integrable")


def _parse_region(params, key="region"):
    return Region.from_json(params[key])


def run_check(name: str, family: Family, params: dict,
              dist: Optional[Family] = None) -> Verdict:
    """Uniform entry point used by the CLI and the corpus harness."""
    p = dict(params)
    rule_samples = p.pop("rule_samples", None)
    if name == "involutive":
        return check_involutive(family, _parse_region(p),
                                samples=int(p.get("samples", 32)),
                                tol=float(p.get("tol", DEFAULT_FIT_TOL)),
                                cap=float(p.get("cap", DEFAULT_CAP)),
                                rule_samples=rule_samples)
    if name == "invariance":
        if dist is None:
            dist = family
        probes = [(q["point"], q["member"], q["time"]) for q in p["probes"]]
        return check_invariance(family, dist, probes,
                                tol=float(p.get("tol", DEFAULT_SPAN_TOL)),
                                rule_samples=rule_samples)
    if name == "lobry":
        return check_lobry(family, p["at"], radius=float(p.get("radius", 0.1)),
                           tol=float(p.get("tol", DEFAULT_FIT_TOL)),
                           cap=float(p.get("cap", DEFAULT_CAP)),
                           samples=int(p.get("samples", 16)),
                           rule_samples=rule_samples)
    if name in ("sussmann", "stefan74", "balan"):
        return check_curve_condition(
            name, family, p["at"],
            eps=float(p.get("eps", 0.5)),
            u_center=p.get("u_center"),
            u_radius=float(p.get("u_radius", 0.3)),
            t_cap=float(p.get("t_cap", 2.0)),
            tol=float(p.get("tol", DEFAULT_FIT_TOL)),
            cap=float(p.get("cap", DEFAULT_CAP)),
            eps_halvings=int(p.get("eps_halvings", EPS_HALVINGS)),
            rule_samples=rule_samples)
    if name == "hermann":
        return check_hermann(family, p.get("generators"), _parse_region(p),
                             tol=float(p.get("tol", DEFAULT_FIT_TOL)),
                             cap=float(p.get("cap", DEFAULT_CAP)),
                             samples=int(p.get("samples", 32)),
                             rule_samples=rule_samples)
    if name == "frobenius":
        return check_frobenius(family, _parse_region(p),
                               tol=float(p.get("tol", DEFAULT_FIT_TOL)),
                               cap=float(p.get("cap", DEFAULT_CAP)),
                               samples=int(p.get("samples", 32)),
                               rule_samples=rule_samples)
    if name == "integrable":
        return integrable_at(family, p["at"], budget=int(p.get("budget", 400)),
                             tol=float(p.get("tol", DEFAULT_RANK_TOL)),
                             seed=int(p.get("seed", 0)),
                             tmax=float(p.get("tmax", 1.0)),
                             span_tol=float(p.get("span_tol", DEFAULT_SPAN_TOL)),
                             rule_samples=rule_samples)
    raise ValueError(f"unknown condition {name!r}")
