"""Built-in example families with machine-checkable expectations.

Six cases ship as JSON (family schema plus an expectations block); each
expectation entry is tagged with the quantity it pins and the parameters
it runs with.  ``run_case`` executes every entry and reports mismatches as
data, never as exceptions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .conditions import run_check
from .expr import (Guard, const, dumps_json, exp, flat_step, loads_json,
                   piecewise, var)
from .fields import (Family, Rule, VectorField, family_from_json,
                     family_to_json, lie_bracket, register_rule)
from .frames import rank_at
from .orbits import orbit_tangent_dim, sample_orbit

__all__ = ["ExampleCase", "CaseReport", "builtin_cases", "run_case",
           "leaf_dim_map", "leafmap_to_csv", "parse_leafmap_csv",
           "semicontinuity_artifacts", "CASE_NAMES"]

CASE_NAMES = ("so3-spheres", "halfplane-y", "flag-line",
              "halfplane-x-noninteg", "balan-pair", "arjen-module")


# -- the procedural rule ------------------------------------------------------------
#
# rule(r) supplies one member dx + g_r dy where g_r is a flat bump that is
# identically 0 on the disk of radius r and identically 1 outside radius 2r.
# Arbitrarily small vanishing neighborhoods are exactly what the curve
# checkers need from a procedurally presented module.

def _bump_member(r: float) -> list:
    x, y = var(0), var(1)
    rho2 = x * x + y * y
    u = (rho2 + const(-(r * r))) * const(1.0 / (3.0 * r * r))
    g = flat_step(u)
    return [VectorField((const(1.0), g), name=f"bump[{r:g}]")]


register_rule("arjen-bump", _bump_member)


# -- case construction ---------------------------------------------------------------

@dataclass
class ExampleCase:
    name: str
    note: str
    family: Family
    expectations: list
    companion: Optional[Family] = None

    def to_json(self) -> dict:
        out = {"name": self.name, "note": self.note,
               "family": family_to_json(self.family),
               "expectations": self.expectations}
        if self.companion is not None:
            out["companion"] = family_to_json(self.companion)
        return out

    @staticmethod
    def from_json(obj) -> "ExampleCase":
        return ExampleCase(
            name=obj["name"],
            note=obj.get("note", ""),
            family=family_from_json(obj["family"]),
            expectations=obj["expectations"],
            companion=(family_from_json(obj["companion"])
                       if obj.get("companion") else None),
        )


def _flat_positive(coord) -> "piecewise":
    """exp(-1/t) for t > 0, glued flat to zero."""
    return piecewise([(Guard(coord, ">"), exp(const(-1.0) / coord))], const(0.0))


def _so3_case() -> ExampleCase:
    x, y, z = var(0), var(1), var(2)
    zero = const(0.0)
    fam = Family(3, (
        VectorField((zero - y, x + zero, zero), name="rz"),
        VectorField((zero - z, zero, x + zero), name="ry"),
        VectorField((zero, zero - z, y + zero), name="rx"),
    ))
    box = {"kind": "box", "lo": [-1, -1, -1], "hi": [1, 1, 1]}
    probes = [{"point": p, "member": k % 3, "time": 0.7 if k % 2 == 0 else -0.7}
              for k, p in enumerate([[0.8, 0.1, -0.3], [0.2, -0.6, 0.5],
                                     [-0.4, 0.4, 0.7], [0.9, 0.0, 0.1],
                                     [-0.2, -0.2, -0.8], [0.5, 0.5, 0.0]])]
    exp_ = [
        {"kind": "rank", "at": [0, 0, 0], "expect": 0},
        {"kind": "rank", "at": [1, 0, 0], "expect": 2},
        {"kind": "rank", "at": [0.5, 0.5, 0], "expect": 2},
        {"kind": "rank", "at": [0.3, -0.4, 0.2], "expect": 2},
        {"kind": "orbit_dim", "at": [1, 0, 0], "expect": 2, "budget": 300},
        {"kind": "orbit_dim", "at": [0, 0, 0], "expect": 0, "budget": 100},
        {"kind": "orbit_dim", "at": [0.3, -0.4, 0.2], "expect": 2, "budget": 300},
        {"kind": "check", "condition": "involutive", "expect": "holds",
         "params": {"region": box, "samples": 48, "cap": 1000.0, "tol": 1e-6}},
        {"kind": "check", "condition": "hermann", "expect": "holds",
         "params": {"region": box, "samples": 24, "cap": 1000.0, "tol": 1e-6}},
        {"kind": "check", "condition": "frobenius", "expect": "holds",
         "params": {"region": {"kind": "annulus", "center": [0, 0, 0],
                               "rmin": 0.9, "rmax": 1.1},
                    "samples": 32, "cap": 1000.0, "tol": 1e-6}},
        {"kind": "check", "condition": "invariance", "expect": "holds",
         "params": {"probes": probes, "tol": 1e-6}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [1, 0, 0], "budget": 300}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0, 0, 0], "budget": 100}},
        {"kind": "cloud", "metric": "max_radius_dev", "from": [1, 0, 0],
         "tmax": 1.0, "cell": 0.05, "tol": 1e-9, "expect_max": 1e-5},
        {"kind": "leafmap", "box": [[-1, -1, -1], [1, 1, 1]], "res": [3, 3, 3],
         "budget": 60, "tol": 1e-8,
         "expect_orbit": {"default": 2, "overrides": [{"node": [1, 1, 1], "value": 0}]},
         "expect_rank": {"default": 2, "overrides": [{"node": [1, 1, 1], "value": 0}]}},
    ]
    return ExampleCase(
        name="so3-spheres",
        note="rotation generators on R^3: concentric-sphere leaves plus a "
             "point leaf at the origin; analytic, bracket-closed",
        family=fam, expectations=exp_)


def _halfplane_y_case() -> ExampleCase:
    y = var(1)
    zero = const(0.0)
    h = _flat_positive(y)
    fam = Family(2, (VectorField((h, zero), name="h-dx"),))
    box = {"kind": "box", "lo": [-1, -1], "hi": [1, 1]}
    exp_ = [
        {"kind": "rank", "at": [0.3, 2], "expect": 1},
        {"kind": "rank", "at": [0.2, -1], "expect": 0},
        {"kind": "rank", "at": [0.5, 0], "expect": 0},
        {"kind": "orbit_dim", "at": [0.3, 2], "expect": 1, "budget": 150},
        {"kind": "orbit_dim", "at": [0.2, -1], "expect": 0, "budget": 60},
        {"kind": "orbit_dim", "at": [0, 0], "expect": 0, "budget": 60},
        {"kind": "check", "condition": "involutive", "expect": "holds",
         "params": {"region": box, "samples": 16}},
        {"kind": "check", "condition": "hermann", "expect": "holds",
         "params": {"region": box, "samples": 16}},
        {"kind": "check", "condition": "frobenius", "expect": "inconclusive",
         "params": {"region": box, "samples": 32}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0.3, 2], "budget": 200}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0.2, -1], "budget": 100}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0, 0], "budget": 100}},
        {"kind": "leafmap", "box": [[-1, -1], [1, 1]], "res": [5, 5],
         "budget": 40, "tol": 1e-8,
         "expect_orbit": {"by_axis": 1, "values": [0, 0, 0, 1, 1]},
         "expect_rank": {"by_axis": 1, "values": [0, 0, 0, 1, 1]}},
    ]
    return ExampleCase(
        name="halfplane-y",
        note="single flat horizontal field: horizontal leaves for y>0, "
             "point leaves elsewhere; integrable with non-constant rank",
        family=fam, expectations=exp_)


def _flag_case() -> ExampleCase:
    x = var(0)
    chi = _flat_positive(x)
    fam = Family(1, (VectorField((chi,), name="chi-dx"),))
    exp_ = [
        {"kind": "rank", "at": [1], "expect": 1},
        {"kind": "rank", "at": [-1], "expect": 0},
        {"kind": "rank", "at": [0], "expect": 0},
        {"kind": "orbit_dim", "at": [1], "expect": 1, "budget": 60},
        {"kind": "orbit_dim", "at": [-1], "expect": 0, "budget": 60},
        {"kind": "orbit_dim", "at": [0], "expect": 0, "budget": 60},
        {"kind": "cloud", "metric": "cell_count", "from": [-1], "budget": 50,
         "tmax": 1.0, "cell": 0.05, "tol": 1e-9, "expect": 1},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [1], "budget": 100}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [-1], "budget": 100}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0], "budget": 100}},
        {"kind": "leafmap", "box": [[-1], [1]], "res": [5],
         "budget": 40, "tol": 1e-8,
         "expect_orbit": {"by_axis": 0, "values": [0, 0, 0, 1, 1]},
         "expect_rank": {"by_axis": 0, "values": [0, 0, 0, 1, 1]}},
    ]
    return ExampleCase(
        name="flag-line",
        note="one flat field on the line: its span is not finitely generated "
             "as a module near 0, yet the distribution is integrable",
        family=fam, expectations=exp_)


def _halfplane_x_case() -> ExampleCase:
    x = var(0)
    zero = const(0.0)
    m = _flat_positive(x)
    fam = Family(2, (
        VectorField((const(1.0), zero), name="dx"),
        VectorField((zero, m), name="m-dy"),
    ))
    box = {"kind": "box", "lo": [-1, -1], "hi": [1, 1]}
    exp_ = [
        {"kind": "rank", "at": [1, 0], "expect": 2},
        {"kind": "rank", "at": [0, 0], "expect": 1},
        {"kind": "rank", "at": [-1, 5], "expect": 1},
        {"kind": "orbit_dim", "at": [0, 0], "expect": 2, "budget": 300},
        {"kind": "orbit_dim", "at": [0, 5], "expect": 2, "budget": 300},
        {"kind": "orbit_dim", "at": [-0.5, -0.5], "expect": 2, "budget": 300},
        {"kind": "check", "condition": "involutive", "expect": "holds",
         "params": {"region": box, "samples": 32, "cap": 1000.0}},
        {"kind": "check", "condition": "invariance", "expect": "fails",
         "params": {"probes": [{"point": [0.5, 0], "member": 0, "time": -1.0}],
                    "tol": 1e-6}},
        {"kind": "check", "condition": "frobenius", "expect": "inconclusive",
         "params": {"region": box, "samples": 32}},
        {"kind": "check", "condition": "hermann", "expect": "fails",
         "params": {"region": box, "samples": 16}},
        {"kind": "check", "condition": "integrable", "expect": "fails",
         "params": {"at": [0, 0], "budget": 300}},
        {"kind": "check", "condition": "integrable", "expect": "fails",
         "params": {"at": [1, 1], "budget": 300}},
        {"kind": "leafmap", "box": [[-1, -1], [1, 1]], "res": [5, 5],
         "budget": 40, "tol": 1e-8,
         "expect_orbit": {"default": 2},
         "expect_rank": {"by_axis": 0, "values": [1, 1, 1, 2, 2]}},
    ]
    return ExampleCase(
        name="halfplane-x-noninteg",
        note="involutive smooth distribution jumping rank 1 to 2 across the "
             "vertical axis; not integrable, and not invariant under its own "
             "generating family",
        family=fam, expectations=exp_)


def _balan_case() -> ExampleCase:
    x, y = var(0), var(1)
    zero = const(0.0)
    rho2 = x * x + y * y
    phi = piecewise([(Guard(rho2, ">"), exp(const(-1.0) / rho2))], const(0.0))
    fam = Family(2, (
        VectorField((phi, zero), name="X"),
        VectorField((zero, rho2), name="Y"),
    ))
    exp_ = [
        {"kind": "bracket", "i": 0, "j": 1, "at": [1, 0],
         "expect": [0.0, 0.7357588823428847], "tol": 1e-12},
        {"kind": "rank", "at": [0, 0], "expect": 0},
        {"kind": "rank", "at": [1, 0], "expect": 2},
        {"kind": "rank", "at": [0, 0.5], "expect": 2},
        {"kind": "orbit_dim", "at": [0, 0], "expect": 0, "budget": 60},
        {"kind": "orbit_dim", "at": [1, 0], "expect": 2, "budget": 200},
        # The exact bracket coefficient on X is -2y/(x^2+y^2); it exceeds any
        # cap below ~54 at representable points near the origin, while on the
        # 0.5..1 annulus everything fits comfortably.
        {"kind": "check", "condition": "involutive", "expect": "fails",
         "params": {"region": {"kind": "annulus", "center": [0, 0],
                               "rmin": 0.04, "rmax": 0.2},
                    "samples": 16, "cap": 25.0, "tol": 1e-6}},
        {"kind": "check", "condition": "involutive", "expect": "holds",
         "params": {"region": {"kind": "annulus", "center": [0, 0],
                               "rmin": 0.5, "rmax": 1.0},
                    "samples": 16, "cap": 25.0, "tol": 1e-6}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [0, 0], "budget": 100}},
        {"kind": "check", "condition": "integrable", "expect": "holds",
         "params": {"at": [1, 0], "budget": 200}},
    ]
    return ExampleCase(
        name="balan-pair",
        note="pair of flat-vs-polynomial fields whose bracket needs an "
             "unbounded coefficient near the origin: integrable without "
             "being involutive as a finitely generated module",
        family=fam, expectations=exp_)


def _arjen_case() -> ExampleCase:
    x, y = var(0), var(1)
    zero = const(0.0)
    rho2 = x * x + y * y
    rho = piecewise([(Guard(rho2, ">"), exp(const(-1.0) / rho2))], const(0.0))
    fam = Family(
        2, (VectorField((const(1.0), zero), name="dx"),),
        rule=Rule("arjen-bump", (0.4, 0.2, 0.1, 0.05)),
    )
    companion = Family(2, (
        VectorField((const(1.0), zero), name="dx"),
        VectorField((zero, rho), name="rho-dy"),
    ))
    exp_ = [
        {"kind": "rank", "at": [0, 0], "expect": 1},
        {"kind": "rank", "at": [0.5, 0.5], "expect": 2},
        {"kind": "rank", "at": [0.02, 0], "expect": 1},
        {"kind": "orbit_dim", "at": [0, 0], "expect": 2, "budget": 300},
        # finite-type bracket fits pass once the ball matches the sampled
        # vanishing radii: the neighborhood is per-member, as the condition
        # allows
        {"kind": "check", "condition": "lobry", "expect": "holds",
         "params": {"at": [0, 0], "radius": 0.1, "samples": 12,
                    "rule_samples": [0.4]}},
        {"kind": "check", "condition": "lobry", "expect": "holds",
         "params": {"at": [0, 0], "radius": 0.04, "samples": 12}},
        {"kind": "check", "condition": "sussmann", "expect": "holds",
         "params": {"at": [0, 0], "eps": 0.5}},
        {"kind": "check", "condition": "balan", "expect": "fails",
         "params": {"at": [0, 0], "u_radius": 0.3}},
        {"kind": "check", "condition": "integrable", "expect": "fails",
         "params": {"at": [0, 0], "budget": 300}},
        {"kind": "check", "condition": "lobry", "expect": "fails",
         "family": "companion",
         "params": {"at": [0, 0], "radius": 0.1, "samples": 16}},
        {"kind": "check", "condition": "integrable", "expect": "fails",
         "family": "companion",
         "params": {"at": [0, 0], "budget": 300}},
    ]
    return ExampleCase(
        name="arjen-module",
        note="procedural module of fields whose vertical part vanishes near "
             "the origin: locally of finite type and curve-fit friendly per "
             "member, yet the induced distribution is not integrable there",
        family=fam, expectations=exp_, companion=companion)


def _case_builders():
    return {
        "so3-spheres": _so3_case,
        "halfplane-y": _halfplane_y_case,
        "flag-line": _flag_case,
        "halfplane-x-noninteg": _halfplane_x_case,
        "balan-pair": _balan_case,
        "arjen-module": _arjen_case,
    }


def builtin_cases() -> list:
    """The six shipped cases, loaded from the packaged JSON files."""
    import importlib.resources as resources

    out = []
    for name in CASE_NAMES:
        text = (resources.files("orbitkit") / "cases" / f"{name}.json").read_text()
        out.append(ExampleCase.from_json(loads_json(text)))
    return out


def write_case_files(directory) -> list:
    """Regenerate the shipped JSON case files (development helper)."""
    import pathlib

    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in _case_builders().items():
        path = directory / f"{name}.json"
        path.write_text(dumps_json(build().to_json()) + "\n")
        written.append(path)
    return written


# -- running a case -----------------------------------------------------------------

@dataclass
class EntryResult:
    description: str
    passed: bool
    detail: str = ""


@dataclass
class CaseReport:
    name: str
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_json(self) -> dict:
        return {"case": self.name, "passed": self.passed,
                "entries": [{"description": e.description, "passed": e.passed,
                             "detail": e.detail} for e in self.entries]}


def _expected_grid(spec, res) -> np.ndarray:
    if "values" in spec:
        axis = spec["by_axis"]
        grid = np.zeros(res, dtype=int)
        for idx in np.ndindex(*res):
            grid[idx] = spec["values"][idx[axis]]
        return grid
    grid = np.full(res, int(spec.get("default", 0)), dtype=int)
    for o in spec.get("overrides", []):
        grid[tuple(o["node"])] = int(o["value"])
    return grid


def run_case(case: ExampleCase, budget: int = 2000, seed: int = 0,
             threads: int = 1) -> CaseReport:
    """Execute every expectation of the case; mismatches are report data."""
    report = CaseReport(name=case.name)
    for entry in case.expectations:
        kind = entry["kind"]
        fam = case.companion if entry.get("family") == "companion" else case.family
        tag = "companion " if entry.get("family") == "companion" else ""
        try:
            if kind == "rank":
                got = rank_at(fam, entry["at"], float(entry.get("tol", 1e-8)))
                want = int(entry["expect"])
                report.entries.append(EntryResult(
                    f"{tag}rank at {entry['at']} == {want}",
                    got == want, f"got {got}"))
            elif kind == "orbit_dim":
                got, _ = orbit_tangent_dim(
                    fam, entry["at"], budget=int(entry.get("budget", budget)),
                    tol=float(entry.get("tol", 1e-8)),
                    tmax=float(entry.get("tmax", 1.0)),
                    seed=seed + int(entry.get("seed", 0)))
                want = int(entry["expect"])
                report.entries.append(EntryResult(
                    f"{tag}orbit tangent dim at {entry['at']} == {want}",
                    got == want, f"got {got}"))
            elif kind == "bracket":
                members = fam.all_members()
                br = lie_bracket(members[entry["i"]], members[entry["j"]])
                got = br.value_at(entry["at"])
                want = np.asarray(entry["expect"], dtype=float)
                err = float(np.max(np.abs(got - want)))
                tol = float(entry.get("tol", 1e-12))
                report.entries.append(EntryResult(
                    f"{tag}bracket [{entry['i']},{entry['j']}] at {entry['at']}",
                    err <= tol, f"max err {err:.3e}"))
            elif kind == "check":
                params = dict(entry["params"])
                params.setdefault("seed", seed)
                verdict = run_check(entry["condition"], fam, params)
                want = entry["expect"]
                detail = f"got {verdict.outcome}"
                if verdict.outcome != want and "failure" in verdict.evidence:
                    detail += f" ({verdict.evidence['failure']})"
                report.entries.append(EntryResult(
                    f"{tag}check {entry['condition']} -> {want}",
                    verdict.outcome == want, detail))
            elif kind == "cloud":
                cloud = sample_orbit(
                    fam, entry["from"], budget=int(entry.get("budget", budget)),
                    tmax=float(entry.get("tmax", 1.0)),
                    seed=seed + int(entry.get("seed", 0)),
                    tol=float(entry.get("tol", 1e-9)),
                    cell=float(entry.get("cell", 0.05)), threads=threads)
                metric = entry["metric"]
                if metric == "max_radius_dev":
                    dev = max(abs(float(np.linalg.norm(p)) - 1.0)
                              for p in cloud.points)
                    ok = dev <= float(entry["expect_max"])
                    report.entries.append(EntryResult(
                        f"cloud max |radius-1| <= {entry['expect_max']}",
                        ok, f"got {dev:.3e} over {len(cloud)} points"))
                elif metric == "cell_count":
                    want = int(entry["expect"])
                    report.entries.append(EntryResult(
                        f"cloud cell count == {want}",
                        len(cloud) == want, f"got {len(cloud)}"))
                else:
                    report.entries.append(EntryResult(
                        f"cloud metric {metric}", False, "unknown metric"))
            elif kind == "leafmap":
                res = tuple(int(v) for v in entry["res"])
                orbit_grid, rank_grid = leaf_dim_map(
                    fam, entry["box"][0], entry["box"][1], res,
                    budget=int(entry.get("budget", 40)),
                    tol=float(entry.get("tol", 1e-8)),
                    seed=seed + int(entry.get("seed", 0)), threads=threads)
                ok_o = bool(np.array_equal(
                    orbit_grid, _expected_grid(entry["expect_orbit"], res)))
                ok_r = bool(np.array_equal(
                    rank_grid, _expected_grid(entry["expect_rank"], res)))
                arts = semicontinuity_artifacts(orbit_grid)
                report.entries.append(EntryResult(
                    f"leafmap {res} orbit map", ok_o and not arts,
                    f"match={ok_o}, artifacts={arts}"))
                report.entries.append(EntryResult(
                    f"leafmap {res} rank map", ok_r, f"match={ok_r}"))
                report.entries.append(EntryResult(
                    f"leafmap {res} rank <= orbit pointwise",
                    bool(np.all(rank_grid <= orbit_grid)), ""))
            else:
                report.entries.append(EntryResult(f"entry {kind}", False,
                                                  "unknown expectation kind"))
        except Exception as exc:  # a crashed entry is a failed entry
            report.entries.append(EntryResult(f"{tag}{kind} entry", False,
                                              f"error: {exc}"))
    return report


# -- leaf-dimension maps --------------------------------------------------------------

def leaf_dim_map(family: Family, lo, hi, res, budget: int = 40,
                 tol: float = 1e-8, seed: int = 0, threads: int = 1,
                 rule_samples=None):
    """Orbit-tangent dimension and pointwise rank on a regular grid.

    Returns (orbit_grid, rank_grid) as integer arrays of shape res; their
    pointwise difference localizes non-integrability.  Grid nodes landing
    on singular loci are evaluated as-is.
    """
    lo = [float(v) for v in lo]
    hi = [float(v) for v in hi]
    res = tuple(int(v) for v in res)
    if any(r < 2 for r in res):
        raise ValueError("resolution must be at least 2 per axis")
    axes = [np.linspace(lo[d], hi[d], res[d]) for d in range(len(res))]
    nodes = list(np.ndindex(*res))

    def node_point(idx):
        return np.array([axes[d][idx[d]] for d in range(len(res))])

    def work(idx):
        p = node_point(idx)
        dim, _ = orbit_tangent_dim(family, p, budget=budget, tol=tol,
                                   seed=seed, rule_samples=rule_samples)
        return dim, rank_at(family, p, tol, rule_samples)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, nodes))
    else:
        results = [work(idx) for idx in nodes]
    orbit_grid = np.zeros(res, dtype=int)
    rank_grid = np.zeros(res, dtype=int)
    for idx, (dim, rank) in zip(nodes, results):
        orbit_grid[idx] = dim
        rank_grid[idx] = rank
    return orbit_grid, rank_grid


def leafmap_to_csv(grid: np.ndarray, lo, hi) -> str:
    """Integer grid as CSV with a `# dims: ... box: ...` header.

    2D grids print axis-0 as rows; 3D grids stack (axis0, axis1) rows with
    axis2 across the columns; 1D grids are a single row.
    """
    res = grid.shape
    dims = ",".join(str(r) for r in res)
    box = ",".join(f"{float(v):g}" for pair in zip(lo, hi) for v in pair)
    lines = [f"# dims: {dims} box: {box}"]
    flat = grid.reshape(-1, res[-1]) if grid.ndim > 1 else grid.reshape(1, -1)
    for row in flat:
        lines.append(",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_leafmap_csv(text: str):
    """Inverse of leafmap_to_csv; returns (grid, lo, hi)."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    header = lines[0]
    if not header.startswith("# dims:"):
        raise ValueError("missing leafmap header")
    dims_part, box_part = header[len("# dims:"):].split("box:")
    res = tuple(int(v) for v in dims_part.strip().split(","))
    nums = [float(v) for v in box_part.strip().split(",")]
    lo = nums[0::2]
    hi = nums[1::2]
    rows = [[int(v) for v in ln.split(",")] for ln in lines[1:]]
    grid = np.array(rows, dtype=int).reshape(res)
    return grid, lo, hi


def semicontinuity_artifacts(grid: np.ndarray) -> list:
    """Nodes whose dimension strictly exceeds every neighbor's.

    Leaf dimension is lower semi-continuous, so an isolated spike can only
    be a numerical artifact; the suite treats any such node as a failure.
    """
    out = []
    for idx in np.ndindex(*grid.shape):
        best = None
        for off in np.ndindex(*(3,) * grid.ndim):
            nb = tuple(i + o - 1 for i, o in zip(idx, off))
            if nb == idx:
                continue
            if all(0 <= v < s for v, s in zip(nb, grid.shape)):
                val = grid[nb]
                best = val if best is None else max(best, val)
        if best is not None and grid[idx] > best:
            out.append(idx)
    return out
