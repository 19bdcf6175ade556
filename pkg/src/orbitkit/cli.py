"""Batch command-line front end.

Machine output goes to stdout (or --out); diagnostics go to stderr.  Exit
codes: 0 success/holds, 1 fails or expectation mismatch, 2 usage or input
error.  Identical invocations (same seed, any thread count) produce
byte-identical output files.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys

from .conditions import CONDITION_NAMES, run_check
from .corpus import builtin_cases, leaf_dim_map, leafmap_to_csv, run_case
from .expr import dumps_json, format_float
from .fields import family_from_json, field_to_json, lie_bracket
from .flows import flow, flow_with_jacobian
from .frames import rank_at
from .orbits import sample_attainable, sample_orbit

__all__ = ["main"]


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ORBITKIT_THREADS", "1")))
    except ValueError:
        return 1


def _parse_point(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise _InputError(f"bad point {text!r}: {exc}")


class _InputError(Exception):
    pass


def _load_family(path: str):
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc}")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _InputError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    try:
        return family_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise _InputError(f"{path}: bad family schema: {exc}")


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# let values like "-1,1,-1,1" pass as arguments rather than flags
_NUMBERISH = re.compile(r"^-\d[\d.,eE+-]*$")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orbitkit")
    ap._negative_number_matcher = _NUMBERISH
    ap.add_argument("--threads", type=int, default=_default_threads())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", help="symbolic Lie bracket of two members")
    p.add_argument("family")
    p.add_argument("i", type=int)
    p.add_argument("j", type=int)
    p.add_argument("--out")

    p = sub.add_parser("flow", help="integrate one member flow")
    p.add_argument("family")
    p.add_argument("index", type=int)
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--jacobian", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("orbit", help="sample an orbit cloud as CSV")
    p.add_argument("family")
    p.add_argument("--from", dest="start", required=True)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--cell", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--attainable", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("rank", help="pointwise rank of the family span")
    p.add_argument("family")
    p.add_argument("--at", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")

    p = sub.add_parser("check", help="run an integrability checker")
    p.add_argument("condition", choices=sorted(CONDITION_NAMES))
    p.add_argument("family")
    p.add_argument("--params", default="{}",
                   help="JSON object of checker parameters")
    p.add_argument("--at", help="probe point shorthand, e.g. 0,0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("leafmap", help="orbit-dimension and rank maps on a grid")
    p.add_argument("family")
    p.add_argument("--box", required=True,
                   help="per-axis lo,hi pairs, e.g. -1,1,-1,1")
    p.add_argument("--res", required=True, help="nodes per axis, e.g. 21,21")
    p.add_argument("--budget", type=int, default=40,
                   help="flow budget per grid node")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--rank-out")

    p = sub.add_parser("corpus", help="run the shipped example expectations")
    p.add_argument("--case")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    for child in sub.choices.values():
        child._negative_number_matcher = _NUMBERISH
    return ap


def _cmd_bracket(args) -> int:
    fam = _load_family(args.family)
    members = fam.all_members()
    for idx in (args.i, args.j):
        if not 0 <= idx < len(members):
            raise _InputError(f"member index {idx} out of range 0..{len(members)-1}")
    br = lie_bracket(members[args.i], members[args.j])
    _emit(dumps_json(field_to_json(br)) + "\n", args.out)
    return 0


def _cmd_flow(args) -> int:
    fam = _load_family(args.family)
    members = fam.all_members()
    if not 0 <= args.index < len(members):
        raise _InputError(f"member index {args.index} out of range")
    x0 = _parse_point(args.start)
    if args.jacobian:
        res = flow_with_jacobian(members[args.index], x0, args.t, args.tol)
    else:
        res = flow(members[args.index], x0, args.t, args.tol, trace=args.trace)
    if args.trace:
        n = len(res.point)
        lines = ["s," + ",".join(f"x{i+1}" for i in range(n))]
        for s, p in (res.trace or []):
            lines.append(",".join([format_float(s)] + [format_float(v) for v in p]))
        _emit("\n".join(lines) + "\n", args.out)
    else:
        out = {"point": [float(v) for v in res.point], "status": res.status,
               "steps": res.steps}
        if res.jacobian is not None:
            out["jacobian"] = [[float(v) for v in row] for row in res.jacobian]
        _emit(dumps_json(out) + "\n", args.out)
    if res.status != "ok":
        print(f"flow ended with status {res.status}", file=sys.stderr)
        return 1
    return 0


def _cmd_orbit(args) -> int:
    fam = _load_family(args.family)
    sampler = sample_attainable if args.attainable else sample_orbit
    cloud = sampler(fam, _parse_point(args.start), budget=args.budget,
                    tmax=args.tmax, seed=args.seed, tol=args.tol,
                    cell=args.cell, threads=args.threads)
    _emit(cloud.to_csv(), args.out)
    print(f"{len(cloud)} points, {cloud.flow_failures} flow failures",
          file=sys.stderr)
    return 0


def _cmd_rank(args) -> int:
    fam = _load_family(args.family)
    r = rank_at(fam, _parse_point(args.at), args.tol)
    _emit(f"{r}\n", args.out)
    return 0


def _cmd_check(args) -> int:
    fam = _load_family(args.family)
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise _InputError(f"--params: malformed JSON at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}")
    if not isinstance(params, dict):
        raise _InputError("--params must be a JSON object")
    if args.at is not None:
        params.setdefault("at", _parse_point(args.at))
    params.setdefault("seed", args.seed)
    try:
        verdict = run_check(args.condition, fam, params)
    except KeyError as exc:
        raise _InputError(f"missing checker parameter: {exc}")
    _emit(dumps_json(verdict.to_json()) + "\n", args.out)
    return 0 if verdict.outcome == "holds" else 1


def _cmd_leafmap(args) -> int:
    fam = _load_family(args.family)
    nums = _parse_point(args.box)
    if len(nums) != 2 * fam.dimension:
        raise _InputError(f"--box needs {2 * fam.dimension} numbers for a "
                          f"{fam.dimension}-dimensional family")
    lo = nums[0::2]
    hi = nums[1::2]
    res = [int(v) for v in args.res.split(",")]
    if len(res) == 1 and fam.dimension > 1:
        res = res * fam.dimension
    if len(res) != fam.dimension:
        raise _InputError("--res does not match the family dimension")
    orbit_grid, rank_grid = leaf_dim_map(fam, lo, hi, res, budget=args.budget,
                                         tol=args.tol, seed=args.seed,
                                         threads=args.threads)
    _emit(leafmap_to_csv(orbit_grid, lo, hi), args.out)
    if args.rank_out:
        with open(args.rank_out, "w") as fh:
            fh.write(leafmap_to_csv(rank_grid, lo, hi))
    return 0


def _cmd_corpus(args) -> int:
    cases = builtin_cases()
    if args.case:
        cases = [c for c in cases if c.name == args.case]
        if not cases:
            raise _InputError(f"unknown case {args.case!r}")
    reports = []
    for case in cases:
        rep = run_case(case, budget=args.budget, seed=args.seed,
                       threads=args.threads)
        reports.append(rep)
        for e in rep.entries:
            mark = "PASS" if e.passed else "FAIL"
            detail = f"  ({e.detail})" if e.detail and not e.passed else ""
            print(f"[{mark}] {case.name}: {e.description}{detail}",
                  file=sys.stderr)
    ok = all(r.passed for r in reports)
    _emit(dumps_json({"passed": ok,
                      "cases": [r.to_json() for r in reports]}) + "\n",
          args.out)
    return 0 if ok else 1


_COMMANDS = {
    "bracket": _cmd_bracket,
    "flow": _cmd_flow,
    "orbit": _cmd_orbit,
    "rank": _cmd_rank,
    "check": _cmd_check,
    "leafmap": _cmd_leafmap,
    "corpus": _cmd_corpus,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
