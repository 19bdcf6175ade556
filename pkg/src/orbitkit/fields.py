"""Vector fields, families, Lie brackets and pointwise Lie closures."""
from __future__ import annotations

import weakref
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import _kernel
from ._linalg import as_matrix, numeric_rank, span_residual
from .expr import (DomainError, const, expr_from_json, expr_to_json,
                   guard_from_json, guard_to_json, simplify)

__all__ = [
    "VectorField", "Family", "Rule", "register_rule", "rule_members",
    "lie_bracket", "evaluate_family", "FamilyValues", "lie_closure",
    "symmetrize", "family_to_json", "family_from_json",
    "field_to_json", "field_from_json",
]

_OPEN_RELS = (">", "<", "!=")


@dataclass(frozen=True)
class VectorField:
    """n smooth components over R^n, with an optional open-domain guard.

    The guard is a conjunction of strict polynomial inequalities; a field
    with a guard is only defined where every inequality holds.
    """

    components: tuple
    name: str = ""
    guards: tuple = ()

    def __post_init__(self):
        for g in self.guards:
            if g.rel not in _OPEN_RELS:
                raise ValueError(f"field guard must define an open set, got {g}")

    @property
    def dimension(self) -> int:
        return len(self.components)

    def in_domain(self, p) -> bool:
        return all(g.holds(p) for g in self.guards)

    def value_at(self, p) -> np.ndarray:
        cf = compiled(self)
        out, status, err = _kernel.eval_program(cf.prog, np.asarray(p, dtype=float))
        if status:
            raise DomainError(_STATUS_MSG[status], _label_expr(cf.prog, err))
        return np.asarray(out)

    def jacobian_at(self, p) -> np.ndarray:
        cf = compiled(self)
        out, status, err = _kernel.eval_program(cf.jac, np.asarray(p, dtype=float))
        if status:
            raise DomainError(_STATUS_MSG[status], _label_expr(cf.jac, err))
        n = self.dimension
        return np.asarray(out).reshape(n, n)

    def __neg__(self) -> "VectorField":
        return VectorField(
            components=tuple(simplify(const(0.0) - c) for c in self.components),
            name=f"-{self.name}" if self.name else "",
            guards=self.guards,
        )


_STATUS_MSG = {1: "division by zero", 2: "sqrt of negative value",
               3: "zero raised to a negative power"}


def _label_expr(prog, err_idx):
    label = prog.labels[err_idx] if 0 <= err_idx < len(prog.labels) else "?"

    class _Tag:
        def __str__(self):
            return label

    return _Tag()


_COMPILE_CACHE: "weakref.WeakKeyDictionary[VectorField, _kernel.CompiledField]" = (
    weakref.WeakKeyDictionary())


def compiled(field: VectorField) -> _kernel.CompiledField:
    cf = _COMPILE_CACHE.get(field)
    if cf is None:
        n = field.dimension
        jac = [field.components[r].partial(c) for r in range(n) for c in range(n)]
        cf = _kernel.compile_field(field.components, field.guards, jac)
        _COMPILE_CACHE[field] = cf
    return cf


@dataclass(frozen=True)
class Rule:
    """Named generator of fields from a positive real parameter.

    Stands in for an infinite module of vector fields: checkers sample the
    rule at finitely many parameters.
    """

    rule_id: str
    params: tuple


_RULES: dict = {}
_RULE_CACHE: dict = {}


def register_rule(rule_id: str, make: Callable[[float], list]):
    _RULES[rule_id] = make


def rule_members(rule: Rule, samples=None) -> list:
    out = []
    for r in (rule.params if samples is None else samples):
        key = (rule.rule_id, float(r))
        if key not in _RULE_CACHE:
            make = _RULES.get(rule.rule_id)
            if make is None:
                raise KeyError(f"unknown rule {rule.rule_id!r}")
            _RULE_CACHE[key] = list(make(float(r)))
        out.extend(_RULE_CACHE[key])
    return out


@dataclass(frozen=True)
class Family:
    """Finite ordered list of fields, optionally extended by a rule."""

    dimension: int
    members: tuple = ()
    rule: Optional[Rule] = None
    symmetric: bool = False
    negation_offset: int = 0  # set by symmetrize(): member i pairs with i+offset

    def __post_init__(self):
        for m in self.members:
            if m.dimension != self.dimension:
                raise ValueError(
                    f"member {m.name!r} has dimension {m.dimension}, family has {self.dimension}")

    def all_members(self, rule_samples=None) -> list:
        out = list(self.members)
        if self.rule is not None:
            out.extend(rule_members(self.rule, rule_samples))
        return out


@dataclass
class FamilyValues:
    """Member values at one point, in member order, skipped members reported."""

    point: np.ndarray
    vectors: list
    names: list
    skipped: list

    def matrix(self) -> np.ndarray:
        return as_matrix(self.vectors, len(self.point))


def evaluate_family(family: Family, p, rule_samples=None) -> FamilyValues:
    p = np.asarray(p, dtype=float)
    vectors, names, skipped = [], [], []
    for m in family.all_members(rule_samples):
        if not m.in_domain(p):
            skipped.append(m.name)
            continue
        vectors.append(m.value_at(p))
        names.append(m.name)
    return FamilyValues(point=p, vectors=vectors, names=names, skipped=skipped)


def lie_bracket(x: VectorField, y: VectorField) -> VectorField:
    """Commutator by the coordinate formula.

    [X,Y]^k = sum_i (X^i d_i Y^k - Y^i d_i X^k); the result is defined on
    the intersection of the two domains.
    """
    if x.dimension != y.dimension:
        raise ValueError(
            f"dimension mismatch: {x.dimension} vs {y.dimension}")
    n = x.dimension
    comps = []
    for k in range(n):
        acc = const(0.0)
        for i in range(n):
            acc = acc + x.components[i] * y.components[k].partial(i)
            acc = acc - y.components[i] * x.components[k].partial(i)
        comps.append(simplify(acc))
    name = f"[{x.name or 'X'},{y.name or 'Y'}]"
    return VectorField(components=tuple(comps), name=name,
                       guards=tuple(dict.fromkeys(x.guards + y.guards)))


def symmetrize(family: Family) -> Family:
    """Append the negation of every member and flag the family symmetric."""
    if family.symmetric:
        return family
    m = len(family.members)
    return replace(
        family,
        members=family.members + tuple(-x for x in family.members),
        symmetric=True,
        negation_offset=m,
    )


def lie_closure(family: Family, depth: int, p, tol: float = 1.0e-8):
    """Pointwise-pruned Lie closure of the explicit members.

    Adjoins iterated brackets up to the given nesting depth, keeping a new
    bracket only when its value at p enlarges the current span there.
    Returns (enlarged family, rank of the span at p).  Rule members are
    excluded: they only exist after parameter sampling.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    p = np.asarray(p, dtype=float)
    members = list(family.members)
    usable = [m for m in members if m.in_domain(p)]
    values = [m.value_at(p) for m in usable]
    mat = as_matrix(values, family.dimension)
    rank = numeric_rank(mat, tol)
    frontier = list(members)
    for _ in range(depth):
        if rank >= family.dimension:
            break
        new = []
        for a in frontier:
            for b in members:
                if a is b:
                    continue
                br = lie_bracket(a, b)
                if not br.in_domain(p):
                    continue
                v = br.value_at(p)
                scale = 1.0 + float(np.linalg.norm(v))
                if span_residual(mat, v) <= tol * scale:
                    continue
                new.append(br)
                values.append(v)
                mat = as_matrix(values, family.dimension)
        if not new:
            break
        members.extend(new)
        rank = numeric_rank(mat, tol)
        frontier = new
    out = replace(family, members=tuple(members))
    return out, rank


# -- JSON family schema ----------------------------------------------------------

def field_to_json(f: VectorField):
    guard = [guard_to_json(g) for g in f.guards]
    return {
        "name": f.name,
        "components": [expr_to_json(c) for c in f.components],
        "guard": guard if guard else None,
    }


def field_from_json(obj) -> VectorField:
    raw = obj.get("guard")
    if raw is None:
        guards = ()
    elif isinstance(raw, list):
        guards = tuple(guard_from_json(g) for g in raw)
    else:
        guards = (guard_from_json(raw),)
    return VectorField(
        components=tuple(expr_from_json(c) for c in obj["components"]),
        name=obj.get("name", ""),
        guards=guards,
    )


def family_to_json(fam: Family):
    return {
        "dimension": fam.dimension,
        "members": [field_to_json(m) for m in fam.members],
        "rule": ({"id": fam.rule.rule_id, "params": list(fam.rule.params)}
                 if fam.rule else None),
        "symmetric": fam.symmetric,
    }


def family_from_json(obj) -> Family:
    rule = None
    if obj.get("rule"):
        rule = Rule(obj["rule"]["id"], tuple(float(v) for v in obj["rule"]["params"]))
    fam = Family(
        dimension=int(obj["dimension"]),
        members=tuple(field_from_json(m) for m in obj.get("members", [])),
        rule=rule,
        symmetric=bool(obj.get("symmetric", False)),
    )
    return fam
