"""Symbolic scalar expressions over R^n coordinates.

Expressions are immutable trees supporting exact evaluation, exact symbolic
partial derivatives and a small constant-folding simplifier.  Piecewise
nodes carry polynomial guards (compared against zero) and a default branch
that also covers guard boundaries; branch selection short-circuits, so an
untaken branch can contain divisions that would be undefined at the point.
That is what makes flat functions like exp(-1/x) glued to 0 representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "DomainError", "Guard", "ScalarExpr", "const", "var",
    "exp", "sin", "cos", "sqrt", "powi", "piecewise",
    "simplify", "expr_to_json", "expr_from_json", "dumps_json", "loads_json",
    "guard_to_json", "guard_from_json", "flat_step", "boundary_smoothness_probe",
]

_UNARY = ("exp", "sin", "cos", "sqrt")
_BINARY = ("add", "sub", "mul", "div")
_RELS = (">", ">=", "<", "<=", "!=", "==")


class DomainError(ValueError):
    """Evaluation hit a point outside an operation's domain."""

    def __init__(self, message: str, offender: "ScalarExpr"):
        super().__init__(f"{message}: {offender}")
        self.offender = offender


def _cmp(value: float, rel: str) -> bool:
    if rel == ">":
        return value > 0.0
    if rel == ">=":
        return value >= 0.0
    if rel == "<":
        return value < 0.0
    if rel == "<=":
        return value <= 0.0
    if rel == "!=":
        return value != 0.0
    return value == 0.0


@dataclass(frozen=True)
class Guard:
    """Polynomial inequality ``poly rel 0`` over the coordinates."""

    poly: "ScalarExpr"
    rel: str

    def __post_init__(self):
        if self.rel not in _RELS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if not _is_polynomial(self.poly):
            raise ValueError(f"guard must be polynomial, got {self.poly}")

    def holds(self, p) -> bool:
        return _cmp(self.poly.eval(p), self.rel)

    def __str__(self):
        return f"{self.poly} {self.rel} 0"


Number = Union[int, float]


@dataclass(frozen=True)
class ScalarExpr:
    """One node of an expression tree.

    kind is one of: const, var, add, sub, mul, div, powi, exp, sin, cos,
    sqrt, piecewise.  Only the fields relevant to the kind are meaningful.
    """

    kind: str
    value: float = 0.0
    index: int = 0
    exponent: int = 0
    args: tuple = ()
    branches: tuple = ()  # tuple of (Guard, ScalarExpr)
    default: Optional["ScalarExpr"] = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _coerce(other) -> "ScalarExpr":
        if isinstance(other, ScalarExpr):
            return other
        if isinstance(other, (int, float)):
            return const(float(other))
        raise TypeError(f"cannot use {type(other).__name__} in an expression")

    def __add__(self, other):
        return ScalarExpr("add", args=(self, self._coerce(other)))

    def __radd__(self, other):
        return ScalarExpr("add", args=(self._coerce(other), self))

    def __sub__(self, other):
        return ScalarExpr("sub", args=(self, self._coerce(other)))

    def __rsub__(self, other):
        return ScalarExpr("sub", args=(self._coerce(other), self))

    def __mul__(self, other):
        return ScalarExpr("mul", args=(self, self._coerce(other)))

    def __rmul__(self, other):
        return ScalarExpr("mul", args=(self._coerce(other), self))

    def __truediv__(self, other):
        return ScalarExpr("div", args=(self, self._coerce(other)))

    def __rtruediv__(self, other):
        return ScalarExpr("div", args=(self._coerce(other), self))

    def __pow__(self, k):
        return powi(self, k)

    def __neg__(self):
        return ScalarExpr("sub", args=(const(0.0), self))

    # -- queries --------------------------------------------------------------

    @property
    def arity_dimension(self) -> int:
        """1 + highest variable index appearing anywhere in the tree."""
        best = 0
        for node in self._walk():
            if node.kind == "var":
                best = max(best, node.index + 1)
        return best

    def _walk(self):
        yield self
        for a in self.args:
            yield from a._walk()
        for g, b in self.branches:
            yield from g.poly._walk()
            yield from b._walk()
        if self.default is not None:
            yield from self.default._walk()

    # -- evaluation -----------------------------------------------------------

    def eval(self, p) -> float:
        k = self.kind
        if k == "const":
            return self.value
        if k == "var":
            if self.index >= len(p):
                raise DomainError(f"point of dimension {len(p)} lacks coordinate", self)
            return float(p[self.index])
        if k == "add":
            return self.args[0].eval(p) + self.args[1].eval(p)
        if k == "sub":
            return self.args[0].eval(p) - self.args[1].eval(p)
        if k == "mul":
            return self.args[0].eval(p) * self.args[1].eval(p)
        if k == "div":
            den = self.args[1].eval(p)
            if den == 0.0:
                raise DomainError("division by zero", self)
            return self.args[0].eval(p) / den
        if k == "powi":
            return _ipow(self.args[0].eval(p), self.exponent, self)
        if k == "exp":
            v = self.args[0].eval(p)
            try:
                return math.exp(v)
            except OverflowError:
                return math.inf
        if k == "sin":
            return math.sin(self.args[0].eval(p))
        if k == "cos":
            return math.cos(self.args[0].eval(p))
        if k == "sqrt":
            v = self.args[0].eval(p)
            if v < 0.0:
                raise DomainError("sqrt of negative value", self)
            return math.sqrt(v)
        # piecewise: first satisfied guard wins, else the default branch
        for g, b in self.branches:
            if g.holds(p):
                return b.eval(p)
        return self.default.eval(p)

    # -- differentiation ------------------------------------------------------

    def partial(self, i: int) -> "ScalarExpr":
        """Exact symbolic partial derivative with respect to coordinate i."""
        k = self.kind
        if k == "const":
            return const(0.0)
        if k == "var":
            return const(1.0 if self.index == i else 0.0)
        if k == "add":
            return simplify(self.args[0].partial(i) + self.args[1].partial(i))
        if k == "sub":
            return simplify(self.args[0].partial(i) - self.args[1].partial(i))
        if k == "mul":
            a, b = self.args
            return simplify(a.partial(i) * b + a * b.partial(i))
        if k == "div":
            a, b = self.args
            return simplify((a.partial(i) * b - a * b.partial(i)) / powi(b, 2))
        if k == "powi":
            a = self.args[0]
            n = self.exponent
            if n == 0:
                return const(0.0)
            return simplify(const(float(n)) * powi(a, n - 1) * a.partial(i))
        if k == "exp":
            return simplify(self.args[0].partial(i) * self)
        if k == "sin":
            return simplify(self.args[0].partial(i) * cos(self.args[0]))
        if k == "cos":
            return simplify(const(0.0) - self.args[0].partial(i) * sin(self.args[0]))
        if k == "sqrt":
            return simplify(self.args[0].partial(i) / (const(2.0) * self))
        # piecewise: differentiate branchwise, guards untouched
        return ScalarExpr(
            "piecewise",
            branches=tuple((g, b.partial(i)) for g, b in self.branches),
            default=self.default.partial(i),
        )

    # -- display --------------------------------------------------------------

    def __str__(self):
        k = self.kind
        if k == "const":
            return repr(self.value) if self.value != int(self.value) else str(int(self.value))
        if k == "var":
            return f"x{self.index}"
        if k in _BINARY:
            sym = {"add": "+", "sub": "-", "mul": "*", "div": "/"}[k]
            return f"({self.args[0]} {sym} {self.args[1]})"
        if k == "powi":
            return f"{self.args[0]}^{self.exponent}"
        if k in _UNARY:
            return f"{k}({self.args[0]})"
        parts = "; ".join(f"{g}: {b}" for g, b in self.branches)
        return f"pw[{parts}; else {self.default}]"


def _ipow(base: float, n: int, node: ScalarExpr) -> float:
    """Integer power by repeated multiplication, x^0 == 1 by convention."""
    if n < 0:
        if base == 0.0:
            raise DomainError("zero raised to a negative power", node)
        return 1.0 / _ipow(base, -n, node)
    out = 1.0
    for _ in range(n):
        out = out * base
    return out


def const(v: Number) -> ScalarExpr:
    return ScalarExpr("const", value=float(v))


def var(i: int) -> ScalarExpr:
    if i < 0:
        raise ValueError("variable index must be nonnegative")
    return ScalarExpr("var", index=i)


def exp(a) -> ScalarExpr:
    return ScalarExpr("exp", args=(ScalarExpr._coerce(a),))


def sin(a) -> ScalarExpr:
    return ScalarExpr("sin", args=(ScalarExpr._coerce(a),))


def cos(a) -> ScalarExpr:
    return ScalarExpr("cos", args=(ScalarExpr._coerce(a),))


def sqrt(a) -> ScalarExpr:
    return ScalarExpr("sqrt", args=(ScalarExpr._coerce(a),))


def powi(a, k: int) -> ScalarExpr:
    if not isinstance(k, int):
        raise TypeError("powi exponent must be an integer")
    return ScalarExpr("powi", exponent=k, args=(ScalarExpr._coerce(a),))


def piecewise(branches, default) -> ScalarExpr:
    bs = []
    for g, b in branches:
        if not isinstance(g, Guard):
            raise TypeError("piecewise guard must be a Guard")
        bs.append((g, ScalarExpr._coerce(b)))
    return ScalarExpr("piecewise", branches=tuple(bs),
                      default=ScalarExpr._coerce(default))


def _is_polynomial(e: ScalarExpr) -> bool:
    if e.kind in ("const", "var"):
        return True
    if e.kind in ("add", "sub", "mul"):
        return all(_is_polynomial(a) for a in e.args)
    if e.kind == "powi":
        return e.exponent >= 0 and _is_polynomial(e.args[0])
    return False


# -- simplification ------------------------------------------------------------

def _is_const(e: ScalarExpr, v=None) -> bool:
    return e.kind == "const" and (v is None or e.value == v)


def simplify(e: ScalarExpr) -> ScalarExpr:
    """Constant folding plus identity/absorption rules; idempotent."""
    k = e.kind
    if k in ("const", "var"):
        return e
    if k == "piecewise":
        return ScalarExpr(
            "piecewise",
            branches=tuple((Guard(simplify(g.poly), g.rel), simplify(b))
                           for g, b in e.branches),
            default=simplify(e.default),
        )
    args = tuple(simplify(a) for a in e.args)
    if all(a.kind == "const" for a in args):
        try:
            folded = ScalarExpr(k, exponent=e.exponent, args=args).eval(())
        except DomainError:
            folded = None
        if folded is not None and math.isfinite(folded):
            return const(folded)
    if k == "add":
        a, b = args
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
    elif k == "sub":
        a, b = args
        if _is_const(b, 0.0):
            return a
        if a == b:
            return const(0.0)
    elif k == "mul":
        a, b = args
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return const(0.0)
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
    elif k == "div":
        a, b = args
        if _is_const(b, 1.0):
            return a
    elif k == "powi":
        if e.exponent == 0:
            return const(1.0)
        if e.exponent == 1:
            return args[0]
    return ScalarExpr(k, exponent=e.exponent, args=args)


# -- JSON encoding ---------------------------------------------------------------
#
# Nested {"op": ..., "args": [...]} objects.  Floats are written with 17
# significant digits so the decimal text round-trips bit-exactly.

def expr_to_json(e: ScalarExpr):
    k = e.kind
    if k == "const":
        return {"op": "const", "value": e.value}
    if k == "var":
        return {"op": "var", "index": e.index}
    if k == "powi":
        return {"op": "powi", "exponent": e.exponent,
                "args": [expr_to_json(e.args[0])]}
    if k == "piecewise":
        return {
            "op": "piecewise",
            "branches": [{"guard": guard_to_json(g), "expr": expr_to_json(b)}
                         for g, b in e.branches],
            "default": expr_to_json(e.default),
        }
    return {"op": k, "args": [expr_to_json(a) for a in e.args]}


def guard_to_json(g: Guard):
    return {"rel": g.rel, "poly": expr_to_json(g.poly)}


def expr_from_json(obj) -> ScalarExpr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise ValueError(f"not an expression object: {obj!r}")
    op = obj["op"]
    if op == "const":
        return const(float(obj["value"]))
    if op == "var":
        return var(int(obj["index"]))
    if op == "powi":
        return powi(expr_from_json(obj["args"][0]), int(obj["exponent"]))
    if op == "piecewise":
        branches = [(guard_from_json(b["guard"]), expr_from_json(b["expr"]))
                    for b in obj["branches"]]
        return piecewise(branches, expr_from_json(obj["default"]))
    if op in _BINARY:
        a, b = (expr_from_json(a) for a in obj["args"])
        return ScalarExpr(op, args=(a, b))
    if op in _UNARY:
        return ScalarExpr(op, args=(expr_from_json(obj["args"][0]),))
    raise ValueError(f"unknown expression op {op!r}")


def guard_from_json(obj) -> Guard:
    return Guard(expr_from_json(obj["poly"]), obj["rel"])


def _write_json(obj, out):
    """Minimal JSON writer; floats rendered as %.17g for exact round-trip."""
    if isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(f'"{key}":')
            _write_json(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
            _write_json(val, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        import json as _json
        out.append(_json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def format_float(v: float) -> str:
    if math.isinf(v):
        return "1e999" if v > 0 else "-1e999"
    if math.isnan(v):
        raise ValueError("cannot serialize NaN")
    return format(v, ".17g")


def dumps_json(obj) -> str:
    out = []
    _write_json(obj, out)
    return "".join(out)


def loads_json(text: str):
    import json as _json
    return _json.loads(text)


# -- numerical probes --------------------------------------------------------------

_FWD_STENCILS = {
    1: (-1.0, 1.0),
    2: (1.0, -2.0, 1.0),
    3: (-1.0, 3.0, -3.0, 1.0),
    4: (1.0, -4.0, 6.0, -4.0, 1.0),
}


def _one_sided(e: ScalarExpr, p, axis: int, order: int, h: float) -> float:
    acc = 0.0
    for j, w in enumerate(_FWD_STENCILS[order]):
        q = list(p)
        q[axis] += j * h
        acc += w * e.eval(q)
    return acc / h ** order


def boundary_smoothness_probe(e: ScalarExpr, p, axis: int,
                              h: float = 1.0e-3, max_order: int = 4) -> float:
    """Largest forward/backward discrepancy of derivative estimates at p.

    Piecewise gluings are trusted metadata from the case author; this probe
    backs the trust numerically: one-sided finite differences of orders up
    to max_order from both sides of the point must agree (a smooth gluing
    of flat functions keeps the discrepancy well under 1e-6).
    """
    worst = 0.0
    for order in range(1, max_order + 1):
        fwd = _one_sided(e, p, axis, order, h)
        bwd = _one_sided(e, p, axis, order, -h)
        worst = max(worst, abs(fwd - bwd))
    return worst


# -- stock flat functions --------------------------------------------------------

def flat_step(u: ScalarExpr) -> ScalarExpr:
    """Smooth 0-to-1 step in the scalar expression u.

    Equals 0 for u <= 0 and 1 for u >= 1; all derivatives vanish at both
    ends.  Built as s(u) = a(u) / (a(u) + a(1-u)) with a(t) = exp(-1/t)
    glued flat to zero.
    """
    a_u = piecewise([(Guard(u, ">"), exp(const(-1.0) / u))], const(0.0))
    one_minus = const(1.0) - u
    a_c = piecewise([(Guard(one_minus, ">"), exp(const(-1.0) / one_minus))],
                    const(0.0))
    return a_u / (a_u + a_c)
