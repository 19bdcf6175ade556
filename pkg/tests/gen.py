"""Seeded random generators shared across the test modules."""
import random

import numpy as np

from orbitkit.expr import ScalarExpr, const, cos, exp, powi, sin, sqrt, var
from orbitkit.fields import VectorField


def random_expr(rng: random.Random, dim: int, depth: int = 3) -> ScalarExpr:
    """A smooth expression that is safe to evaluate and differentiate on
    [-1.5, 1.5]^dim: denominators and sqrt arguments are kept >= 1."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return const(round(rng.uniform(-2.0, 2.0), 3))
        return var(rng.randrange(dim))
    op = rng.choice(["add", "sub", "mul", "div", "powi", "exp", "sin", "cos",
                     "sqrt"])
    a = random_expr(rng, dim, depth - 1)
    if op in ("add", "sub", "mul"):
        b = random_expr(rng, dim, depth - 1)
        return ScalarExpr(op, args=(a, b))
    if op == "div":
        b = random_expr(rng, dim, depth - 1)
        return a / (powi(b, 2) + 1.0)
    if op == "powi":
        return powi(a, rng.choice([2, 3]))
    if op == "exp":
        return exp(const(0.3) * a)
    if op == "sin":
        return sin(a)
    if op == "cos":
        return cos(a)
    return sqrt(powi(a, 2) + 1.0)


def random_point(rng: random.Random, dim: int, scale: float = 1.5):
    return np.array([rng.uniform(-scale, scale) for _ in range(dim)])


def random_poly(rng: random.Random, dim: int, degree: int = 3) -> ScalarExpr:
    """Random polynomial with a handful of monomials of total degree <= degree."""
    acc = const(round(rng.uniform(-1.0, 1.0), 3))
    for _ in range(rng.randrange(2, 5)):
        term = const(round(rng.uniform(-1.0, 1.0), 3))
        for _ in range(rng.randrange(1, degree + 1)):
            term = term * var(rng.randrange(dim))
        acc = acc + term
    return acc


def random_poly_field(rng: random.Random, dim: int, degree: int = 3) -> VectorField:
    return VectorField(tuple(random_poly(rng, dim, degree) for _ in range(dim)),
                       name=f"P{rng.randrange(10**6)}")


def random_smooth_field(rng: random.Random, dim: int) -> VectorField:
    return VectorField(tuple(random_expr(rng, dim, 2) for _ in range(dim)),
                       name=f"S{rng.randrange(10**6)}")


def central_diff(f, p, i: int, h: float) -> float:
    up = np.array(p, dtype=float)
    dn = np.array(p, dtype=float)
    up[i] += h
    dn[i] -= h
    return (f(up) - f(dn)) / (2.0 * h)
