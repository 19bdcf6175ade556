"""Tangent-space linear algebra: ranks, span membership, coefficient fits.

These are the numeric stand-ins for statements like "smooth functions
f_ij exist with [X, X_i] = sum_j f_ij X_j": a fit either passes with
bounded coefficients, blows past the coefficient cap, or fails to reduce
the residual.  Columns are normalized before every solve (see _linalg),
so directions carried by flat-but-nonzero generators stay visible.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._linalg import as_matrix, numeric_rank, solve_in_span
from .fields import Family, evaluate_family

__all__ = ["SubspaceBasis", "rank_at", "span_contains", "fit_coefficients",
           "FitReport", "DEFAULT_RANK_TOL", "DEFAULT_CAP"]

DEFAULT_RANK_TOL = 1.0e-8
DEFAULT_CAP = 1.0e3


@dataclass
class SubspaceBasis:
    """A base point with spanning tangent vectors and a rank tolerance."""

    point: np.ndarray
    vectors: list
    tol: float = DEFAULT_RANK_TOL
    _rank: Optional[int] = field(default=None, repr=False)

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float)
        self.vectors = [np.asarray(v, dtype=float) for v in self.vectors]
        for v in self.vectors:
            if v.shape != self.point.shape:
                raise ValueError("basis vector dimension differs from base point")

    def matrix(self) -> np.ndarray:
        return as_matrix(self.vectors, len(self.point))

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._rank = numeric_rank(self.matrix(), self.tol)
        return self._rank

    def add(self, v) -> None:
        self.vectors.append(np.asarray(v, dtype=float))
        self._rank = None


def rank_at(family: Family, p, tol: float = DEFAULT_RANK_TOL,
            rule_samples=None) -> int:
    """Numerical rank of the family's pointwise span at p."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    vals = evaluate_family(family, p, rule_samples)
    return numeric_rank(vals.matrix(), tol)


def span_contains(basis: SubspaceBasis, v, tol: Optional[float] = None):
    """Whether v lies in the basis span, up to tol * (1 + |v|).

    Returns (contained, residual norm).
    """
    v = np.asarray(v, dtype=float)
    if v.shape != basis.point.shape:
        raise ValueError("vector dimension differs from basis point")
    if tol is None:
        tol = basis.tol
    _, resid = solve_in_span(basis.matrix(), v)
    return resid <= tol * (1.0 + float(np.linalg.norm(v))), resid


@dataclass
class FitReport:
    """Outcome of fitting targets against generator values, point by point."""

    outcome: str                 # fit | coefficient-blowup | residual-failure
    points: list                 # per-point dicts: point, coeffs, residual
    max_residual: float
    max_coefficient: float
    witness: Optional[np.ndarray]   # point realizing the deciding quantity
    generator_names: list

    @property
    def passed(self) -> bool:
        return self.outcome == "fit"


def fit_coefficients(targets, generators: Family, cap: float = DEFAULT_CAP,
                     tol: float = 1.0e-7, rule_samples=None) -> FitReport:
    """Fit each (point, vector) target against the generator values there.

    Minimum-norm least squares per point.  `fit` means every residual is at
    most tol * (1 + |target|) and every coefficient magnitude is at most
    cap; residual failures dominate coefficient blowups in the outcome.
    """
    if not targets:
        raise ValueError("fit_coefficients needs at least one target")
    if cap <= 0.0:
        raise ValueError("cap must be positive")
    rows = []
    names = None
    max_resid = 0.0
    max_coeff = 0.0
    resid_witness = None
    coeff_witness = None
    residual_failed = False
    for p, target in targets:
        p = np.asarray(p, dtype=float)
        target = np.asarray(target, dtype=float)
        vals = evaluate_family(generators, p, rule_samples)
        if names is None:
            names = vals.names
        coeffs, resid = solve_in_span(vals.matrix(), target)
        limit = tol * (1.0 + float(np.linalg.norm(target)))
        cmax = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
        rows.append({"point": p, "coeffs": coeffs, "residual": resid,
                     "residual_limit": limit})
        if resid > max_resid:
            max_resid = resid
        if resid > limit:
            residual_failed = True
            if resid_witness is None or resid > resid_witness[1]:
                resid_witness = (p, resid)
        if cmax > max_coeff:
            max_coeff = cmax
            coeff_witness = p
    if residual_failed:
        outcome = "residual-failure"
        witness = resid_witness[0]
    elif max_coeff > cap:
        outcome = "coefficient-blowup"
        witness = coeff_witness
    else:
        outcome = "fit"
        witness = coeff_witness if coeff_witness is not None else rows[0]["point"]
    return FitReport(outcome=outcome, points=rows, max_residual=max_resid,
                     max_coefficient=max_coeff, witness=witness,
                     generator_names=names or [])
