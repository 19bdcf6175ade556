"""Numerical flows of vector fields and their compositions.

The integrator is an embedded adaptive Runge-Kutta 4(5) pair with combined
absolute and relative error control, initial step |t|/100 and safety
factor 0.9.  A step that lands outside a field's open domain is rejected
and bisected down to the underflow limit, so locally defined fields are
never silently extended.  Trajectories escaping norm 1e8 are reported, and
a hard time cap |t| <= 1e3 guards against runaway requests.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernel
from .expr import format_float
from .fields import Family, VectorField, compiled

__all__ = ["Word", "FlowResult", "flow", "flow_with_jacobian", "apply_word",
           "TIME_CAP", "ESCAPE_NORM", "DEFAULT_TOL"]

TIME_CAP = 1.0e3
ESCAPE_NORM = 1.0e8
DEFAULT_TOL = 1.0e-8

_STATUS = {0: "ok", 1: "escaped", 2: "guard-violation", 3: "step-underflow"}


@dataclass(frozen=True)
class Word:
    """Finite composition of member flows: ((member index, time), ...).

    Applied left to right: the first step acts first.
    """

    steps: tuple = ()

    def __len__(self):
        return len(self.steps)

    def to_text(self) -> str:
        return ";".join(f"{i}:{format_float(t)}" for i, t in self.steps)

    @staticmethod
    def from_text(text: str) -> "Word":
        text = text.strip()
        if not text:
            return Word()
        steps = []
        for part in text.split(";"):
            i, t = part.split(":")
            steps.append((int(i), float(t)))
        return Word(tuple(steps))

    def appended(self, index: int, t: float) -> "Word":
        return Word(self.steps + ((index, float(t)),))

    def sort_key(self):
        return (len(self.steps), self.steps)


@dataclass
class FlowResult:
    point: np.ndarray
    jacobian: Optional[np.ndarray]
    status: str
    steps: int
    failed_step: Optional[int] = None  # word step that failed, if any
    trace: Optional[list] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _check_time(t: float):
    if not np.isfinite(t) or abs(t) > TIME_CAP:
        raise ValueError(f"flow time {t} exceeds the cap {TIME_CAP}")


def flow(field: VectorField, x0, t: float, tol: float = DEFAULT_TOL,
         trace: bool = False) -> FlowResult:
    """Approximate the time-t flow of the field from x0."""
    _check_time(t)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    y, status, nsteps, tr = _kernel.rk45(compiled(field), np.asarray(x0, dtype=float),
                                         float(t), tol, trace)
    return FlowResult(point=np.asarray(y), jacobian=None,
                      status=_STATUS[status], steps=nsteps, trace=tr)


def flow_with_jacobian(field: VectorField, x0, t: float,
                       tol: float = DEFAULT_TOL) -> FlowResult:
    """Flow plus the pushforward matrix, via the variational equation.

    Integrates dJ/ds = DX(phi_s(x0)) J jointly with the base system, with
    J(0) = I and DX assembled from exact symbolic partials.
    """
    _check_time(t)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = field.dimension
    y, jac, status, nsteps = _kernel.rk45_jac(compiled(field),
                                              np.asarray(x0, dtype=float),
                                              float(t), tol)
    return FlowResult(point=np.asarray(y),
                      jacobian=np.asarray(jac).reshape(n, n),
                      status=_STATUS[status], steps=nsteps)


def apply_word(family: Family, word: Word, x0, tol: float = DEFAULT_TOL,
               jacobian: bool = False, rule_samples=None,
               members=None) -> FlowResult:
    """Left-compose the member flows named by the word.

    The composed Jacobian, when requested, is the product of the step
    Jacobians in matching order.  An empty word is the identity.  On a step
    failure the result carries the failing step index and the last good
    point.
    """
    if members is None:
        members = family.all_members(rule_samples)
    point = np.asarray(x0, dtype=float)
    jtotal = np.eye(family.dimension) if jacobian else None
    steps_total = 0
    for k, (idx, t) in enumerate(word.steps):
        if not 0 <= idx < len(members):
            raise IndexError(f"word step {k} names member {idx}, family has {len(members)}")
        field = members[idx]
        res = (flow_with_jacobian(field, point, t, tol) if jacobian
               else flow(field, point, t, tol))
        steps_total += res.steps
        if not res.ok:
            return FlowResult(point=point, jacobian=jtotal, status=res.status,
                              steps=steps_total, failed_step=k)
        point = res.point
        if jacobian:
            jtotal = res.jacobian @ jtotal
    return FlowResult(point=point, jacobian=jtotal, status="ok",
                      steps=steps_total)
