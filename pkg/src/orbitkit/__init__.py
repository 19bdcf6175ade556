"""orbitkit: executable integrability theory for families of vector fields.

Represents families of vector fields on R^n symbolically, integrates their
flows and orbits numerically, and runs evidence-producing checkers for the
classical integrability conditions of singular distributions.
"""
from ._kernel import BACKEND_NAME
from .expr import DomainError, Guard, ScalarExpr, const, cos, exp, piecewise, powi, simplify, sin, sqrt, var
from .fields import (Family, Rule, VectorField, evaluate_family, family_from_json,
                     family_to_json, lie_bracket, lie_closure, symmetrize)
from .flows import FlowResult, Word, apply_word, flow, flow_with_jacobian
from .frames import SubspaceBasis, fit_coefficients, rank_at, span_contains

__version__ = "0.1.0"
