"""Orbit sampling, attainable sets, and the saturated tangent dimension.

Orbit clouds grow by breadth-first frontier expansion with a spatial-hash
dedup; all randomness is drawn from one seeded generator in the main
thread, and candidate commits are sorted by (word length, word) before
insertion, so multi-threaded runs reproduce the single-threaded cloud
bit for bit.
"""
from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._linalg import numeric_rank, span_residual
from .expr import format_float
from .fields import Family, evaluate_family
from .flows import DEFAULT_TOL, Word, apply_word, flow, flow_with_jacobian
from .frames import DEFAULT_RANK_TOL, SubspaceBasis

__all__ = ["OrbitCloud", "sample_orbit", "sample_attainable",
           "orbit_tangent_dim", "saturate"]

DEFAULT_CELL = 0.05
SPAN_ADD_TOL = 1.0e-5   # transported vectors carry integration error ~ flow tol


@dataclass
class OrbitCloud:
    """Deduplicated sample of an orbit: points with the words reaching them."""

    base: np.ndarray
    points: list = field(default_factory=list)
    words: list = field(default_factory=list)
    cell: float = DEFAULT_CELL
    seed: int = 0
    budget_spent: int = 0
    flow_failures: int = 0
    cells: set = field(default_factory=set)

    def __len__(self):
        return len(self.points)

    def cell_of(self, p) -> tuple:
        return tuple(math.floor(float(v) / self.cell) for v in p)

    def try_add(self, p, word: Word) -> bool:
        key = self.cell_of(p)
        if key in self.cells:
            return False
        self.cells.add(key)
        self.points.append(np.asarray(p, dtype=float))
        self.words.append(word)
        return True

    def to_csv(self) -> str:
        n = len(self.base)
        lines = [",".join([f"x{i+1}" for i in range(n)] + ["word"])]
        for p, w in zip(self.points, self.words):
            lines.append(",".join([format_float(float(v)) for v in p] + [w.to_text()]))
        return "\n".join(lines) + "\n"


def _sample(family: Family, x0, budget: int, tmax: float, seed: int,
            tol: float, cell: float, signed: bool, threads: int,
            rule_samples) -> OrbitCloud:
    if budget <= 0:
        raise ValueError("budget must be positive")
    if tmax <= 0.0:
        raise ValueError("tmax must be positive")
    members = family.all_members(rule_samples)
    cloud = OrbitCloud(base=np.asarray(x0, dtype=float), cell=cell, seed=seed)
    cloud.try_add(cloud.base, Word())
    if not members:
        return cloud
    rng = random.Random(seed)
    off = family.negation_offset
    nexp = 2 * off  # members paired with their negations by symmetrize()
    cursor = 0
    left = budget
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while left > 0:
            size = min(left, max(1, len(cloud.points)))
            cands = []
            for _ in range(size):
                src = cursor % len(cloud.points)
                cursor += 1
                k = rng.randrange(len(members))
                u = rng.uniform(-tmax, tmax)
                if signed:
                    cands.append((src, k, u))
                else:
                    # same draw, folded onto nonnegative time; symmetric
                    # families swap in the paired negation so the sampled
                    # trajectory is identical to the signed run's
                    if u >= 0.0:
                        cands.append((src, k, u))
                    elif family.symmetric and k < nexp:
                        cands.append((src, (k + off) % nexp, -u))
                    else:
                        cands.append((src, k, -u))
            left -= size

            def run(c):
                src, k, t = c
                return flow(members[k], cloud.points[src], t, tol)

            results = list(pool.map(run, cands)) if pool else [run(c) for c in cands]
            staged = []
            for (src, k, t), res in zip(cands, results):
                if not res.ok:
                    cloud.flow_failures += 1
                    continue
                staged.append((cloud.words[src].appended(k, t), res.point))
            # Commit order must not depend on thread completion order, and a
            # symmetric family must yield the same cloud whether a step is
            # recorded as (X, -t) or (-X, t); sorting on the endpoint bits
            # (word as tiebreaker) gives both.
            staged.sort(key=lambda item: (len(item[0]), item[1].tobytes(),
                                          item[0].steps))
            for word, point in staged:
                cloud.try_add(point, word)
    finally:
        if pool:
            pool.shutdown()
    cloud.budget_spent = budget - left
    return cloud


def sample_orbit(family: Family, x0, budget: int, tmax: float = 1.0,
                 seed: int = 0, tol: float = DEFAULT_TOL,
                 cell: float = DEFAULT_CELL, threads: int = 1,
                 rule_samples=None) -> OrbitCloud:
    """Sample the orbit of x0 (times of both signs)."""
    return _sample(family, x0, budget, tmax, seed, tol, cell, True, threads,
                   rule_samples)


def sample_attainable(family: Family, x0, budget: int, tmax: float = 1.0,
                      seed: int = 0, tol: float = DEFAULT_TOL,
                      cell: float = DEFAULT_CELL, threads: int = 1,
                      rule_samples=None) -> OrbitCloud:
    """Sample the attainable set of x0 (nonnegative times only)."""
    return _sample(family, x0, budget, tmax, seed, tol, cell, False, threads,
                   rule_samples)


@dataclass
class SaturationResult:
    dim: int
    basis: SubspaceBasis
    stable: bool
    samples: list          # (endpoint, word, word Jacobian) triples
    budget_spent: int
    flow_failures: int


def saturate(family: Family, x0, budget: int, tol: float = DEFAULT_RANK_TOL,
             tmax: float = 1.0, seed: int = 0, flow_tol: float = 1.0e-9,
             rule_samples=None, words_per_sweep: int = 8,
             max_word_len: int = 4, keep_samples: int = 64) -> SaturationResult:
    """Grow the pointwise span of the family at x0 into the orbit tangent.

    Transports member values from sampled orbit points back to x0 through
    the inverse word Jacobians, adjoining anything that enlarges the span;
    stops when a full sweep adds nothing or the span is all of R^n.  All
    rank decisions happen in the single tangent space at x0.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    x0 = np.asarray(x0, dtype=float)
    n = family.dimension
    members = family.all_members(rule_samples)
    vals = evaluate_family(family, x0, rule_samples)
    mat = vals.matrix()
    base_rank = numeric_rank(mat, tol)
    basis: list = []
    if base_rank > 0:
        u, s, _ = np.linalg.svd(mat, full_matrices=False)
        basis = [u[:, i] * s[i] for i in range(base_rank)]

    rng = random.Random(seed)
    samples: list = []
    state = {"left": budget, "failures": 0}

    def harvest(point, word, jac) -> bool:
        """Pull member values at an orbit point back to x0; grow the basis."""
        if len(samples) < keep_samples:
            samples.append((point, word, jac))
        if len(basis) >= n:
            return False
        try:
            inv = np.linalg.inv(jac)
        except np.linalg.LinAlgError:
            state["failures"] += 1
            return False
        grew = False
        here = evaluate_family(family, point, rule_samples)
        for v in here.vectors:
            w = inv @ v
            scale = 1.0 + float(np.linalg.norm(w))
            mat_now = np.column_stack(basis) if basis else np.zeros((n, 0))
            if span_residual(mat_now, w) > SPAN_ADD_TOL * scale:
                basis.append(w)
                grew = True
                if len(basis) >= n:
                    break
        return grew

    # Deterministic probe phase: push far along each single member in both
    # time directions, harvesting at every multiple of tmax.  Flat families
    # need this reach (pure chance rarely accumulates enough signed time),
    # and the collected samples feed the invariance checks downstream even
    # when the span is already full at x0.
    for i, member in enumerate(members):
        for sign in (1.0, -1.0):
            point = x0
            jac = np.eye(n)
            word = Word()
            for _ in range(max_word_len):
                if state["left"] <= 0:
                    break
                state["left"] -= 1
                res = flow_with_jacobian(member, point, sign * tmax, flow_tol)
                if not res.ok:
                    state["failures"] += 1
                    break
                point = res.point
                jac = res.jacobian @ jac
                word = word.appended(i, sign * tmax)
                harvest(point, word, jac)

    # Random sweeps until a full sweep adds nothing or the span is all of R^n.
    stable = len(basis) >= n or not members
    wcount = 0
    while not stable and state["left"] > 0:
        added = False
        ran_full_sweep = True
        for _ in range(words_per_sweep):
            length = 1 + wcount % max_word_len
            wcount += 1
            if state["left"] < length:
                ran_full_sweep = False
                break
            steps = tuple((rng.randrange(len(members)), rng.uniform(-tmax, tmax))
                          for _ in range(length))
            word = Word(steps)
            state["left"] -= length
            res = apply_word(family, word, x0, flow_tol, jacobian=True,
                             members=members)
            if not res.ok:
                state["failures"] += 1
                continue
            if harvest(res.point, word, res.jacobian):
                added = True
            if len(basis) >= n:
                break
        if len(basis) >= n:
            stable = True
        elif ran_full_sweep and not added:
            stable = True
    left = state["left"]
    failures = state["failures"]
    return SaturationResult(
        dim=len(basis),
        basis=SubspaceBasis(point=x0, vectors=list(basis), tol=tol),
        stable=stable,
        samples=samples,
        budget_spent=budget - left,
        flow_failures=failures,
    )


def orbit_tangent_dim(family: Family, x0, budget: int = 400,
                      tol: float = DEFAULT_RANK_TOL, tmax: float = 1.0,
                      seed: int = 0, rule_samples=None):
    """Dimension of the smallest family-invariant span containing the
    family's values at x0, with the basis that realizes it."""
    sat = saturate(family, x0, budget, tol, tmax, seed,
                   rule_samples=rule_samples)
    return sat.dim, sat.basis
