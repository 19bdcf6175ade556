"""Column-normalized least-squares helpers shared by frames/fields/orbits.

Every subspace and coefficient computation here normalizes generator
columns to unit length before the solve and maps coefficients back to the
original scale afterwards.  Flat functions (exp(-1/x) style) produce
generator values spanning hundreds of orders of magnitude; without the
normalization a plain SVD cutoff silently discards directions that are
tiny-but-structurally-present, which is exactly what these tests must not
do.  Zero columns are kept out of the solve and get coefficient zero.
"""
from __future__ import annotations

import numpy as np

ABS_FLOOR = 1.0e-12


def as_matrix(vectors, dim: int) -> np.ndarray:
    """Stack vectors as columns; empty input gives an (dim, 0) matrix."""
    if len(vectors) == 0:
        return np.zeros((dim, 0))
    return np.column_stack([np.asarray(v, dtype=float) for v in vectors])


def numeric_rank(mat: np.ndarray, tol: float) -> int:
    """Count singular values above max(tol * largest, absolute floor)."""
    if mat.size == 0:
        return 0
    svals = np.linalg.svd(mat, compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    cut = max(tol * svals[0], ABS_FLOOR)
    return int(np.sum(svals > cut))


def _normalized(mat: np.ndarray):
    norms = np.linalg.norm(mat, axis=0)
    keep = norms > 0.0
    return mat[:, keep] / norms[keep], norms, keep


def solve_in_span(mat: np.ndarray, v: np.ndarray):
    """Minimum-norm least squares of v against the columns of mat.

    Returns (coefficients in original column scale, residual norm).
    """
    v = np.asarray(v, dtype=float)
    coeffs = np.zeros(mat.shape[1] if mat.ndim == 2 else 0)
    if mat.size == 0:
        return coeffs, float(np.linalg.norm(v))
    nmat, norms, keep = _normalized(mat)
    if nmat.shape[1] == 0:
        return coeffs, float(np.linalg.norm(v))
    d, _, _, _ = np.linalg.lstsq(nmat, v, rcond=ABS_FLOOR)
    resid = float(np.linalg.norm(nmat @ d - v))
    coeffs[keep] = d / norms[keep]
    return coeffs, resid


def span_residual(mat: np.ndarray, v: np.ndarray) -> float:
    """Distance from v to the column span of mat (normalized columns)."""
    _, resid = solve_in_span(mat, v)
    return resid


def greedy_span_indices(vectors, target_rank: int, dim: int) -> list:
    """Greedy column selection maximizing span growth.

    Picks the vector of largest norm first, then repeatedly the vector with
    the largest residual against the chosen span; ties break on the lowest
    index.  Stops once target_rank columns are chosen or nothing enlarges
    the span.
    """
    chosen: list[int] = []
    if not vectors:
        return chosen
    mat = as_matrix([], dim)
    while len(chosen) < target_rank:
        best, best_res = -1, ABS_FLOOR
        for i, v in enumerate(vectors):
            if i in chosen:
                continue
            res = span_residual(mat, v) if chosen else float(np.linalg.norm(v))
            if res > best_res + 0.0:
                best, best_res = i, res
        if best < 0:
            break
        chosen.append(best)
        mat = as_matrix([vectors[i] for i in chosen], dim)
    return chosen
