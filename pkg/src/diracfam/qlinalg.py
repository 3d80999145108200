"""Exact linear algebra over Q, plus a batched exact rank for large scans."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np


def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns ``(matrix, pivot_columns)``."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(matrix) -> int:
    matrix = np.asarray(matrix, dtype=object)
    if matrix.size == 0:
        return 0
    return len(rref(matrix.tolist())[1])


def nullspace(matrix, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of ``{v : A v = 0}`` over Q."""
    matrix = np.asarray(matrix, dtype=object)
    ncols = matrix.shape[1] if ncols is None else ncols
    if matrix.size == 0:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(matrix.tolist())
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def column_space(matrix) -> list[list[Fraction]]:
    """Basis of the column span (pivot columns of the original matrix)."""
    matrix = np.asarray(matrix, dtype=object)
    if matrix.size == 0:
        return []
    _, pivots = rref(matrix.tolist())
    return [[Fraction(x) for x in matrix[:, p]] for p in pivots]


def complement_in(sub: list[list[Fraction]], ambient: list[list[Fraction]]) -> list[list[Fraction]]:
    """Vectors of ``ambient`` extending a basis of ``span(sub)`` to ``span(sub + ambient)``."""
    chosen = list(sub)
    out = []
    current = rank(np.array(chosen, dtype=object)) if chosen else 0
    for v in ambient:
        trial = chosen + [v]
        r = rank(np.array(trial, dtype=object))
        if r > current:
            chosen, current = trial, r
            out.append(v)
    return out


# Bareiss intermediates are minors; products of two must stay exact in float64
EXACT_MINOR_BOUND = 2.0**26


def batched_rank(mats: np.ndarray) -> np.ndarray:
    """Exact ranks of a stack of integer matrices, shape ``(B, r, c)``.

    Fraction-free (Bareiss) elimination. Every intermediate entry is a minor
    of the input and every product formed is a product of two minors, so
    float64 arithmetic is exact while the Hadamard bound stays below
    ``EXACT_MINOR_BOUND``; callers certify that bound.
    """
    a = np.array(mats, dtype=np.float64)
    B, nrows, ncols = a.shape
    rk = np.zeros(B, dtype=np.int64)
    if B == 0 or nrows == 0 or ncols == 0:
        return rk
    if min(nrows, ncols) == 1:
        return a.reshape(B, -1).any(axis=1).astype(np.int64)
    ar = np.arange(B)
    used = np.zeros((B, nrows), dtype=bool)
    prev = np.ones(B)
    tmp = np.empty_like(a)
    for col in range(ncols):
        colv = a[:, :, col].copy()
        eligible = (colv != 0) & ~used
        has = eligible.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(eligible, axis=1)
        prow = a[ar, piv]
        pv = np.where(has, colv[ar, piv], 1.0)
        used[ar, piv] |= has
        active = ~used & has[:, None]
        np.multiply(a, pv[:, None, None], out=tmp)
        tmp -= colv[:, :, None] * prow[:, None, :]
        tmp /= prev[:, None, None]
        np.copyto(a, tmp, where=active[:, :, None])
        prev = np.where(has, pv, prev)
        rk += has
    return rk


def hadamard_bound(mats: np.ndarray) -> float:
    """Upper bound for any minor of any matrix in the stack."""
    mats = np.asarray(mats, dtype=float)
    cols = np.sqrt(np.sum(mats**2, axis=-2))
    cols = np.maximum(cols, 1.0)
    return float(np.max(np.prod(cols, axis=-1))) if mats.size else 1.0
