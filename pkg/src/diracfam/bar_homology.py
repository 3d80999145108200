"""Twisted de Rham model of bar monopole Floer homology.

The complex is ``Lambda*(Q^b) (x) Q[U, U^-1]`` on translation-invariant forms
of the torus, where ``d = 0`` and the differential is ``x -> (zeta ^ x) U^-1``.
An element ``w (x) U^m`` has degree ``deg w + 2m`` (U has degree +2), so the
cohomology is 2-periodic and one period is described by its even and odd
ranks. Absolute gradings are only defined up to an overall shift.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

import numpy as np

from diracfam import qlinalg

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class CupForm:
    """Integral alternating 3-form on Z^b; keys are 1-based ``i < j < k``."""

    b: int
    coefficients: Mapping[Triple, int] = field(default_factory=dict)

    def __init__(self, b: int, coefficients: Mapping | None = None):
        if b < 0:
            raise ValueError("first Betti number must be nonnegative")
        clean: dict[Triple, int] = {}
        for key, v in dict(coefficients or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != 3 or not (1 <= key[0] < key[1] < key[2] <= b):
                raise ValueError(f"cup index {key} must satisfy 1 <= i < j < k <= {b}")
            if int(v) != v:
                raise ValueError("cup coefficients must be integers")
            if v:
                clean[key] = int(v)
        object.__setattr__(self, "b", int(b))
        object.__setattr__(self, "coefficients", dict(sorted(clean.items())))

    @classmethod
    def parse(cls, b: int, text: str) -> "CupForm":
        """Parse ``"1,2,3:1; 4,5,6:1"``."""
        coeffs: dict[Triple, int] = {}
        for part in filter(None, (p.strip() for p in text.split(";"))):
            idx, _, val = part.partition(":")
            key = tuple(int(i) for i in idx.split(","))
            if len(key) != 3:
                raise ValueError(f"bad cup term {part!r}")
            sign, key = _sort_sign(key)
            coeffs[key] = coeffs.get(key, 0) + sign * int(val or 1)
        return cls(b, coeffs)

    def as_vector(self) -> np.ndarray:
        return np.array([self.coefficients.get(t, 0) for t in basis(self.b, 3)], dtype=np.int64)

    @classmethod
    def from_vector(cls, b: int, vec) -> "CupForm":
        return cls(b, {t: int(v) for t, v in zip(basis(b, 3), vec)})

    def scaled(self, factor: int) -> "CupForm":
        return CupForm(self.b, {k: v * factor for k, v in self.coefficients.items()})

    def transformed(self, g) -> "CupForm":
        """Pushforward by an integral basis change ``g`` (image of e_j is column j)."""
        g = np.asarray(g, dtype=object)
        acc: dict[Triple, int] = {}
        for (i, j, k), v in self.coefficients.items():
            for t in basis(self.b, 3):
                minor = _minor3(g, t, (i, j, k))
                if minor:
                    acc[t] = acc.get(t, 0) + v * minor
        return CupForm(self.b, acc)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __str__(self) -> str:
        return "; ".join(f"{i},{j},{k}:{v}" for (i, j, k), v in self.coefficients.items()) or "0"


def _minor3(g, rows: Triple, cols: Triple) -> int:
    m = [[g[r - 1][c - 1] for c in cols] for r in rows]
    return int(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _sort_sign(key) -> tuple[int, tuple]:
    key = list(key)
    sign = 1
    for i in range(len(key)):
        for j in range(len(key) - 1 - i):
            if key[j] > key[j + 1]:
                key[j], key[j + 1] = key[j + 1], key[j]
                sign = -sign
    if len(set(key)) < len(key):
        return 0, tuple(key)
    return sign, tuple(key)


def basis(b: int, k: int) -> list[tuple[int, ...]]:
    """Sorted 1-based index tuples spanning Lambda^k(Q^b)."""
    return list(itertools.combinations(range(1, b + 1), k))


def wedge_matrix(zeta: CupForm, k: int) -> np.ndarray:
    """Integer matrix of ``zeta ^ . : Lambda^k -> Lambda^(k+3)`` (columns index the source)."""
    src = basis(zeta.b, k)
    tgt = basis(zeta.b, k + 3)
    pos = {t: i for i, t in enumerate(tgt)}
    mat = np.zeros((len(tgt), len(src)), dtype=np.int64)
    for col, s in enumerate(src):
        for t, v in zeta.coefficients.items():
            sign, key = _sort_sign(t + s)
            if sign:
                mat[pos[key], col] += sign * v
    return mat


@dataclass(frozen=True)
class BarComplex:
    b: int
    zeta: CupForm
    maps: dict[int, np.ndarray] = field(repr=False)

    def dims(self) -> list[int]:
        return [comb(self.b, k) for k in range(self.b + 1)]

    def delta_squared_zero(self) -> bool:
        for k, m in self.maps.items():
            nxt = self.maps.get(k + 3)
            if nxt is not None and m.size and nxt.size and np.any(nxt @ m):
                return False
        return True


def build_complex(zeta: CupForm) -> BarComplex:
    maps = {k: wedge_matrix(zeta, k) for k in range(zeta.b + 1)}
    cx = BarComplex(zeta.b, zeta, maps)
    if not cx.delta_squared_zero():
        raise AssertionError("zeta ^ zeta != 0: not a differential")
    return cx


def _map_rank(m: np.ndarray) -> int:
    if m.size == 0 or not m.any():
        return 0
    return qlinalg.rank(m.astype(object))


def degree_contributions(cx: BarComplex) -> list[int]:
    """``dim ker(zeta^ on Lambda^k) - rank(zeta^ on Lambda^(k-3))`` for each k."""
    dims = cx.dims()
    ranks = [_map_rank(cx.maps[k]) for k in range(cx.b + 1)]
    return [dims[k] - ranks[k] - (ranks[k - 3] if k >= 3 else 0) for k in range(cx.b + 1)]


def bar_ranks(zeta: CupForm) -> tuple[int, int]:
    """``(rank H^even, rank H^odd)`` of one period of the 2-periodic cohomology."""
    contrib = degree_contributions(build_complex(zeta))
    return sum(contrib[0::2]), sum(contrib[1::2])


@dataclass(frozen=True)
class NonvanishingCertificate:
    nonvanishing: bool
    ranks: tuple[int, int]
    witness_degrees: list[int]
    witnesses: dict[int, list[dict[str, str]]]

    def to_dict(self) -> dict:
        return {
            "ranks": list(self.ranks),
            "nonvanishing": self.nonvanishing,
            "witness_degrees": self.witness_degrees,
            "witnesses": {str(k): v for k, v in self.witnesses.items()},
        }


def _form_str(coeffs, k_basis) -> dict[str, str]:
    out = {}
    for c, t in zip(coeffs, k_basis):
        if c:
            out["^".join(f"e{i}" for i in t) if t else "1"] = (
                str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            )
    return out


def nonvanishing_check(zeta: CupForm) -> NonvanishingCertificate:
    """Surviving cohomology classes of one period, as explicit forms.

    For each form degree k a basis of ``ker(zeta^) / im(zeta^)`` is extracted;
    any nonzero class recurs in every second grading because U is invertible.
    """
    cx = build_complex(zeta)
    witnesses: dict[int, list[dict[str, str]]] = {}
    for k in range(cx.b + 1):
        ker = qlinalg.nullspace(cx.maps[k].astype(object), comb(cx.b, k))
        img = qlinalg.column_space(cx.maps[k - 3].astype(object)) if k >= 3 else []
        survivors = qlinalg.complement_in(img, ker)
        if survivors:
            kb = basis(cx.b, k)
            witnesses[k] = [_form_str(v, kb) for v in survivors]
    contrib = degree_contributions(cx)
    ranks = (sum(contrib[0::2]), sum(contrib[1::2]))
    return NonvanishingCertificate(sum(ranks) > 0, ranks, sorted(witnesses), witnesses)


def random_unimodular(b: int, rng: random.Random, steps: int = 12) -> np.ndarray:
    """Random element of GL(b, Z): signed permutation times elementary shears."""
    g = np.eye(b, dtype=np.int64)
    perm = list(range(b))
    rng.shuffle(perm)
    g = g[:, perm] * np.array([rng.choice((-1, 1)) for _ in range(b)])
    for _ in range(steps if b > 1 else 0):
        i, j = rng.sample(range(b), 2)
        g[:, j] += rng.choice((-1, 1)) * g[:, i]
    return g


def sign_flip_pivots(b: int) -> list[int]:
    """Triples forming an information set for the basis sign-flip action.

    Flipping ``e_i -> -e_i`` negates every coefficient whose triple contains
    i. Over GF(2) these flips span a code on the triples; the returned
    positions (pivot columns) carry every sign pattern of that code exactly
    once, so each flip class has one member that is nonnegative there.
    """
    triples = basis(b, 3)
    gen = [[1 if i in t else 0 for t in triples] for i in range(1, b + 1)]
    pivots: list[int] = []
    r = 0
    for col in range(len(triples)):
        piv = next((i for i in range(r, len(gen)) if gen[i][col]), None)
        if piv is None:
            continue
        gen[r], gen[piv] = gen[piv], gen[r]
        for i in range(len(gen)):
            if i != r and gen[i][col]:
                gen[i] = [x ^ y for x, y in zip(gen[i], gen[r])]
        pivots.append(col)
        r += 1
    return pivots


def scan_nonvanishing(b: int, bound: int, chunk: int = 65_536) -> dict:
    """Exhaustive scan of all cup forms with ``|zeta_ijk| <= bound``.

    Basis sign flips are unimodular basis changes and leave ranks unchanged,
    so only forms that are nonnegative on ``sign_flip_pivots(b)`` are
    evaluated; each stands for ``2**(nonzero pivot entries)`` forms. The
    weights are summed into ``forms_covered`` and must equal
    ``(2*bound + 1)**C(b, 3)``.

    Ranks come from batched fraction-free elimination; the Hadamard bound of
    every wedge matrix in the range is certified first, so they are exact.
    """
    triples = basis(b, 3)
    dims = [comb(b, k) for k in range(b + 1)]
    per_k = {
        k: np.array([wedge_matrix(CupForm(b, {t: 1}), k) for t in triples], dtype=np.int64)
        for k in range(b + 1)
    }
    total = (2 * bound + 1) ** len(triples)
    summary = {"b": b, "bound": bound, "forms": total, "forms_covered": 0, "evaluated": 0,
               "all_nonvanishing": True, "rank_profiles": {}}
    if not triples:
        ranks = bar_ranks(CupForm(b))
        summary.update(forms_covered=1, evaluated=1,
                       rank_profiles={f"{ranks[0]},{ranks[1]}": 1},
                       all_nonvanishing=sum(ranks) > 0)
        return summary
    worst = [bound * np.abs(per_k[k]).sum(axis=0) for k in range(b + 1)]
    if max(qlinalg.hadamard_bound(w[None]) for w in worst if w.size) >= qlinalg.EXACT_MINOR_BOUND:
        raise OverflowError("Hadamard bound too large; batched ranks not certified exact")
    pivots = set(sign_flip_pivots(b))
    ranges = [
        np.arange(0 if t in pivots else -bound, bound + 1, dtype=np.int64)
        for t in range(len(triples))
    ]
    sizes = np.array([len(r) for r in ranges], dtype=np.int64)
    pivot_mask = np.array([t in pivots for t in range(len(triples))])
    n_reps = int(np.prod(sizes))
    width = 2 ** b + 1
    counts = np.zeros(width * width, dtype=np.int64)
    for start in range(0, n_reps, chunk):
        rest = np.arange(start, min(start + chunk, n_reps), dtype=np.int64)
        digits = np.empty((len(rest), len(triples)), dtype=np.int64)
        for t in range(len(triples) - 1, -1, -1):
            digits[:, t] = ranges[t][rest % sizes[t]]
            rest = rest // sizes[t]
        weight = 2 ** np.count_nonzero(digits[:, pivot_mask], axis=1)
        even = np.zeros(len(digits), dtype=np.int64)
        odd = np.zeros(len(digits), dtype=np.int64)
        ranks_k = []
        for k in range(b + 1):
            unit = per_k[k]
            stack = (digits.astype(np.float64) @ unit.reshape(len(triples), -1)).reshape(
                len(digits), *unit.shape[1:]
            )
            ranks_k.append(qlinalg.batched_rank(stack))
            c = dims[k] - ranks_k[k] - (ranks_k[k - 3] if k >= 3 else 0)
            if k % 2:
                odd += c
            else:
                even += c
        if np.any(even + odd <= 0):
            summary["all_nonvanishing"] = False
        counts += np.bincount(even * width + odd, weights=weight,
                              minlength=width * width).astype(np.int64)
        summary["evaluated"] += len(digits)
        summary["forms_covered"] += int(weight.sum())
    profiles = {(int(i // width), int(i % width)): int(counts[i]) for i in np.nonzero(counts)[0]}
    summary["rank_profiles"] = {f"{e},{o}": n for (e, o), n in sorted(profiles.items())}
    return summary
