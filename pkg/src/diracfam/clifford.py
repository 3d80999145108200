"""Complex Clifford generators a_1..a_n with a_j^2 = -1 and chirality splitting.

Matrices are stored exactly as pairs of integer arrays ``(re, im)``; every
constructed entry lies in {0, +-1, +-i}, so all relation checks are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DIM = 12

GaussMatrix = tuple[np.ndarray, np.ndarray]


def gmul(a: GaussMatrix, b: GaussMatrix) -> GaussMatrix:
    """Exact product of two Gaussian-integer matrices."""
    ar, ai = a
    br, bi = b
    return ar @ br - ai @ bi, ar @ bi + ai @ br


def gadd(a: GaussMatrix, b: GaussMatrix) -> GaussMatrix:
    return a[0] + b[0], a[1] + b[1]


def gscale_i(a: GaussMatrix) -> GaussMatrix:
    """Multiply by the imaginary unit."""
    return -a[1], a[0].copy()


def gadjoint(a: GaussMatrix) -> GaussMatrix:
    return a[0].T.copy(), -a[1].T


def geye(n: int) -> GaussMatrix:
    return np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64)


def gzero(n: int) -> GaussMatrix:
    return np.zeros((n, n), dtype=np.int64), np.zeros((n, n), dtype=np.int64)


def gequal(a: GaussMatrix, b: GaussMatrix) -> bool:
    return bool(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))


def to_complex(a: GaussMatrix) -> np.ndarray:
    return a[0].astype(complex) + 1j * a[1]


def from_complex(m) -> GaussMatrix:
    m = np.asarray(m, dtype=complex)
    re, im = np.rint(m.real).astype(np.int64), np.rint(m.imag).astype(np.int64)
    if not (np.array_equal(re, m.real) and np.array_equal(im, m.imag)):
        raise ValueError("matrix entries are not Gaussian integers")
    return re, im


@dataclass(frozen=True)
class CliffordRep:
    """Minimal complex Clifford module in dimension ``n``.

    Attributes
    ----------
    n : int
        Spatial dimension.
    N : int
        Spinor rank ``2**(n // 2)``.
    exact_generators : tuple of (re, im) integer pairs
        The generators a_1..a_n.
    exact_chirality : (re, im) pair or None
        ``omega = i**(n/2) a_1 ... a_n``; present iff ``n`` is even.
    """

    n: int
    N: int
    exact_generators: tuple[GaussMatrix, ...] = field(repr=False)
    exact_chirality: GaussMatrix | None = field(default=None, repr=False)

    @property
    def generators(self) -> list[np.ndarray]:
        return [to_complex(g) for g in self.exact_generators]

    @property
    def chirality(self) -> np.ndarray | None:
        if self.exact_chirality is None:
            return None
        return to_complex(self.exact_chirality)

    def check_relations(self) -> dict[str, bool]:
        """Exact check of every defining relation; returns one flag per relation."""
        gens = self.exact_generators
        minus_one = tuple(-x for x in geye(self.N))
        out = {
            "square_minus_identity": all(gequal(gmul(a, a), minus_one) for a in gens),
            "anticommute": all(
                gequal(gadd(gmul(gens[i], gens[j]), gmul(gens[j], gens[i])), gzero(self.N))
                for i in range(self.n)
                for j in range(i + 1, self.n)
            ),
            "skew_hermitian": all(
                gequal(gadjoint(a), tuple(-x for x in a)) for a in gens
            ),
        }
        if self.n % 2 == 0:
            w = self.exact_chirality
            neg_w = tuple(-x for x in w)
            out["chirality_square_identity"] = gequal(gmul(w, w), geye(self.N))
            out["chirality_hermitian"] = gequal(gadjoint(w), w)
            out["chirality_anticommutes"] = all(
                gequal(gmul(w, a), gmul(a, neg_w)) for a in gens
            )
            # omega is diagonal in this construction; its trace counts S+ minus S-
            out["chirality_balanced"] = bool(
                np.count_nonzero(w[0] - np.diag(np.diag(w[0]))) == 0
                and not w[1].any()
                and int(np.trace(w[0])) == 0
            )
        return out


def _chirality(gens: list[GaussMatrix], n: int, N: int) -> GaussMatrix:
    w = geye(N)
    for a in gens:
        w = gmul(w, a)
    for _ in range(n // 2):
        w = gscale_i(w)
    return w


@lru_cache(maxsize=None)
def build_clifford(n: int, max_dim: int = MAX_DIM) -> CliffordRep:
    """Build the Clifford generators in dimension ``n``.

    Odd ``n = m + 1`` puts ``i * omega(m)`` in front of the even generators;
    even ``n = m + 2`` uses the block pattern ``[[0, -I], [I, 0]]`` and
    ``[[0, -b*], [b, 0]]`` over the odd generators ``b`` of dimension ``m + 1``.
    This reproduces a_1 = i, the 2x2 pair, the Pauli triple and the 4x4 set.
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > max_dim:
        raise ValueError(f"dimension out of supported range 1..{max_dim}: {n!r}")
    n = int(n)
    if n == 1:
        gens = [(np.zeros((1, 1), dtype=np.int64), np.ones((1, 1), dtype=np.int64))]
        return CliffordRep(1, 1, tuple(gens), None)
    if n % 2 == 1:
        even = build_clifford(n - 1, max_dim)
        first = gscale_i(even.exact_chirality)
        gens = [first, *even.exact_generators]
        return CliffordRep(n, even.N, tuple(gens), None)
    odd = build_clifford(n - 1, max_dim)
    half = odd.N
    zero = np.zeros((half, half), dtype=np.int64)
    ident = np.eye(half, dtype=np.int64)

    def block(upper_right: GaussMatrix, lower_left: GaussMatrix) -> GaussMatrix:
        re = np.block([[zero, upper_right[0]], [lower_left[0], zero]])
        im = np.block([[zero, upper_right[1]], [lower_left[1], zero]])
        return re, im

    gens = [block((-ident, zero), (ident, zero))]
    for b in odd.exact_generators:
        bstar = gadjoint(b)
        gens.append(block((-bstar[0], -bstar[1]), b))
    N = 2 * half
    return CliffordRep(n, N, tuple(gens), _chirality(gens, n, N))


def chirality_projectors(rep: CliffordRep) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P+, P-) = ((I + omega)/2, (I - omega)/2)``."""
    if rep.n % 2:
        raise ValueError(f"chirality projectors need even dimension, got n={rep.n}")
    w = rep.chirality
    eye = np.eye(rep.N)
    return (eye + w) / 2, (eye - w) / 2


def chiral_bases(rep: CliffordRep) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal column bases of S+ and S- (coordinate vectors, omega is diagonal)."""
    if rep.n % 2:
        raise ValueError(f"chiral splitting needs even dimension, got n={rep.n}")
    diag = np.diag(rep.exact_chirality[0])
    eye = np.eye(rep.N)
    return eye[:, diag == 1], eye[:, diag == -1]
