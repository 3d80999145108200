"""Twisted Dirac operators on the flat torus R^n / 2pi Z^n.

Conventions
-----------
The Fourier mode labelled by an integer vector ``k`` is ``exp(-i k.x)``. The
flat connection with holonomy parameter ``c`` gives the operator
``D_c = sum_j a_j (d/dx_j - i c_j)``, which acts on that mode by the symbol

    M_k(c) = -i * sum_j (k_j + c_j) a_j .

On the circle this is literally ``i d/dt + c``, with eigenvalue ``m + c`` on
``exp(-imt)``. Every mode symbol is Hermitian and squares to ``|k + c|^2``, so
mode-box truncations are diagonalized in closed form.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from diracfam.clifford import build_clifford, chiral_bases, gmul

FLOAT_TOL = 1e-12

# flat metric; non-flat curvature is not modelled
SCALAR_CURVATURE = 0


def _as_scalar(v):
    if isinstance(v, bool):
        raise TypeError("boolean is not a twist coordinate")
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Rational):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return float(v)


@dataclass(frozen=True)
class TwistParameter:
    """Point ``c`` of the universal cover R^n of the torus of flat connections."""

    c: tuple

    def __init__(self, c):
        if isinstance(c, TwistParameter):
            c = c.c
        if np.ndim(c) == 0 and not isinstance(c, (list, tuple)):
            c = (c,)
        object.__setattr__(self, "c", tuple(_as_scalar(v) for v in c))

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def exact(self) -> bool:
        return all(not isinstance(v, float) for v in self.c)

    def canonical(self) -> "TwistParameter":
        """Gauge representative in the fundamental domain (-1/2, 1/2]^n."""
        out = []
        for v in self.c:
            half = 0.5 if isinstance(v, float) else Fraction(1, 2)
            out.append(v - math.ceil(v - half))
        return TwistParameter(out)

    def sup_norm(self):
        return max(abs(v) for v in self.c)

    def is_integral(self, tol: float = FLOAT_TOL) -> bool:
        for v in self.c:
            if isinstance(v, float):
                if abs(v - round(v)) > tol:
                    return False
            elif Fraction(v).denominator != 1:
                return False
        return True

    def __add__(self, other) -> "TwistParameter":
        other = TwistParameter(other)
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return TwistParameter([a + b for a, b in zip(self.c, other.c)])

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.c])


def _twist(n: int, c) -> TwistParameter:
    t = TwistParameter(c)
    if t.n != n:
        raise ValueError(f"twist has {t.n} coordinates, expected {n}")
    return t


@functools.lru_cache(maxsize=32)
def _mode_box(n: int, K: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = np.meshgrid(*([np.arange(-K, K + 1, dtype=np.int64)] * n), indexing="ij")
    box = np.stack([a.reshape(-1) for a in axes], axis=1).reshape(-1, n)
    box.flags.writeable = False
    return box


def mode_box(n: int, K: int) -> np.ndarray:
    """All integer vectors with sup norm at most K, in lexicographic order (read-only)."""
    return _mode_box(int(n), int(K))


@dataclass(frozen=True)
class ModeSymbol:
    k: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)


def mode_symbol(n: int, k: Sequence[int], c) -> ModeSymbol:
    """Hermitian symbol ``M_k(c) = -i sum_j (k_j + c_j) a_j`` as a complex matrix."""
    t = _twist(n, c)
    rep = build_clifford(n)
    u = [float(kj + cj) for kj, cj in zip(k, t.c)]
    m = -1j * sum(uj * a for uj, a in zip(u, rep.generators))
    return ModeSymbol(tuple(int(x) for x in k), np.asarray(m, dtype=complex))


def mode_symbols(n: int, c, modes: np.ndarray) -> np.ndarray:
    """Stack of mode symbols for an array of modes, shape ``(len(modes), N, N)``."""
    rep = build_clifford(n)
    u = modes.astype(float) + TwistParameter(c).as_floats()[None, :]
    gens = np.array(rep.generators)
    return -1j * np.einsum("mj,jab->mab", u, gens)


def chiral_block(n: int, c, modes: np.ndarray) -> np.ndarray:
    """D+ restricted to each mode, mapping S+ to S-: shape ``(len(modes), N/2, N/2)``."""
    rep = build_clifford(n)
    bplus, bminus = chiral_bases(rep)
    m = mode_symbols(n, c, modes)
    return np.einsum("ai,mab,bj->mij", bminus.conj(), m, bplus)


@dataclass(frozen=True)
class SpectrumSlice:
    """Sorted eigenvalues with multiplicities of a mode-box truncation.

    ``completeness_radius`` is ``K - |c|_inf``: every eigenvalue of the full
    operator with absolute value at most this radius is present with full
    multiplicity.
    """

    n: int
    c: TwistParameter
    K: int
    completeness_radius: float
    entries: tuple[tuple[float, int], ...]
    keys: tuple = field(default=(), repr=False, compare=False)
    exact: bool = True

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.entries)

    def within(self, radius) -> list[tuple[float, int]]:
        return [(lam, m) for lam, m in self.entries if abs(lam) <= float(radius) + FLOAT_TOL]

    def keys_within(self, radius) -> list:
        out = []
        for key, (lam, m) in zip(self.keys, self.entries):
            if abs(lam) <= float(radius) + FLOAT_TOL:
                out.append((key, m))
        return out

    def _exact_values(self) -> list:
        # circle eigenvalues are rational for exact twists; for n >= 2 only
        # the signed squares sign(lambda) * lambda^2 are
        if not self.exact:
            return []
        return [_num_out(Fraction(k)) for k in self.keys]

    def to_dict(self) -> dict:
        """JSON form; exact circle eigenvalues are ``"p/q"`` strings.

        For ``n >= 2`` and an exact twist, ``signed_squares`` lists
        ``sign(lambda) * lambda^2`` exactly, aligned with ``entries``.
        """
        exact_vals = self._exact_values()
        if self.n == 1 and exact_vals:
            entries = [[v, m] for v, (_, m) in zip(exact_vals, self.entries)]
        else:
            entries = [[lam, m] for lam, m in self.entries]
        out = {
            "n": self.n,
            "c": [_num_out(v) for v in self.c.c],
            "K": self.K,
            "completeness_radius": _num_out(self.completeness_radius),
            "entries": entries,
        }
        if self.n > 1 and exact_vals:
            out["signed_squares"] = exact_vals
        return out

    def csv_rows(self) -> list[list]:
        """Rows ``n, c, K, completeness_radius, lambda, multiplicity``."""
        c = ";".join(str(_num_out(v)) for v in self.c.c)
        return [
            [self.n, c, self.K, _num_out(self.completeness_radius), lam, m]
            for lam, m in self.to_dict()["entries"]
        ]


def _num_out(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def _group(keyed: Iterable[tuple], exact: bool, to_float) -> tuple[list, list]:
    """Group ``(key, multiplicity)`` pairs; keys are exact or floats."""
    keyed = sorted(keyed, key=lambda km: km[0])
    keys: list = []
    mults: list[int] = []
    for key, mult in keyed:
        if keys and (key == keys[-1] if exact else abs(to_float(key) - to_float(keys[-1])) <= FLOAT_TOL):
            mults[-1] += mult
        else:
            keys.append(key)
            mults.append(mult)
    return keys, mults


def _signed_key_value(key) -> float:
    # keys for n >= 2 are ordered by sign * |u|^2, which is monotone in the eigenvalue
    s = 1 if key > 0 else -1 if key < 0 else 0
    return s * math.sqrt(abs(key))


def spectrum(n: int, c, K: int) -> SpectrumSlice:
    """Spectrum of the twisted Dirac operator on the mode box ``|k|_inf <= K``.

    Examples
    --------
    >>> [lam for lam, _ in spectrum(1, Fraction(1, 4), 2).entries]
    [-1.75, -0.75, 0.25, 1.25, 2.25]
    """
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise ValueError(f"cutoff K must be an integer >= 1, got {K!r}")
    rep = build_clifford(n)
    t = _twist(n, c)
    exact = t.exact
    radius = K - t.sup_norm()
    if n == 1:
        cval = t.c[0]
        keyed = [(m + cval, 1) for m in range(-K, K + 1)]
        keys, mults = _group(keyed, exact, float)
        entries = tuple((float(k), m) for k, m in zip(keys, mults))
    else:
        half = rep.N // 2
        keyed = []
        for k in mode_box(n, K):
            sq = sum((int(kj) + cj) ** 2 for kj, cj in zip(k, t.c))
            if sq == 0 or (not exact and sq <= FLOAT_TOL**2):
                keyed.append((0 * sq, rep.N))
            else:
                keyed.append((sq, half))
                keyed.append((-sq, half))
        keys, mults = _group(keyed, exact, _signed_key_value)
        entries = tuple((_signed_key_value(k), m) for k, m in zip(keys, mults))
    return SpectrumSlice(
        n=n,
        c=t,
        K=int(K),
        completeness_radius=radius,
        entries=entries,
        keys=tuple(keys),
        exact=exact,
    )


def harmonic_spinor_dimension(n: int, c, tol: float = FLOAT_TOL) -> int:
    """Dimension of the kernel of ``D_c``: constant spinors iff ``c`` is integral."""
    rep = build_clifford(n)
    return rep.N if _twist(n, c).is_integral(tol) else 0


@dataclass(frozen=True)
class ChiralIndex:
    index: int
    ker_plus: int
    ker_minus: int


def chiral_index(n: int, c, K: int, tol: float = 1e-9) -> ChiralIndex:
    """``dim ker D+ - dim ker D-`` from the chiral blocks of every mode symbol."""
    if n % 2:
        raise ValueError(f"chiral index needs even dimension, got n={n}")
    if K < 1:
        raise ValueError(f"cutoff K must be >= 1, got {K!r}")
    modes = mode_box(n, K)
    dplus = chiral_block(n, c, modes)
    dminus = np.conj(np.swapaxes(dplus, 1, 2))
    half = dplus.shape[1]
    ker_plus = int(np.sum(half - np.linalg.matrix_rank(dplus, tol=tol)))
    ker_minus = int(np.sum(half - np.linalg.matrix_rank(dminus, tol=tol)))
    return ChiralIndex(ker_plus - ker_minus, ker_plus, ker_minus)


def _common_denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def verify_lichnerowicz(n: int, c, K: int) -> Fraction:
    """Exact ``max |M_k(c)^2 - |k+c|^2 I|`` over the mode box (scalar curvature 0).

    The twist is converted to an exact rational (floats are binary
    rationals) and scaled to integers. Each square is formed in integer
    arithmetic as a quadratic form in ``k + c`` whose coefficient matrices are
    exact products of generators; object dtype is used when int64 could
    overflow.
    """
    rep = build_clifford(n)
    t = _twist(n, c)
    q = _common_denominator(t.c)
    shift = [int(Fraction(v) * q) for v in t.c]
    modes = mode_box(n, K)
    bound = (K * q + max(abs(s) for s in shift)) ** 2 * n * n * rep.N
    # float64 is exact on integers below 2**53 and uses BLAS
    dtype = np.float64 if bound < 2**52 else np.int64 if bound < 2**62 else object
    v = modes.astype(dtype) * q + np.array(shift, dtype=dtype)[None, :]
    # (q M_k)^2 = -sum_{i,j} v_i v_j a_i a_j: expand as a quadratic form with
    # exact Gaussian-integer coefficient matrices G_ij = -(a_i a_j + a_j a_i), i < j
    gens = rep.exact_generators
    pairs, coeff_re, coeff_im = [], [], []
    for i in range(n):
        for j in range(i, n):
            re, im = gmul(gens[i], gens[j])
            if i != j:
                re2, im2 = gmul(gens[j], gens[i])
                re, im = re + re2, im + im2
            pairs.append((i, j))
            coeff_re.append(-re.reshape(-1))
            coeff_im.append(-im.reshape(-1))
    ii, jj = np.array(pairs).T
    quad = v[:, ii] * v[:, jj]
    sqre = quad @ np.array(coeff_re, dtype=dtype)
    sqim = quad @ np.array(coeff_im, dtype=dtype)
    norms = np.einsum("mj,mj->m", v, v)
    sqre = sqre - norms[:, None] * np.eye(rep.N, dtype=dtype).reshape(-1)[None]
    dev = max(int(np.max(np.abs(sqre))), int(np.max(np.abs(sqim))))
    return Fraction(dev, q * q)


def spectra_conjugacy_check(n: int, c, c2, K: int) -> bool:
    """Compare the two spectra on their common completeness radius."""
    s1, s2 = spectrum(n, c, K), spectrum(n, c2, K)
    radius = min(s1.completeness_radius, s2.completeness_radius)
    if radius < 0:
        raise ValueError("cutoff too small: no common completeness radius")
    if s1.exact and s2.exact:
        return s1.keys_within(radius) == s2.keys_within(radius)
    a, b = s1.within(radius), s2.within(radius)
    if len(a) != len(b):
        return False
    return all(abs(x - y) <= FLOAT_TOL and m1 == m2 for (x, m1), (y, m2) in zip(a, b))
