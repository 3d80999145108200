"""The ten acceptance criteria, each timed against its runtime budget.

Every criterion prints one ``ACCEPTANCE <k> PASS|FAIL`` line; the lines are
also collected into the pytest terminal summary.
"""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from diracfam import bar_homology as bh
from diracfam import char_classes as cc
from diracfam import family_index as fi
from diracfam import spectral_flow as sf
from diracfam import torus_dirac as td
from diracfam.clifford import build_clifford

S1 = np.array([[1j, 0], [0, -1j]])
S2 = np.array([[0, -1], [1, 0]], dtype=complex)
S3 = np.array([[0, 1j], [1j, 0]])
Z2 = np.zeros((2, 2), dtype=complex)
PRINTED = {
    1: [np.array([[1j]])],
    2: [S2, S3],
    3: [S1, S2, S3],
    4: [np.block([[Z2, -np.eye(2)], [np.eye(2), Z2]])]
    + [np.block([[Z2, -s.conj().T], [s, Z2]]) for s in (S1, S2, S3)],
}


def test_criterion_01_clifford(criterion):
    build_clifford.cache_clear()
    with criterion(1, "Clifford relations exact for n=1..8, printed matrices for n<=4", 1.0):
        for n in range(1, 9):
            flags = build_clifford(n).check_relations()
            expected = {"square_minus_identity", "anticommute", "skew_hermitian"}
            if n % 2 == 0:
                expected |= {"chirality_square_identity", "chirality_hermitian",
                             "chirality_anticommutes", "chirality_balanced"}
            assert set(flags) == expected and all(flags.values()), (n, flags)
        for n, printed in PRINTED.items():
            gens = build_clifford(n).generators
            assert len(gens) == len(printed)
            for g, p in zip(gens, printed):
                assert np.array_equal(g, p)


def test_criterion_02_circle_spectrum(criterion):
    with criterion(2, "circle spectrum {m + c} exact; conjugacy iff c - c' in Z", 1.0):
        for c in [Fraction(k, 12) for k in range(-18, 19)]:
            for K in (1, 3, 6):
                s = td.spectrum(1, c, K)
                assert s.keys == tuple(m + c for m in range(-K, K + 1))
                assert all(mult == 1 for _, mult in s.entries)
        values = [Fraction(k, 4) for k in range(-6, 7)] + [Fraction(1, 3), Fraction(-2, 3)]
        for c, c2 in itertools.product(values, repeat=2):
            expect = (c - c2).denominator == 1
            assert td.spectra_conjugacy_check(1, c, c2, 6) == expect, (c, c2)


def test_criterion_03_t2_harmonic_spinors(criterion):
    with criterion(3, "T^2: dim ker D = 2 at c=0 only; chiral_index = 0 at K=10", 1.0):
        grid = [Fraction(k, 8) for k in range(-3, 5)]
        for c in itertools.product(grid, repeat=2):
            dim = td.harmonic_spinor_dimension(2, list(c))
            assert dim == (2 if c == (0, 0) else 0), c
            ci = td.chiral_index(2, list(c), 10)
            assert ci.index == 0
            # the numerical kernel of the truncation agrees with the closed form
            assert ci.ker_plus + ci.ker_minus == dim


def test_criterion_04_lichnerowicz(criterion):
    rng = random.Random(2024)
    with criterion(4, "M_k(c)^2 - |k+c|^2 I = 0 exactly, n<=4, K<=5, 100 twists", 5.0):
        for n in range(1, 5):
            for _ in range(100):
                c = [Fraction(rng.randint(-40, 40), rng.randint(1, 15)) for _ in range(n)]
                assert td.verify_lichnerowicz(n, c, 5) == 0


def test_criterion_05_spectral_flow(criterion):
    rng = random.Random(5)
    with criterion(5, "spectral flow: S^1 loop = 1, numeric agrees K in {5,10,20}, T^3 loops 0, additivity", 5.0):
        loop = sf.ParamPath([[0], [1]], closed=True)
        assert sf.exact_flow(1, loop, 2) == 1
        shifted = sf.ParamPath([[Fraction(1, 2)], [Fraction(3, 2)]], closed=True)
        for K in (5, 10, 20):
            assert sf.numeric_flow(sf.dirac_family(1, loop, K), endpoints="left-continuous") == 1
            assert sf.numeric_flow(sf.dirac_family(1, shifted, K)) == sf.exact_flow(1, shifted, K) == 1
        for j in range(3):
            end = [0, 0, 0]
            end[j] = 1
            assert sf.exact_flow(3, sf.ParamPath([[0, 0, 0], end], closed=True), 3) == 0
        for _ in range(50):
            p = sf.ParamPath([[Fraction(rng.randint(-16, 16), 4)] for _ in range(rng.randint(2, 4))])
            q = sf.ParamPath([p.vertices[-1].c] + [[Fraction(rng.randint(-16, 16), 4)]
                                                     for _ in range(rng.randint(1, 3))])
            K = 6
            assert sf.exact_flow(1, p.concat(q), K) == sf.exact_flow(1, p, K) + sf.exact_flow(1, q, K)


def _diag_loop(powers, dims, samples=64):
    out = []
    for t in 2 * math.pi * np.arange(samples) / samples:
        d = np.ones(dims, dtype=complex)
        d[: len(powers)] = np.exp(1j * np.array(powers) * t)
        out.append(np.diag(d))
    return out


def test_criterion_06_windings(criterion):
    rng = np.random.default_rng(6)
    with criterion(6, "windings: diag(e^it,1,..)=1, diag(e^it,e^-it)=0, block-sum additivity", 1.0):
        for dims in (1, 2, 4):
            assert sf.unitary_winding(_diag_loop([1], dims)) == 1
        assert sf.unitary_winding(_diag_loop([1, -1], 2)) == 0
        for _ in range(25):
            da, db = (int(x) for x in rng.integers(1, 4, size=2))
            wa, wb = (int(x) for x in rng.integers(-3, 4, size=2))
            qa, _ = np.linalg.qr(rng.normal(size=(da, da)) + 1j * rng.normal(size=(da, da)))
            a = [qa @ u @ qa.conj().T for u in _diag_loop([wa], da)]
            b = _diag_loop([wb], db)
            assert sf.unitary_winding(a) == wa
            assert sf.unitary_winding(sf.block_sum_loop(a, b)) == sf.unitary_winding(a) + sf.unitary_winding(b)


def test_criterion_07_family_index(criterion):
    with criterion(7, "family index on T^2: jumps {0}, sum of degrees +-1 stable, |slant| = 1, grid 32^2", 10.0):
        jumps = fi.kernel_jump_loci(2, 3)
        assert [j.location for j in jumps] == [(0.0, 0.0)]
        totals = set()
        for r in (0.05, 0.1, 0.2):
            for samples in (32, 64, 128):
                totals.add(sum(fi.local_winding_degree(j, r, samples) for j in jumps))
        assert len(totals) == 1
        total = totals.pop()
        assert abs(total) == 1
        for m in (16, 32):
            w = fi.build_w_construction(2, 3, m)
            assert set(w.fiber_dims.tolist()) == {1} and w.index == 0
        symbolic = cc.family_ch_torus(2).element
        assert len(symbolic.terms) == 1
        assert abs(total) == abs(symbolic.terms[0][1]) == 1


def _kubo(m0, m=80):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    h = 2 * math.pi / m
    total = 0.0
    for a in (np.arange(m) + 0.5) * h:
        for b in (np.arange(m) + 0.5) * h:
            e, v = np.linalg.eigh(fi.two_band_hamiltonian(a, b, m0))
            d1 = math.cos(a) * sx - math.sin(a) * sz
            d2 = math.cos(b) * sy - math.sin(b) * sz
            lo, hi = v[:, 0], v[:, 1]
            total += -2 * np.imag((lo.conj() @ d1 @ hi) * (hi.conj() @ d2 @ lo)) / (e[0] - e[1]) ** 2
    return total * h * h / (2 * math.pi)


def test_criterion_08_fhs_oracle(criterion):
    rng = np.random.default_rng(8)
    with criterion(8, "FHS two-band: |C|=1 at m0=-1, 0 at m0=-3, grid >= 24^2, gauge invariant", 5.0):
        for m0, magnitude in ((-1.0, 1), (-3.0, 0)):
            oracle = _kubo(m0)
            for m in (24, 32):
                frames = fi.two_band_frames(m0, m)
                c = fi.fhs_chern_number(frames)
                assert abs(c) == magnitude
                assert c == round(oracle)
                for _ in range(3):
                    phases = np.exp(2j * np.pi * rng.random(frames.shape[:2] + (1, 1)))
                    assert fi.fhs_chern_number(frames * phases) == c


def test_criterion_09_symbolic(criterion):
    with criterion(9, "A-hat coefficients, K3 index 2, family ch on T^n, odd family ch", 1.0):
        p1, p2 = cc.ExteriorElement.symbol("p1", 4), cc.ExteriorElement.symbol("p2", 8)
        assert cc.a_hat(8) == 1 - p1 / 24 + (7 * p1 * p1 - 4 * p2) / 5760
        k3 = cc.index_from_pontryagin(4, {"p1": -48})
        assert k3.rank_part == 2 and k3.integral
        for n in (2, 4, 6):
            terms = cc.family_ch_torus(n).element.terms
            assert len(terms) == 1
            (odd, even), coeff = terms[0]
            assert odd == tuple(("y", i) for i in range(1, n + 1)) and not even
            assert abs(coeff) == 1
        odd = cc.odd_family_ch(3, bh.CupForm(3, {(1, 2, 3): 1}))
        y = [cc.ExteriorElement.gen("y", i, 0, 3) for i in (1, 2, 3)]
        assert odd.component(1).is_zero()
        assert odd.component(3) == y[0] * y[1] * y[2]


def _det(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def _exterior_power(g, k):
    idx = list(itertools.combinations(range(len(g)), k))
    if k == 0:
        return np.ones((1, 1), dtype=object)
    return np.array([[_det([[g[r][c] for c in cols] for r in rows]) for cols in idx] for rows in idx],
                    dtype=object)


def test_criterion_10_bar_homology(criterion):
    rng = random.Random(10)
    with criterion(10, "bar homology: T^3 (3,3), zero form 2^(b-1), equivariance, exhaustive scan b<=5 |zeta|<=2", 30.0):
        assert bh.bar_ranks(bh.CupForm(3, {(1, 2, 3): 1})) == (3, 3)
        for b in range(1, 7):
            assert bh.bar_ranks(bh.CupForm(b, {})) == (2 ** (b - 1), 2 ** (b - 1))
        for _ in range(100):
            b = rng.randint(3, 5)
            zeta = bh.CupForm.from_vector(b, [rng.randint(-2, 2) for _ in range(math.comb(b, 3))])
            g = bh.random_unimodular(b, rng)
            moved = zeta.transformed(g)
            assert bh.build_complex(zeta).delta_squared_zero()
            assert bh.build_complex(moved).delta_squared_zero()
            assert bh.bar_ranks(moved) == bh.bar_ranks(zeta)
            # the wedge maps intertwine: W_k(g zeta) L^k(g) = L^{k+3}(g) W_k(zeta)
            g_int = [[int(v) for v in row] for row in np.asarray(g)]
            for k in range(0, b - 2):
                lhs = bh.wedge_matrix(moved, k).astype(object).dot(_exterior_power(g_int, k))
                rhs = _exterior_power(g_int, k + 3).dot(bh.wedge_matrix(zeta, k).astype(object))
                assert np.array_equal(lhs, rhs)
        for b in range(0, 6):
            result = bh.scan_nonvanishing(b, 2)
            assert result["forms_covered"] == result["forms"] == 5 ** math.comb(b, 3)
            assert result["all_nonvanishing"], b


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
