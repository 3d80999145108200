import itertools
import random
from collections import Counter
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracfam import qlinalg
from diracfam.bar_homology import (
    CupForm,
    bar_ranks,
    basis,
    build_complex,
    nonvanishing_check,
    random_unimodular,
    scan_nonvanishing,
    sign_flip_pivots,
    wedge_matrix,
)
from diracfam.char_classes import ExteriorElement


def oracle_ranks(zeta: CupForm):
    """Bar ranks from wedge products computed in the symbolic engine."""
    b = zeta.b
    gen = [ExteriorElement.gen("x", i, b, 0) for i in range(1, b + 1)]
    z = ExteriorElement.scalar(0, b, 0)
    for (i, j, k), v in zeta.coefficients.items():
        z = z + gen[i - 1] * gen[j - 1] * gen[k - 1] * v

    def mono(t):
        out = ExteriorElement.scalar(1, b, 0)
        for i in t:
            out = out * gen[i - 1]
        return out

    ranks = []
    for k in range(b + 1):
        src, dst = basis(b, k), basis(b, k + 3)
        m = np.zeros((len(dst), len(src)))
        index = {tuple(("x", i) for i in t): r for r, t in enumerate(dst)}
        for col, t in enumerate(src):
            for (odd, _), c in (z * mono(t)).terms:
                m[index[odd], col] = float(c)
        ranks.append(np.linalg.matrix_rank(m) if m.size else 0)
    contrib = [comb(b, k) - ranks[k] - (ranks[k - 3] if k >= 3 else 0) for k in range(b + 1)]
    return sum(contrib[0::2]), sum(contrib[1::2])


cup_forms = st.integers(3, 6).flatmap(
    lambda b: st.lists(st.integers(-2, 2), min_size=comb(b, 3), max_size=comb(b, 3)).map(
        lambda v: CupForm.from_vector(b, v)
    )
)


def test_t3_example():
    cert = nonvanishing_check(CupForm(3, {(1, 2, 3): 1}))
    assert cert.ranks == (3, 3)
    assert cert.nonvanishing
    assert cert.witness_degrees == [1, 2]
    assert cert.witnesses[1] == [{"e1": "1"}, {"e2": "1"}, {"e3": "1"}]


@pytest.mark.parametrize("b", range(0, 7))
def test_zero_form(b):
    expected = (1, 0) if b == 0 else (2 ** (b - 1), 2 ** (b - 1))
    assert bar_ranks(CupForm(b, {})) == expected


def test_b4_single_triple_matrix():
    m = wedge_matrix(CupForm(4, {(1, 2, 3): 1}), 1)
    np.testing.assert_array_equal(m, [[0, 0, 0, 1]])


def test_b6_two_triples():
    assert bar_ranks(CupForm.parse(6, "1,2,3:1; 4,5,6:1")) == (18, 18)


@settings(max_examples=40, deadline=None)
@given(cup_forms)
def test_ranks_match_symbolic_oracle(zeta):
    assert bar_ranks(zeta) == oracle_ranks(zeta)


@settings(max_examples=40, deadline=None)
@given(cup_forms)
def test_delta_squared_zero_and_euler(zeta):
    cx = build_complex(zeta)
    assert cx.delta_squared_zero()
    even, odd = bar_ranks(zeta)
    # delta has odd degree, so the Euler characteristic of Lambda^* survives
    chi = sum((-1) ** k * comb(zeta.b, k) for k in range(zeta.b + 1))
    assert even - odd == chi


@settings(max_examples=30, deadline=None)
@given(cup_forms, st.integers(-3, 3).filter(bool))
def test_scaling_invariance(zeta, factor):
    assert bar_ranks(zeta.scaled(factor)) == bar_ranks(zeta)


@settings(max_examples=30, deadline=None)
@given(cup_forms, st.integers(0, 2**16))
def test_basis_change_invariance(zeta, seed):
    g = random_unimodular(zeta.b, random.Random(seed))
    assert round(abs(np.linalg.det(g))) == 1
    assert bar_ranks(zeta.transformed(g)) == bar_ranks(zeta)


def test_transformed_identity_and_permutation():
    zeta = CupForm(3, {(1, 2, 3): 1})
    assert zeta.transformed(np.eye(3, dtype=int)) == zeta
    swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert zeta.transformed(swap).coefficients == {(1, 2, 3): -1}


def test_parse():
    z = CupForm.parse(4, "2,1,3:2; 1,2,4")
    assert z.coefficients == {(1, 2, 3): -2, (1, 2, 4): 1}
    with pytest.raises(ValueError):
        CupForm.parse(3, "1,2:1")
    with pytest.raises(ValueError):
        CupForm(3, {(1, 2, 4): 1})


@pytest.mark.parametrize("b,bound", [(3, 2), (4, 1), (4, 2)])
def test_scan_matches_brute_force(b, bound):
    result = scan_nonvanishing(b, bound)
    brute = Counter()
    for vec in itertools.product(range(-bound, bound + 1), repeat=comb(b, 3)):
        e, o = bar_ranks(CupForm.from_vector(b, vec))
        brute[f"{e},{o}"] += 1
    assert result["forms"] == result["forms_covered"] == (2 * bound + 1) ** comb(b, 3)
    assert result["rank_profiles"] == dict(brute)
    assert result["all_nonvanishing"]


def test_sign_flip_pivots_are_independent():
    # flipping the sign of basis vector i negates exactly the triples containing i;
    # the pivot triples must be hit independently over GF(2)
    for b in range(3, 7):
        piv = sign_flip_pivots(b)
        triples = basis(b, 3)
        rows = np.array([[int(i + 1 in triples[p]) for p in piv] for i in range(b)])
        assert qlinalg.rank(rows % 2) == len(piv)


def test_batched_rank_matches_exact():
    rng = np.random.default_rng(1)
    mats = rng.integers(-3, 4, size=(500, 5, 6))
    mats[::7, 3] = mats[::7, 0] + mats[::7, 1]
    assert qlinalg.hadamard_bound(mats) < qlinalg.EXACT_MINOR_BOUND
    got = qlinalg.batched_rank(mats)
    want = [qlinalg.rank(m) for m in mats]
    np.testing.assert_array_equal(got, want)


def test_nullspace_and_complement():
    a = [[1, 2, 3], [2, 4, 6]]
    ns = qlinalg.nullspace(a)
    assert len(ns) == 2
    for v in ns:
        assert all(sum(r * x for r, x in zip(row, v)) == 0 for row in a)
    assert qlinalg.complement_in([[1, 0, 0]], [[2, 0, 0], [0, 1, 0]]) == [[0, 1, 0]]
