from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracfam.bar_homology import CupForm
from diracfam.char_classes import (
    ExteriorElement,
    a_hat,
    chern_character,
    exp_nilpotent,
    family_ch_torus,
    index_from_pontryagin,
    odd_family_ch,
    omega_class,
    slant_fundamental_class,
    substitute,
    wedge,
)

E = ExteriorElement
NX, NY = 3, 3


def x(i, nx=NX, ny=NY):
    return E.gen("x", i, nx, ny)


def y(i, nx=NX, ny=NY):
    return E.gen("y", i, nx, ny)


# random elements: sums of up to 4 monomials in x1..x3, y1..y3 with small coefficients
gens = [("x", i) for i in range(1, NX + 1)] + [("y", i) for i in range(1, NY + 1)]
monomial = st.lists(st.sampled_from(gens), max_size=3, unique=True)
element = st.lists(st.tuples(monomial, st.integers(-3, 3)), max_size=4)


def build(spec):
    out = E.scalar(0, NX, NY)
    for mono, c in spec:
        term = E.scalar(c, NX, NY)
        for side, i in mono:
            term = term * E.gen(side, i, NX, NY)
        out = out + term
    return out


def homogeneous_parts(a):
    return {d: a.component(d) for d in range(0, NX + NY + 1)}


@settings(max_examples=80, deadline=None)
@given(element, element, element)
def test_wedge_associative(a, b, c):
    a, b, c = build(a), build(b), build(c)
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))


@settings(max_examples=80, deadline=None)
@given(element, element)
def test_graded_commutative(a, b):
    a, b = build(a), build(b)
    for da, pa in homogeneous_parts(a).items():
        for db, pb in homogeneous_parts(b).items():
            assert wedge(pa, pb) == wedge(pb, pa) * (-1) ** (da * db)


@settings(max_examples=40, deadline=None)
@given(element, element, element)
def test_distributive(a, b, c):
    a, b, c = build(a), build(b), build(c)
    assert wedge(a, b + c) == wedge(a, b) + wedge(a, c)


def test_wedge_sign_example():
    assert wedge(y(1), x(1)) == -wedge(x(1), y(1))
    assert (x(1) * y(1)) * (x(2) * y(2)) == -(x(1) * x(2) * y(1) * y(2))
    assert (x(1) * x(1)).is_zero()


def test_generator_mismatch_rejected():
    with pytest.raises(ValueError, match="mismatch"):
        x(1, 2, 2) + x(1, 3, 3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exp_omega_matches_product_oracle(n):
    # the x_i y_i are even and commute, so e^Omega = prod (1 + x_i y_i)
    prod = E.scalar(1, n, n)
    for i in range(1, n + 1):
        prod = prod * (1 + x(i, n, n) * y(i, n, n))
    assert exp_nilpotent(omega_class(n)) == prod


def perm_sign(seq):
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@pytest.mark.parametrize("n", [2, 4, 6])
def test_family_ch_torus_sign_oracle(n):
    # top part x1 y1 ... xn yn = (-1)^(n(n-1)/2) x1..xn y1..yn, then the right
    # pairing moves x1..xn past y1..yn: (-1)^(n*n)
    order = [k for i in range(n) for k in (i, n + i)]
    expected = perm_sign(order) * (-1) ** (n * n)
    assert perm_sign(order) == (-1) ** (n * (n - 1) // 2)
    report = family_ch_torus(n)
    ys = E.scalar(1, 0, n)
    for i in range(1, n + 1):
        ys = ys * E.gen("y", i, 0, n)
    assert report.element == ys * expected
    assert report.rank_part == 0 and report.integral


def test_family_ch_torus_two_dimensional():
    assert str(family_ch_torus(2).element) == "-y1*y2"


def test_family_ch_torus_rejects_odd():
    with pytest.raises(ValueError):
        family_ch_torus(3)


def test_a_hat_coefficients_against_source():
    # ind(D+) for n = 8 is <-4 p2 + 7 p1^2, [M]>/5760
    p1, p2 = E.symbol("p1", 4), E.symbol("p2", 8)
    ah = a_hat(8)
    assert ah == 1 - p1 / 24 + (7 * p1 * p1 - 4 * p2) / 5760
    d = ah.to_dict()
    assert d == {"1": "1", "p1": "-1/24", "p1^2": "7/5760", "p2": "-1/1440"}


def test_a_hat_truncation():
    assert a_hat(2) == E.scalar(1)
    assert a_hat(4) == 1 - E.symbol("p1", 4) / 24
    assert a_hat(12, 0, 0) == E.scalar(1)
    with pytest.raises(ValueError):
        a_hat(12)


def test_k3_index():
    # ind(D+) = -sigma/8 with p1 = 3 sigma and sigma(K3) = -16
    r = index_from_pontryagin(4, {"p1": 3 * -16})
    assert r.rank_part == 2 and r.integral


def test_index_low_dimensions():
    assert index_from_pontryagin(2, {}).rank_part == 0
    assert index_from_pontryagin(6, {}).rank_part == 0
    # HP^2: p1^2 = 4, p2 = 7 gives A-hat 0
    assert index_from_pontryagin(8, {"p1^2": 4, "p2": 7}).rank_part == 0
    r = index_from_pontryagin(4, {"p1": 24})
    assert r.rank_part == -1
    frac = index_from_pontryagin(4, {"p1": 1})
    assert not frac.integral


def test_index_requires_numbers():
    with pytest.raises(ValueError, match="missing"):
        index_from_pontryagin(4, {})


def test_chern_character():
    assert str(chern_character(1, "h")) == "1 + h + 1/2*h^2"
    assert str(chern_character(2, None, "e")) == "2 - e"
    line = chern_character(1, "h")
    # ch is multiplicative on line bundles: ch(L)^2 = ch(L^2) with c1 -> 2h
    sq = (line * line).truncate(4)
    two_h = E.symbol("h", 2) * 2
    assert sq == chern_character(1, two_h)


def test_substitute():
    el = a_hat(4)
    assert substitute(el, {"p1": -48}) == E.scalar(3)


def test_slant_with_explicit_pairing():
    b = 3
    zeta = CupForm(b, {(1, 2, 3): 2})
    odd = odd_family_ch(b, zeta)
    ys = E.gen("y", 1, 0, 3) * E.gen("y", 2, 0, 3) * E.gen("y", 3, 0, 3)
    assert odd.component(1).is_zero()
    assert odd.component(3) == ys * 2


def test_odd_family_ch_t3():
    odd = odd_family_ch(3, CupForm(3, {(1, 2, 3): 1}))
    assert odd.component(1).is_zero()
    assert str(odd.component(3)) == "y1*y2*y3"


def test_odd_family_ch_two_copies():
    # for b = 6 and zeta = e123 + e456 the degree-3 part is y1y2y3 + y4y5y6
    odd = odd_family_ch(6, CupForm.parse(6, "1,2,3:1; 4,5,6:1"))
    yy = [E.gen("y", i, 0, 6) for i in range(1, 7)]
    assert odd.component(3) == yy[0] * yy[1] * yy[2] + yy[3] * yy[4] * yy[5]


def test_slant_ignores_wrong_degree():
    el = x(1) * y(1) + x(1) * x(2) * x(3)
    out = slant_fundamental_class(el, 3)
    assert out == E.scalar(1, 0, NY)


def test_rendering():
    el = x(1) * y(2) * Fraction(-3, 2) + 1
    assert str(el) == "1 - 3/2*x1*y2"
    assert el.to_dict() == {"1": "1", "x1*y2": "-3/2"}
    assert str(E.scalar(0)) == "0"


def test_exp_nilpotent_needs_truncation_with_symbols():
    with pytest.raises(ValueError):
        exp_nilpotent(E.symbol("h", 2))
    assert exp_nilpotent(E.symbol("h", 2), 4) == chern_character(1, "h")
