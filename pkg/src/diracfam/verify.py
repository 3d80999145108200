"""End-to-end verification suites, one per identity checked by the package.

Each suite returns ``{"suite": name, "passed": bool, "checks": [...]}`` where
every check is ``{"name", "passed", "detail"}``. Suites are deterministic:
random inputs come from fixed seeds.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable

import numpy as np

from diracfam import bar_homology as bh
from diracfam import char_classes as cc
from diracfam import family_index as fi
from diracfam import spectral_flow as sf
from diracfam import torus_dirac as td
from diracfam.clifford import build_clifford

# generators printed for n <= 4 in the construction being reproduced
_SIGMA = [
    np.array([[1j, 0], [0, -1j]]),
    np.array([[0, -1], [1, 0]], dtype=complex),
    np.array([[0, 1j], [1j, 0]]),
]


def _block(ur, ll):
    z = np.zeros_like(ur)
    return np.block([[z, ur], [ll, z]])


PRINTED_GENERATORS = {
    1: [np.array([[1j]])],
    2: [np.array([[0, -1], [1, 0]], dtype=complex), np.array([[0, 1j], [1j, 0]])],
    3: _SIGMA,
    4: [_block(-np.eye(2, dtype=complex), np.eye(2, dtype=complex))]
    + [_block(-s.conj().T, s) for s in _SIGMA],
}


class _Report:
    def __init__(self, name: str):
        self.name = name
        self.checks: list[dict] = []

    def check(self, name: str, passed: bool, detail=None) -> bool:
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})
        return bool(passed)

    def attempt(self, name: str, fn: Callable[[], tuple[bool, object]]) -> bool:
        try:
            passed, detail = fn()
        except Exception as exc:  # a raising check is a failed check, not a crash
            return self.check(name, False, f"{type(exc).__name__}: {exc}")
        return self.check(name, passed, detail)

    def result(self) -> dict:
        return {
            "suite": self.name,
            "passed": all(c["passed"] for c in self.checks),
            "checks": self.checks,
        }


def suite_clifford(max_dim: int = 8) -> dict:
    rep = _Report("clifford")
    for n in range(1, max_dim + 1):
        def run(n=n):
            flags = build_clifford(n).check_relations()
            return all(flags.values()), flags
        rep.attempt(f"relations n={n}", run)
    for n, printed in PRINTED_GENERATORS.items():
        if n <= max_dim:
            gens = build_clifford(n).generators
            same = len(gens) == len(printed) and all(np.array_equal(g, p) for g, p in zip(gens, printed))
            rep.check(f"printed generators n={n}", same)
    return rep.result()


def suite_lichnerowicz(max_dim: int = 4, cutoff: int = 5, samples: int = 100, seed: int = 0) -> dict:
    rep = _Report("lichnerowicz")
    rng = random.Random(seed)
    for n in range(1, max_dim + 1):
        worst = Fraction(0)
        for _ in range(samples):
            c = [Fraction(rng.randint(-20, 20), rng.randint(1, 12)) for _ in range(n)]
            worst = max(worst, td.verify_lichnerowicz(n, c, cutoff))
        rep.check(f"M_k(c)^2 = |k+c|^2 I, n={n}, K={cutoff}, {samples} twists",
                  worst == 0, {"max_deviation": str(worst)})
    return rep.result()


def suite_circle_spectrum(cutoff: int = 2) -> dict:
    rep = _Report("circle-spectrum")
    for c in (Fraction(1, 4), Fraction(-2, 3), Fraction(0), Fraction(7, 2)):
        s = td.spectrum(1, c, cutoff)
        expected = [m + c for m in range(-cutoff, cutoff + 1)]
        rep.check(f"spectrum(1, {c}, {cutoff}) = {{m + c}}",
                  list(s.keys) == expected and all(m == 1 for _, m in s.entries),
                  [str(k) for k in s.keys])
    pairs = [
        (Fraction(1, 4), Fraction(5, 4), True),
        (Fraction(1, 4), Fraction(-3, 4), True),
        (Fraction(1, 4), Fraction(1, 2), False),
        (Fraction(0), Fraction(3), True),
        (Fraction(1, 3), Fraction(-1, 3), False),
    ]
    for c, c2, expect in pairs:
        got = td.spectra_conjugacy_check(1, c, c2, cutoff + 4)
        rep.check(f"conjugacy({c}, {c2}) = {expect}", got == expect)
    return rep.result()


def suite_index_t2(cutoff: int = 10, radius: float = 0.1, samples: int = 64) -> dict:
    rep = _Report("index-t2")
    rep.check("dim ker D at c=0 is 2", td.harmonic_spinor_dimension(2, [0, 0]) == 2)
    grid = [Fraction(i, 8) for i in range(-3, 5)]
    nonzero = [(a, b) for a in grid for b in grid if (a, b) != (0, 0)]
    rep.check("dim ker D = 0 at other grid points of the fundamental domain",
              all(td.harmonic_spinor_dimension(2, c) == 0 for c in nonzero))
    indices = {td.chiral_index(2, c, cutoff).index for c in [(0, 0)] + nonzero[::5]}
    rep.check(f"chiral_index = 0 (K={cutoff})", indices == {0}, sorted(indices))

    def windings():
        report = fi.total_first_chern(2, 2, radius, samples)
        return abs(report["total_c1"]) == 1, report["total_c1"]
    rep.attempt("sum of local windings = +-1", windings)
    symbolic = cc.family_ch_torus(2).element
    coeffs = [c for _, c in symbolic.terms]
    rep.check("symbolic slant(e^Omega, 2) has magnitude 1",
              len(coeffs) == 1 and abs(coeffs[0]) == 1, str(symbolic))
    return rep.result()


def _random_circle_path(rng: random.Random, nverts: int) -> sf.ParamPath:
    return sf.ParamPath([[Fraction(rng.randint(-12, 12), 4)] for _ in range(nverts)])


def suite_spectral_flow(cutoffs=(5, 10, 20), seed: int = 0) -> dict:
    rep = _Report("spectral-flow")
    loop = sf.ParamPath([[0], [1]], closed=True)
    rep.check("exact_flow(S^1, 0 -> 1) = 1", sf.exact_flow(1, loop, 2) == 1)
    # the loop based at 1/2 has invertible endpoints; the one based at 0 has
    # zero modes there and uses the left-continuous endpoint rule
    shifted = sf.ParamPath([[Fraction(1, 2)], [Fraction(3, 2)]], closed=True)
    for K in cutoffs:
        def agree(K=K):
            got = (
                sf.numeric_flow(sf.dirac_family(1, loop, K), endpoints="left-continuous"),
                sf.numeric_flow(sf.dirac_family(1, shifted, K)),
            )
            want = (sf.exact_flow(1, loop, K), sf.exact_flow(1, shifted, K))
            return got == want, {"numeric": list(got), "exact": list(want)}
        rep.attempt(f"numeric_flow = exact_flow on 0 -> 1 and 1/2 -> 3/2, K={K}", agree)
    for j in range(3):
        end = [0, 0, 0]
        end[j] = 1
        rep.check(f"exact_flow(T^3 loop e{j + 1}) = 0",
                  sf.exact_flow(3, sf.ParamPath([[0, 0, 0], end], closed=True), 3) == 0)
    rng = random.Random(seed)
    ok = True
    for _ in range(50):
        p = _random_circle_path(rng, rng.randint(2, 4))
        q = sf.ParamPath([p.vertices[-1].c] + [[Fraction(rng.randint(-12, 12), 4)]
                                                 for _ in range(rng.randint(1, 3))])
        K = 5
        ok &= sf.exact_flow(1, p.concat(q), K) == sf.exact_flow(1, p, K) + sf.exact_flow(1, q, K)
    rep.check("concatenation additivity on 50 random circle paths", ok)
    return rep.result()


def _theta_loop(samples: int, dims: int, powers) -> list[np.ndarray]:
    out = []
    for t in 2 * math.pi * np.arange(samples) / samples:
        d = np.ones(dims, dtype=complex)
        d[: len(powers)] = [np.exp(1j * p * t) for p in powers]
        out.append(np.diag(d))
    return out


def _random_unitary_loop(rng: np.random.Generator, dim: int, winding: int, samples: int) -> list[np.ndarray]:
    # fixed unitary conjugation of a diagonal loop with prescribed total winding
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    powers = [winding] + [0] * (dim - 1)
    return [q @ u @ q.conj().T for u in _theta_loop(samples, dim, powers)]


def suite_winding(samples: int = 64, seed: int = 0) -> dict:
    rep = _Report("winding")
    rep.check("winding(diag(e^it, 1, 1)) = 1", sf.unitary_winding(_theta_loop(samples, 3, [1])) == 1)
    rep.check("winding(diag(e^it, e^-it)) = 0", sf.unitary_winding(_theta_loop(samples, 2, [1, -1])) == 0)
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(20):
        wa, wb = (int(x) for x in rng.integers(-3, 4, size=2))
        a = _random_unitary_loop(rng, int(rng.integers(1, 4)), wa, samples)
        b = _random_unitary_loop(rng, int(rng.integers(1, 4)), wb, samples)
        ok &= sf.unitary_winding(sf.block_sum_loop(a, b)) == sf.unitary_winding(a) + sf.unitary_winding(b) == wa + wb
    rep.check("block-sum additivity on random pairs", ok)
    return rep.result()


def suite_family_index(cutoff: int = 3, grid: int = 32, fhs_grid: int = 24, seed: int = 0) -> dict:
    rep = _Report("family-index")
    jumps = fi.kernel_jump_loci(2, cutoff)
    rep.check("kernel_jump_loci(2) = {0}", [j.location for j in jumps] == [(0.0, 0.0)],
              [j.to_dict() for j in jumps])
    degrees = {}
    for r in (0.05, 0.1, 0.2):
        for m in (32, 64, 128):
            degrees[(r, m)] = sum(fi.local_winding_degree(j, r, m) for j in jumps)
    values = set(degrees.values())
    rep.check("sum of local degrees = +-1, stable in radius and samples",
              len(values) == 1 and abs(values.pop()) == 1, sorted(set(degrees.values())))

    def wcons():
        dims = {}
        for m in (grid // 2, grid):
            w = fi.build_w_construction(2, cutoff, m)
            dims[m] = sorted(set(w.fiber_dims.tolist()))
        return all(d == [1] for d in dims.values()), dims
    rep.attempt("W-construction fibers have dim W + 0 on refined grids", wcons)

    def w_independence():
        small = fi.build_w_construction(2, cutoff, grid // 4, W=(), offset=True)
        big = fi.build_w_construction(2, cutoff, grid // 4, W=((0, 0), (1, 0)), offset=True)
        diff = set((big.fiber_dims - small.fiber_dims).tolist())
        return diff == {2} and small.index == big.index == 0, sorted(diff)
    rep.attempt("W-independence of V - C^dim W", w_independence)

    magnitude = abs([c for _, c in cc.family_ch_torus(2).element.terms][0])
    rep.check("|local degree| equals symbolic magnitude", magnitude == 1)

    rng = np.random.default_rng(seed)
    for m0, expect in ((-1.0, 1), (-3.0, 0), (1.0, -1), (3.0, 0)):
        frames = fi.two_band_frames(m0, fhs_grid)
        c = fi.fhs_chern_number(frames)
        phases = np.exp(2j * np.pi * rng.random(frames.shape[:2] + (1, 1)))
        gauged = fi.fhs_chern_number(frames * phases)
        rep.check(f"FHS two-band m0={m0:g}: C={expect}, gauge invariant",
                  c == expect and gauged == c, {"C": c, "gauged": gauged})
    return rep.result()


def suite_chern_formulas() -> dict:
    rep = _Report("chern-formulas")
    p1, p2 = cc.ExteriorElement.symbol("p1", 4), cc.ExteriorElement.symbol("p2", 8)
    expected = 1 - p1 / 24 + (7 * p1 * p1 - 4 * p2) / 5760
    rep.check("a_hat(8) = 1 - p1/24 + (7 p1^2 - 4 p2)/5760", cc.a_hat(8) == expected, str(cc.a_hat(8)))
    k3 = cc.index_from_pontryagin(4, {"p1": -48})
    rep.check("index_from_pontryagin(4, p1=-48) = 2 (K3)", k3.rank_part == 2)
    for n in (2, 4, 6):
        el = cc.family_ch_torus(n).element
        terms = el.terms
        rep.check(f"family_ch_torus({n}) is a single monomial with coefficient +-1",
                  len(terms) == 1 and abs(terms[0][1]) == 1, str(el))
    zeta = bh.CupForm(3, {(1, 2, 3): 1})
    odd = cc.odd_family_ch(3, zeta)
    y = [cc.ExteriorElement.gen("y", i, 0, 3) for i in (1, 2, 3)]
    rep.check("odd_family_ch degree-1 part = 0", odd.component(1).is_zero())
    rep.check("odd_family_ch degree-3 part = zeta", odd.component(3) == y[0] * y[1] * y[2], str(odd))
    return rep.result()


def suite_gromov_lawson(dim: int = 2) -> dict:
    """Two-part certificate that T^dim carries no metric of positive scalar curvature.

    Positive scalar curvature would make every twisted D_B^+ invertible, so the
    family index would be trivial and its Chern character would be the rank
    alone. The symbolic character has a nonzero top-degree term and the
    numerical family has a genuine kernel jump.
    """
    rep = _Report("gromov-lawson")
    if dim < 2 or dim % 2:
        raise ValueError(f"gromov-lawson suite needs even dim >= 2, got {dim}")
    ch = cc.family_ch_torus(dim).element
    top = ch.component(dim)
    rep.check(f"symbolic ch(ind D_B^+) has nonzero degree-{dim} part", not top.is_zero(), str(ch))
    jumps = fi.kernel_jump_loci(dim, 1)
    kernel = td.harmonic_spinor_dimension(dim, [0] * dim)
    rep.check("numerical kernel jump at c = 0",
              [j.location for j in jumps] == [(0.0,) * dim] and kernel > 0,
              {"jump_points": [j.to_dict() for j in jumps], "dim_ker_D": kernel})
    rep.check("flat metric: scalar curvature 0 and Lichnerowicz identity exact",
              td.SCALAR_CURVATURE == 0 and td.verify_lichnerowicz(dim, [Fraction(1, 3)] * dim, 2) == 0)
    if dim == 2:
        rep.attempt("local degree at the jump is nonzero",
                    lambda: (fi.local_winding_degree(jumps[0]) != 0, fi.local_winding_degree(jumps[0])))
    return rep.result()


def suite_bar_t3(max_betti: int = 5) -> dict:
    rep = _Report("bar-t3")
    t3 = bh.CupForm(3, {(1, 2, 3): 1})
    cert = bh.nonvanishing_check(t3)
    rep.check("b=3, zeta_123=1: ranks (3,3)", cert.ranks == (3, 3), list(cert.ranks))
    rep.check("b=3 nonvanishing with explicit witnesses", cert.nonvanishing and bool(cert.witnesses))
    for b in range(1, max_betti + 1):
        r = bh.bar_ranks(bh.CupForm(b, {}))
        rep.check(f"zeta=0, b={b}: ranks (2^{b - 1}, 2^{b - 1})", r == (2 ** (b - 1),) * 2, list(r))
    rng = random.Random(0)
    ok = True
    for _ in range(20):
        b = rng.randint(3, max(3, max_betti))
        zeta = bh.CupForm.from_vector(b, [rng.randint(-2, 2) for _ in range(math.comb(b, 3))])
        g = bh.random_unimodular(b, rng)
        ok &= bh.build_complex(zeta).delta_squared_zero()
        ok &= bh.bar_ranks(zeta.transformed(g)) == bh.bar_ranks(zeta)
    rep.check("delta^2 = 0 and basis-change invariance on random forms", ok)
    return rep.result()


SUITES: dict[str, Callable[..., dict]] = {
    "clifford": suite_clifford,
    "lichnerowicz": suite_lichnerowicz,
    "circle-spectrum": suite_circle_spectrum,
    "index-t2": suite_index_t2,
    "spectral-flow": suite_spectral_flow,
    "winding": suite_winding,
    "family-index": suite_family_index,
    "chern-formulas": suite_chern_formulas,
    "gromov-lawson": suite_gromov_lawson,
    "bar-t3": suite_bar_t3,
}


def verify_suite(name: str, **params) -> dict:
    """Run one named suite; ``params`` are passed through to it."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](**params)
