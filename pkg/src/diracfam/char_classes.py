"""Exact rational exterior algebra and the index formulas evaluated in it.

Elements live in the graded-commutative algebra generated by degree-1 classes
``x1..xn`` (on the manifold), ``y1..ym`` (on the torus of flat connections)
and commuting even symbols such as ``p1`` (degree 4) or ``c1`` (degree 2).
Odd generators are kept in canonical order, all x's before all y's.

Fundamental-class pairing is taken from the right:
``<alpha * x1...xn, [M]> = alpha``, which is the usual fiber-integration sign
and reduces to reading off the coefficient of ``x1...xn`` when ``n`` is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

Odd = tuple[tuple[str, int], ...]
Even = tuple[tuple[str, int], ...]
Monomial = tuple[Odd, Even]

PONTRYAGIN_DEGREES = {"p1": 4, "p2": 8}


def _sort_odd(gens: list[tuple[str, int]]) -> tuple[int, Odd | None]:
    """Sort odd generators, returning the permutation sign (0 if one repeats)."""
    gens = list(gens)
    sign = 1
    for i in range(1, len(gens)):
        j = i
        while j > 0 and gens[j - 1] > gens[j]:
            gens[j - 1], gens[j] = gens[j], gens[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(gens, gens[1:]):
        if a == b:
            return 0, None
    return sign, tuple(gens)


def _merge_even(a: Even, b: Even) -> Even:
    powers = dict(a)
    for name, p in b:
        powers[name] = powers.get(name, 0) + p
    return tuple(sorted(powers.items()))


@dataclass(frozen=True)
class ExteriorElement:
    """Finite sum of monomials with exact rational coefficients."""

    terms: tuple[tuple[Monomial, Fraction], ...]
    nx: int = 0
    ny: int = 0
    even_degrees: tuple[tuple[str, int], ...] = ()

    # construction -----------------------------------------------------

    @classmethod
    def from_dict(cls, terms: Mapping[Monomial, Fraction], nx=0, ny=0, even_degrees=()):
        even_degrees = tuple(sorted(dict(even_degrees).items()))
        clean = tuple(sorted((m, Fraction(c)) for m, c in terms.items() if c != 0))
        return cls(clean, nx, ny, even_degrees)

    @classmethod
    def scalar(cls, value, nx=0, ny=0) -> "ExteriorElement":
        return cls.from_dict({((), ()): Fraction(value)}, nx, ny)

    @classmethod
    def gen(cls, side: str, index: int, nx=0, ny=0) -> "ExteriorElement":
        limit = {"x": nx, "y": ny}[side]
        if not 1 <= index <= limit:
            raise ValueError(f"generator {side}{index} outside {side}1..{side}{limit}")
        return cls.from_dict({(((side, index),), ()): Fraction(1)}, nx, ny)

    @classmethod
    def symbol(cls, name: str, degree: int, nx=0, ny=0) -> "ExteriorElement":
        if degree <= 0 or degree % 2:
            raise ValueError("formal symbols must have positive even degree")
        return cls.from_dict({((), ((name, 1),)): Fraction(1)}, nx, ny, {name: degree})

    # structure ---------------------------------------------------------

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self.terms)

    def _check(self, other: "ExteriorElement") -> dict[str, int]:
        if (self.nx, self.ny) != (other.nx, other.ny):
            raise ValueError(
                f"generator-set mismatch: (x{self.nx}, y{self.ny}) vs (x{other.nx}, y{other.ny})"
            )
        degs = dict(self.even_degrees)
        for name, d in other.even_degrees:
            if degs.setdefault(name, d) != d:
                raise ValueError(f"symbol {name} has conflicting degrees")
        return degs

    def monomial_degree(self, mono: Monomial) -> int:
        odd, even = mono
        degs = dict(self.even_degrees)
        return len(odd) + sum(degs[name] * p for name, p in even)

    def component(self, degree: int) -> "ExteriorElement":
        return self._filter(lambda m: self.monomial_degree(m) == degree)

    def truncate(self, max_degree: int) -> "ExteriorElement":
        return self._filter(lambda m: self.monomial_degree(m) <= max_degree)

    def _filter(self, keep) -> "ExteriorElement":
        return ExteriorElement.from_dict(
            {m: c for m, c in self.terms if keep(m)}, self.nx, self.ny, self.even_degrees
        )

    @property
    def constant(self) -> Fraction:
        return self.as_dict().get(((), ()), Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for _, c in self.terms)

    # arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "ExteriorElement":
        if isinstance(other, ExteriorElement):
            return other
        return ExteriorElement.scalar(other, self.nx, self.ny)

    def __add__(self, other):
        other = self._coerce(other)
        degs = self._check(other)
        out = self.as_dict()
        for m, c in other.terms:
            out[m] = out.get(m, 0) + c
        return ExteriorElement.from_dict(out, self.nx, self.ny, degs)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ExteriorElement):
            return wedge(self, other)
        f = Fraction(other)
        return ExteriorElement.from_dict(
            {m: c * f for m, c in self.terms}, self.nx, self.ny, self.even_degrees
        )

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self * (1 / Fraction(other))

    def __pow__(self, k: int):
        out = ExteriorElement.scalar(1, self.nx, self.ny)
        for _ in range(k):
            out = wedge(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, ExteriorElement):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == other.terms and (self.nx, self.ny) == (other.nx, other.ny)

    def __hash__(self):
        return hash((self.terms, self.nx, self.ny))

    # rendering ---------------------------------------------------------

    def monomial_str(self, mono: Monomial) -> str:
        odd, even = mono
        parts = [f"{s}{i}" for s, i in odd]
        parts += [name if p == 1 else f"{name}^{p}" for name, p in even]
        return "*".join(parts) if parts else "1"

    def to_dict(self) -> dict[str, str]:
        """Sorted ``monomial -> "p/q"`` mapping (JSON rendering)."""
        return {self.monomial_str(m): _frac_str(c) for m, c in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            body = self.monomial_str(m)
            if body == "1":
                text = _frac_str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{_frac_str(mag)}*{body}"
            out.append(("-" if sign == "-" else "") + text if i == 0 else f" {sign} {text}")
        return "".join(out)


def _frac_str(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def wedge(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    """Graded-commutative product with exact coefficients.

    >>> x1 = ExteriorElement.gen("x", 1, 1, 1); y1 = ExteriorElement.gen("y", 1, 1, 1)
    >>> str(wedge(y1, x1))
    '-x1*y1'
    """
    degs = a._check(b)
    out: dict[Monomial, Fraction] = {}
    for (odd_a, even_a), ca in a.terms:
        for (odd_b, even_b), cb in b.terms:
            sign, odd = _sort_odd(list(odd_a) + list(odd_b))
            if not sign:
                continue
            mono = (odd, _merge_even(even_a, even_b))
            out[mono] = out.get(mono, 0) + sign * ca * cb
    return ExteriorElement.from_dict(out, a.nx, a.ny, degs)


def exp_nilpotent(a: ExteriorElement, max_degree: int | None = None) -> ExteriorElement:
    """``sum_j a^j / j!`` for ``a`` without degree-0 part.

    Elements involving even symbols are only nilpotent after truncation, so
    ``max_degree`` is then required.
    """
    if a.constant != 0:
        raise ValueError("exp_nilpotent needs an element without degree-0 part")
    if max_degree is None and any(even for (_, even), _ in a.terms):
        raise ValueError("max_degree is required when even symbols are present")
    total = ExteriorElement.scalar(1, a.nx, a.ny)
    power = total
    j = 0
    while True:
        j += 1
        power = wedge(power, a)
        if max_degree is not None:
            power = power.truncate(max_degree)
        if power.is_zero():
            return total
        total = total + power / math.factorial(j)


def omega_class(nx: int, ny: int | None = None) -> ExteriorElement:
    """``Omega = sum_i x_i y_i`` on M x T_M."""
    ny = nx if ny is None else ny
    out = ExteriorElement.scalar(0, nx, ny)
    for i in range(1, min(nx, ny) + 1):
        out = out + wedge(ExteriorElement.gen("x", i, nx, ny), ExteriorElement.gen("y", i, nx, ny))
    return out


def a_hat(n: int, p1=None, p2=None, nx: int = 0, ny: int = 0) -> ExteriorElement:
    """A-hat series ``1 - p1/24 + (7 p1^2 - 4 p2)/5760`` truncated above degree ``n``.

    ``p1``/``p2`` left as None stay formal; numbers are substituted after
    truncation. Beyond dimension 8 the series needs classes not modelled
    here, so only the all-zero (flat) data is accepted there.
    """
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    if n > 8:
        if p1 is None or p2 is None or Fraction(p1) != 0 or Fraction(p2) != 0:
            raise ValueError("A-hat beyond dimension 8 is only available for vanishing p1, p2")
        return ExteriorElement.scalar(1, nx, ny)
    P1 = ExteriorElement.symbol("p1", 4, nx, ny)
    P2 = ExteriorElement.symbol("p2", 8, nx, ny)
    series = 1 - P1 / 24 + (7 * P1 * P1 - 4 * P2) / 5760
    series = series.truncate(n)
    subs = {}
    if p1 is not None:
        subs["p1"] = Fraction(p1)
    if p2 is not None:
        subs["p2"] = Fraction(p2)
    return substitute(series, subs)


def substitute(a: ExteriorElement, values: Mapping[str, Fraction]) -> ExteriorElement:
    """Replace even symbols by rational numbers."""
    out: dict[Monomial, Fraction] = {}
    for (odd, even), c in a.terms:
        kept = []
        for name, p in even:
            if name in values:
                c = c * Fraction(values[name]) ** p
            else:
                kept.append((name, p))
        mono = (odd, tuple(kept))
        out[mono] = out.get(mono, 0) + c
    degs = {k: v for k, v in a.even_degrees if k not in values}
    return ExteriorElement.from_dict(out, a.nx, a.ny, degs)


def slant_fundamental_class(a: ExteriorElement, n: int | None = None,
                            pairing: Mapping[tuple[int, ...], Fraction] | None = None) -> ExteriorElement:
    """Evaluate the x-part on the fundamental class of the n-manifold M.

    With no ``pairing``, ``<x1...xn, [M]> = +1`` and every other x-monomial of
    degree n pairs to 0. A ``pairing`` maps sorted x-index tuples of length n
    to their values (e.g. a triple cup product). The pairing is applied from
    the right, so ``y_J x_I`` evaluates to ``<x_I,[M]> y_J`` and the canonical
    form ``x_I y_J`` picks up ``(-1)^(|I||J|)``.
    """
    n = a.nx if n is None else n
    if pairing is None:
        pairing = {tuple(range(1, n + 1)): Fraction(1)}
    out: dict[Monomial, Fraction] = {}
    for (odd, even), c in a.terms:
        xs = tuple(i for s, i in odd if s == "x")
        if len(xs) != n or even:
            continue
        value = Fraction(pairing.get(xs, 0))
        if not value:
            continue
        ys = tuple(g for g in odd if g[0] == "y")
        sign = -1 if (n * len(ys)) % 2 else 1
        mono = (ys, ())
        out[mono] = out.get(mono, 0) + sign * value * c
    return ExteriorElement.from_dict(out, 0, a.ny)


@dataclass(frozen=True)
class IndexFormulaReport:
    description: str
    element: ExteriorElement
    rank_part: Fraction
    integral: bool

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "element": self.element.to_dict(),
            "rendered": str(self.element),
            "rank_part": _frac_str(self.rank_part),
            "integral": self.integral,
        }


def _report(description: str, element: ExteriorElement) -> IndexFormulaReport:
    return IndexFormulaReport(description, element, element.constant, element.is_integral())


def family_ch_torus(n: int) -> IndexFormulaReport:
    """Chern character of the index bundle of the twisted Dirac family on T^n."""
    if n < 2 or n % 2:
        raise ValueError(f"even n >= 2 required (odd n: use odd_family_ch), got n={n}")
    omega = omega_class(n)
    integrand = wedge(exp_nilpotent(omega), a_hat(n, 0, 0, n, n))
    return _report(f"ch(ind D_B^+) over the parameter torus of T^{n}",
                   slant_fundamental_class(integrand, n))


def odd_family_ch(b1: int, cup) -> ExteriorElement:
    """Odd Chern character ``<e^Omega, [Y]>`` of the Dirac family on a 3-manifold.

    A-hat of a 3-manifold is 1; x-monomials of degree 3 pair with ``[Y]``
    through the triple cup product ``cup``.
    """
    from diracfam.bar_homology import CupForm

    cup = cup if isinstance(cup, CupForm) else CupForm(b1, cup)
    if cup.b != b1:
        raise ValueError("cup form rank does not match b1")
    omega = omega_class(b1)
    integrand = exp_nilpotent(omega)
    pairing = {ijk: Fraction(v) for ijk, v in cup.coefficients.items()}
    return slant_fundamental_class(integrand, 3, pairing)


def pontryagin_pairing(element: ExteriorElement, numbers: Mapping[str, Fraction]) -> Fraction:
    """Pair a polynomial in Pontryagin symbols with Pontryagin numbers,
    keyed by monomial string (``"p1"``, ``"p1^2"``, ``"p2"``)."""
    total = Fraction(0)
    for mono, c in element.terms:
        key = element.monomial_str(mono)
        if key not in numbers:
            raise ValueError(f"missing Pontryagin number for {key}")
        total += c * Fraction(numbers[key])
    return total


def index_from_pontryagin(n: int, numbers: Mapping[str, Fraction] | None = None) -> IndexFormulaReport:
    """A-hat number ``<A-hat(M), [M]>`` from Pontryagin numbers of a spin n-manifold.

    For ``n = 4`` pass ``{"p1": <p1,[M]>}``; for ``n = 8`` pass ``{"p1^2": ..., "p2": ...}``.
    ``n = 2 mod 4`` has no top-degree term and gives 0. A non-integer value is
    flagged, never raised: it signals data inconsistent with a spin manifold.
    """
    if n < 0 or n % 2:
        raise ValueError(f"index of D+ needs even dimension, got n={n}")
    top = a_hat(n).component(n)
    value = pontryagin_pairing(top, numbers or {})
    element = ExteriorElement.scalar(value)
    return IndexFormulaReport(f"ind(D+) for n={n}", element, value, value.denominator == 1)


def chern_character(rank: int, c1=None, c2=None) -> ExteriorElement:
    """``rank + c1 + (c1^2 - 2 c2)/2`` truncated at degree 4.

    ``c1``/``c2`` may be ExteriorElements, symbol names (formal classes of
    degree 2 and 4) or None for zero.
    """
    def coerce(c, degree):
        if c is None or (not isinstance(c, (str, ExteriorElement)) and c == 0):
            return ExteriorElement.scalar(0)
        if isinstance(c, str):
            return ExteriorElement.symbol(c, degree)
        return c

    a, b = coerce(c1, 2), coerce(c2, 4)
    if (a.nx, a.ny) != (b.nx, b.ny):
        b = ExteriorElement.from_dict(b.as_dict(), a.nx, a.ny, b.even_degrees)
    ch = ExteriorElement.scalar(rank, a.nx, a.ny) + a + (a * a - 2 * b) / 2
    return ch.truncate(4)
