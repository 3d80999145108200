"""Spectral flow of self-adjoint families and winding of unitary loops.

Crossing convention: an eigenvalue moving from ``< 0`` to ``>= 0`` counts +1
(left-continuous counting), so the circle family ``i d/dt + c``, ``c: 0 -> 1``,
has flow +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from diracfam.torus_dirac import TwistParameter, mode_box, mode_symbols


class NonConvergenceError(RuntimeError):
    """Step refinement hit its budget before eigenvalue branches could be matched."""


class AliasingError(ValueError):
    """A sampled phase step is too large to be unwrapped unambiguously."""


@dataclass(frozen=True)
class ParamPath:
    """Piecewise-linear path in the universal cover of the parameter torus."""

    vertices: tuple[TwistParameter, ...]
    closed: bool = False

    def __init__(self, vertices, closed: bool = False):
        verts = tuple(TwistParameter(v) for v in vertices)
        if len(verts) < 2:
            raise ValueError("a path needs at least 2 vertices")
        n = verts[0].n
        if any(v.n != n for v in verts):
            raise ValueError("all vertices must have the same dimension")
        if closed:
            diff = TwistParameter([b - a for a, b in zip(verts[0].c, verts[-1].c)])
            if not diff.is_integral():
                raise ValueError("closed path: last - first must be integral")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "closed", bool(closed))

    @property
    def n(self) -> int:
        return self.vertices[0].n

    def sup_norm(self):
        return max(v.sup_norm() for v in self.vertices)

    def __call__(self, t: float) -> np.ndarray:
        """Point at parameter ``t`` in [0, 1], uniform in segment index."""
        segs = len(self.vertices) - 1
        s = min(max(t, 0.0), 1.0) * segs
        i = min(int(math.floor(s)), segs - 1)
        a = self.vertices[i].as_floats()
        b = self.vertices[i + 1].as_floats()
        return a + (s - i) * (b - a)

    def concat(self, other: "ParamPath") -> "ParamPath":
        if other.vertices[0] != self.vertices[-1]:
            raise ValueError("paths do not share an endpoint")
        return ParamPath(self.vertices + other.vertices[1:])

    def reversed(self) -> "ParamPath":
        return ParamPath(self.vertices[::-1], self.closed)

    def to_dict(self) -> dict:
        return {"vertices": [[_out(x) for x in v.c] for v in self.vertices], "closed": self.closed}


def _out(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return x


def exact_flow(n: int, path: ParamPath, K: int) -> int:
    """Analytic spectral flow of the twisted Dirac family along ``path``.

    On the circle the branch ``m + c(t)`` is monotone on each linear segment,
    and the number of branches passing from ``< 0`` to ``>= 0`` between
    ``c_a`` and ``c_b`` is ``floor(c_b) - floor(c_a)``. For ``n >= 2`` every
    branch is ``+|k + c(t)|`` or ``-|k + c(t)|``; these touch zero without
    changing sign and contribute nothing.
    """
    path = path if isinstance(path, ParamPath) else ParamPath(path)
    if path.n != n:
        raise ValueError(f"path dimension {path.n} does not match n={n}")
    if K < path.sup_norm() + 1:
        raise ValueError(
            f"path exits the truncation-safe region: need K >= {path.sup_norm() + 1}, got K={K}"
        )
    if n > 1:
        return 0
    flow = 0
    for a, b in zip(path.vertices, path.vertices[1:]):
        flow += math.floor(b.c[0]) - math.floor(a.c[0])
    return flow


@dataclass
class HermitianFamily:
    """Continuous Hermitian family ``t -> H(t)`` on [0, 1] with initial sample times.

    ``matrix`` is evaluated at the sample times and, during step refinement,
    at midpoints.
    """

    matrix: Callable[[float], np.ndarray]
    times: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.0, 65))
    herm_tol: float = 1e-12

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) < 2 or np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing with at least 2 points")

    def eigenvalues(self, t: float) -> np.ndarray:
        h = np.atleast_2d(np.asarray(self.matrix(t), dtype=complex))
        if np.max(np.abs(h - h.conj().T), initial=0.0) > self.herm_tol:
            raise ValueError(f"matrix at t={t} is not Hermitian")
        return np.linalg.eigvalsh(h)


def _step_crossings(lo: np.ndarray, hi: np.ndarray, tol: float) -> int:
    """Signed crossings per sorted branch; ``|lambda| <= tol`` counts as ``>= 0``."""
    neg_lo = lo < -tol
    neg_hi = hi < -tol
    return int(np.sum(neg_lo & ~neg_hi)) - int(np.sum(~neg_lo & neg_hi))


def _matched(lo: np.ndarray, hi: np.ndarray, max_shift: float, tol: float) -> bool:
    """Sorted branches are matched when no eigenvalue moves farther than ``max_shift``."""
    shift = np.abs(hi - lo)
    return bool(np.all(shift <= max_shift + tol))


def numeric_flow(
    family: HermitianFamily,
    tol: float = 1e-9,
    max_shift: float = 0.25,
    max_depth: int = 10,
    endpoints: str = "strict",
) -> int:
    """Spectral flow by sorted-eigenvalue branch tracking.

    Each sample step is halved (up to ``2**max_depth`` pieces) until every
    sorted eigenvalue moves by at most ``max_shift``; crossings are then read
    off per branch with the left-continuous convention.

    ``endpoints="strict"`` requires invertible endpoints. With
    ``endpoints="left-continuous"`` an endpoint eigenvalue in ``[-tol, tol]``
    is counted as ``>= 0``, the same rule used for interior samples; this is
    the flow of ``H(t) + eps`` for small ``eps > 0``.

    Raises
    ------
    ValueError
        If ``endpoints="strict"`` and an endpoint has an eigenvalue in ``[-tol, tol]``.
    NonConvergenceError
        If the refinement budget is exhausted.
    """
    if endpoints not in ("strict", "left-continuous"):
        raise ValueError(f"endpoints must be 'strict' or 'left-continuous', got {endpoints!r}")
    t0, t1 = family.times[0], family.times[-1]
    ev = {t: family.eigenvalues(t) for t in family.times}
    for t in (t0, t1):
        if endpoints == "strict" and np.any(np.abs(ev[t]) <= tol):
            raise ValueError(f"endpoint t={t} has an eigenvalue within {tol} of 0")
    flow = 0
    for a, b in zip(family.times, family.times[1:]):
        stack = [(a, b, ev[a], ev[b], 0)]
        while stack:
            lo_t, hi_t, lo, hi, depth = stack.pop()
            if len(lo) != len(hi):
                raise ValueError("matrix size changed along the family")
            if _matched(lo, hi, max_shift, tol):
                flow += _step_crossings(lo, hi, tol)
                continue
            if depth >= max_depth:
                raise NonConvergenceError(
                    f"branches not matched on [{lo_t}, {hi_t}] after {max_depth} halvings"
                )
            mid = 0.5 * (lo_t + hi_t)
            mv = family.eigenvalues(mid)
            stack.append((mid, hi_t, mv, hi, depth + 1))
            stack.append((lo_t, mid, lo, mv, depth + 1))
    return flow


def dirac_family(n: int, path: ParamPath, K: int, samples: int = 65) -> HermitianFamily:
    """Mode-box truncation of the twisted Dirac family along ``path`` as a
    block-diagonal Hermitian family."""
    path = path if isinstance(path, ParamPath) else ParamPath(path)
    modes = mode_box(n, K)
    segs = len(path.vertices) - 1
    times = np.linspace(0.0, 1.0, segs * (samples - 1) + 1)

    def matrix(t: float) -> np.ndarray:
        blocks = mode_symbols(n, path(t), modes)
        m, d, _ = blocks.shape
        out = np.zeros((m * d, m * d), dtype=complex)
        for i in range(m):
            out[i * d:(i + 1) * d, i * d:(i + 1) * d] = blocks[i]
        return out

    return HermitianFamily(matrix, times)


def unitary_winding(loop: Sequence[np.ndarray], max_phase_step: float = 0.75 * math.pi,
                    close_tol: float = 1e-9) -> int:
    """Winding number of ``det`` along a sampled loop of unitaries.

    The loop closes from the last sample back to the first; a repeated final
    sample equal to the first is accepted.
    """
    mats = [np.atleast_2d(np.asarray(u, dtype=complex)) for u in loop]
    if len(mats) < 2:
        raise ValueError("a loop needs at least 2 samples")
    dets = np.array([np.linalg.det(u) for u in mats])
    if np.any(np.abs(np.abs(dets) - 1.0) > 1e-6):
        raise ValueError("samples are not unitary (|det| != 1)")
    if np.allclose(mats[0], mats[-1], atol=close_tol):
        dets = dets[:-1]
    steps = np.angle(np.roll(dets, -1) / dets)
    if np.any(np.abs(steps) >= max_phase_step):
        raise AliasingError(
            f"phase step {float(np.max(np.abs(steps))):.3f} exceeds {max_phase_step:.3f}; sample finer"
        )
    total = float(np.sum(steps)) / (2 * math.pi)
    w = round(total)
    if abs(total - w) > 1e-6:
        raise AliasingError("phase steps do not sum to a multiple of 2*pi")
    return int(w)


def block_sum_loop(a: Sequence[np.ndarray], b: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Pointwise direct sum of two sampled loops of equal length."""
    if len(a) != len(b):
        raise ValueError("loops must have the same number of samples")
    out = []
    for x, y in zip(a, b):
        x, y = np.atleast_2d(x), np.atleast_2d(y)
        z = np.zeros((x.shape[0] + y.shape[0],) * 2, dtype=complex)
        z[: x.shape[0], : x.shape[0]] = x
        z[x.shape[0]:, x.shape[0]:] = y
        out.append(z)
    return out
