"""Index bundle of the chiral Dirac family over the parameter torus.

Orientation convention: the parameter plane is oriented by dc1 ^ dc2 and
loops run counterclockwise. With the mode symbol of ``torus_dirac`` the chiral
block of the zero mode on T^2 is ``-i(c1 + i c2)``, whose winding around the
unique kernel jump is +1; this is the artifact's sign for ``<c1(ind), [T]>``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from diracfam.torus_dirac import chiral_block, mode_box

ORIENTATION = "dc1^dc2, counterclockwise loops"
CERTIFICATE_THRESHOLD = 1e-8


class SurjectivityError(ValueError):
    """Im(D+) + W does not fill the truncated target at some grid point."""


@dataclass(frozen=True)
class JumpPoint:
    """Parameter value with nontrivial kernel together with the modes responsible."""

    location: tuple[float, ...]
    modes: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.location)

    def local_symbol(self, c) -> np.ndarray:
        """Direct sum of the chiral blocks of the jumping modes at ``c``."""
        if not self.modes:
            return np.eye(0, dtype=complex)
        blocks = chiral_block(self.n, c, np.array(self.modes, dtype=np.int64))
        return scipy.linalg.block_diag(*blocks)

    def to_dict(self) -> dict:
        return {"location": list(self.location), "jumping_modes": [list(k) for k in self.modes]}


def kernel_jump_loci(n: int, K: int = 2, domain: str = "centered") -> list[JumpPoint]:
    """All points of the fundamental domain where some mode solves ``k + c = 0``.

    ``domain`` is ``"centered"`` for (-1/2, 1/2]^n or ``"shifted"`` for [0, 1)^n.
    """
    if n % 2:
        raise ValueError(f"kernel jumps of D+ need even dimension, got n={n}")
    if domain == "centered":
        inside = lambda x: -0.5 < x <= 0.5
    elif domain == "shifted":
        inside = lambda x: 0.0 <= x < 1.0
    else:
        raise ValueError(f"unknown domain {domain!r}")
    jumps: dict[tuple, list] = {}
    for k in mode_box(n, K):
        c0 = tuple(float(-x) + 0.0 for x in k)
        if all(inside(x) for x in c0):
            jumps.setdefault(c0, []).append(tuple(int(x) for x in k))
    return [JumpPoint(c0, tuple(modes)) for c0, modes in sorted(jumps.items())]


def make_jump_point(c0: Sequence[float], modes: Sequence[Sequence[int]] | None = None) -> JumpPoint:
    """JumpPoint at ``c0``; modes default to those with ``k + c0 = 0``."""
    c0 = tuple(float(x) for x in c0)
    if modes is None:
        k = tuple(-x for x in c0)
        modes = [tuple(int(round(x)) for x in k)] if all(float(x).is_integer() for x in k) else []
    return JumpPoint(c0, tuple(tuple(int(x) for x in m) for m in modes))


def local_winding_degree(jump: JumpPoint, radius: float = 0.1, samples: int = 64,
                         tol: float = 1e-10) -> int:
    """Winding of ``det`` of the jumping-mode chiral symbol on a small loop.

    The loop ``c0 + r (cos t, sin t)`` is counterclockwise in the (c1, c2)
    plane. Other jump points sit at integer distance, so ``radius < 1`` keeps
    them outside.
    """
    if jump.n != 2:
        raise ValueError("local winding degree is defined for a 2-parameter family")
    if not 0 < radius < 1:
        raise ValueError("radius must lie in (0, 1) so the loop encloses a single jump point")
    if samples < 8:
        raise ValueError("need at least 8 samples")
    theta = 2 * math.pi * np.arange(samples) / samples
    c0 = np.array(jump.location)
    dets = []
    for t in theta:
        c = c0 + radius * np.array([math.cos(t), math.sin(t)])
        m = jump.local_symbol(c)
        dets.append(np.linalg.det(m) if m.size else 1.0 + 0j)
    dets = np.array(dets)
    if np.any(np.abs(dets) < tol):
        raise ValueError("loop passes within tolerance of a zero of the chiral symbol")
    steps = np.angle(np.roll(dets, -1) / dets)
    if np.any(np.abs(steps) > 0.75 * math.pi):
        raise ValueError("loop sampled too coarsely to unwrap the phase")
    return int(round(float(np.sum(steps)) / (2 * math.pi)))


def total_first_chern(n: int = 2, K: int = 2, radius: float = 0.1, samples: int = 64) -> dict:
    """``<c1(ind D+), [T_M]>`` as the sum of local degrees over the jump loci."""
    jumps = kernel_jump_loci(n, K)
    degrees = [local_winding_degree(j, radius, samples) for j in jumps]
    return {
        "jump_points": [j.to_dict() for j in jumps],
        "local_degrees": degrees,
        "total_c1": int(sum(degrees)),
        "convention": ORIENTATION,
    }


@dataclass
class WConstruction:
    """Finite-truncation W-construction: ``V_c = (D_c+)^-1(W)`` on a grid."""

    n: int
    K: int
    W: tuple[tuple[int, ...], ...]
    grid: np.ndarray
    fibers: list[np.ndarray] = field(repr=False)
    certificates: np.ndarray = field(repr=False)

    @property
    def fiber_dims(self) -> np.ndarray:
        return np.array([f.shape[1] for f in self.fibers])

    @property
    def index(self) -> int:
        """Rank of the virtual bundle ``V - C^dim W``."""
        dims = set(self.fiber_dims.tolist())
        if len(dims) != 1:
            raise ValueError("fiber dimension is not constant over the grid")
        return dims.pop() - len(self.W)


def _grid(n: int, m: int, offset: bool) -> np.ndarray:
    # cells of the fundamental domain (-1/2, 1/2]^n; offset grids avoid c = 0
    shift = 0.5 if offset else 1.0
    axis = -0.5 + (np.arange(m) + shift) / m
    return np.array(list(itertools.product(axis, repeat=n)))


def build_w_construction(n: int = 2, K: int = 3, m: int = 16,
                         W: Sequence[Sequence[int]] | None = ((0, 0),),
                         offset: bool = False,
                         threshold: float = CERTIFICATE_THRESHOLD,
                         workers: int = 1) -> WConstruction:
    """Build ``V_c`` for every grid point, checking ``Im(D_c+) + W = target``.

    ``W`` lists target (S-) modes, each contributing the full S- fiber of that
    mode. The certificate at a grid point is the smallest singular value of
    the augmented map ``[D_c+ | inclusion of W]`` onto the target. Grid
    points are independent; ``workers > 1`` evaluates them in a thread pool
    with results kept in grid order.

    Raises
    ------
    SurjectivityError
        If some grid point fails the certificate; W must then be enlarged.
    """
    if n % 2:
        raise ValueError("the W-construction is for the chiral operator D+ (even n)")
    W = tuple(tuple(int(x) for x in k) for k in (W or ()))
    modes = mode_box(n, K)
    index = {tuple(int(x) for x in k): i for i, k in enumerate(modes)}
    for k in W:
        if k not in index:
            raise ValueError(f"W mode {k} lies outside the truncation")
    half = 2 ** (n // 2) // 2
    dim = len(modes) * half
    inc = np.zeros((dim, len(W) * half), dtype=complex)
    for j, k in enumerate(W):
        i = index[k]
        inc[i * half:(i + 1) * half, j * half:(j + 1) * half] = np.eye(half)
    # orthogonal projection onto the complement of W in the target
    proj = np.eye(dim) - inc @ inc.conj().T
    grid = _grid(n, m, offset)

    def fiber(c):
        dplus = scipy.linalg.block_diag(*chiral_block(n, c, modes))
        aug = np.hstack([dplus, inc])
        cert = scipy.linalg.svdvals(aug)[dim - 1] if aug.shape[1] >= dim else 0.0
        if cert < threshold:
            raise SurjectivityError(
                f"surjectivity certificate fails at c={tuple(float(x) for x in np.round(c, 12))}: "
                f"smallest singular value {cert:.3e} < {threshold:g}"
            )
        return scipy.linalg.null_space(proj @ dplus, rcond=threshold), cert

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fiber, grid))
    else:
        results = [fiber(c) for c in grid]
    fibers = [f for f, _ in results]
    certs = [c for _, c in results]
    return WConstruction(n, K, W, grid, fibers, np.array(certs))


def fhs_chern_number(frames: np.ndarray, wrap: tuple | None = None,
                     min_overlap: float = 1e-6) -> int:
    """Plaquette (link-variable) Chern number of a frame field on a periodic grid.

    Parameters
    ----------
    frames : ndarray, shape (m1, m2, d, r)
        Orthonormal frame (r columns in C^d) at each grid point, with the
        first axis along c1 and the second along c2.
    wrap : (G1, G2), optional
        Unitaries identifying the fiber past the last grid row/column with
        the first, ``frame[m1, j] = G1[j] @ frame[0, j]`` and
        ``frame[i, m2] = G2[i] @ frame[i, 0]``. Each may be a single (d, d)
        matrix or a per-point stack of shape (m2, d, d) resp. (m1, d, d),
        which allows gauge-twisted identifications. Default: plain periodicity.

    Returns
    -------
    int
        ``c1 = (i/2pi) * integral of tr(curvature)`` of the projected
        connection, oriented by dc1 ^ dc2. With links
        ``U_mu = det(F(p)^* F(p + mu)) / |...|`` the link phase is ``exp(-i A)``
        for the Berry potential ``A = i<n|dn>``, so this equals minus
        ``(1/2pi) * sum of arg(U1 U2 U1^-1 U2^-1)`` over counterclockwise
        plaquettes.
    """
    frames = np.asarray(frames, dtype=complex)
    if frames.ndim != 4:
        raise ValueError("frames must have shape (m1, m2, d, r)")
    m1, m2, d, _ = frames.shape
    g1, g2 = wrap if wrap is not None else (np.eye(d), np.eye(d))
    g1 = np.asarray(g1, dtype=complex)
    g2 = np.asarray(g2, dtype=complex)
    if g1.shape not in ((d, d), (m2, d, d)) or g2.shape not in ((d, d), (m1, d, d)):
        raise ValueError("wrap unitaries must have shape (d, d) or a per-point stack")
    if g2.ndim == 3:
        g2 = g2[:, None]
    shift1 = np.concatenate([frames[1:], (g1 @ frames[:1])], axis=0)
    shift2 = np.concatenate([frames[:, 1:], (g2 @ frames[:, :1])], axis=1)

    def link(a, b):
        ov = np.linalg.det(np.einsum("...dr,...ds->...rs", a.conj(), b))
        if np.any(np.abs(ov) < min_overlap):
            raise ValueError("plaquette overlap determinant below threshold: grid too coarse")
        return ov / np.abs(ov)

    u1 = link(frames, shift1)
    u2 = link(frames, shift2)
    u2_next1 = np.concatenate([u2[1:], u2[:1]], axis=0)
    u1_next2 = np.concatenate([u1[:, 1:], u1[:, :1]], axis=1)
    flux = np.angle(u1 * u2_next1 / (u1_next2 * u2))
    total = -float(np.sum(flux)) / (2 * math.pi)
    c = round(total)
    if abs(total - c) > 1e-6:
        raise ValueError(f"non-integral plaquette sum {total}")
    return int(c)


def two_band_hamiltonian(c1: float, c2: float, m0: float) -> np.ndarray:
    """``sin c1 sx + sin c2 sy + (m0 + cos c1 + cos c2) sz``."""
    dz = m0 + math.cos(c1) + math.cos(c2)
    return np.array(
        [[dz, math.sin(c1) - 1j * math.sin(c2)], [math.sin(c1) + 1j * math.sin(c2), -dz]],
        dtype=complex,
    )


def two_band_frames(m0: float, m: int = 24) -> np.ndarray:
    """Lower-band eigenvectors of the two-band family on an m x m grid of [0, 2pi)^2."""
    axis = 2 * math.pi * np.arange(m) / m
    out = np.empty((m, m, 2, 1), dtype=complex)
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            _, vecs = np.linalg.eigh(two_band_hamiltonian(a, b, m0))
            out[i, j, :, 0] = vecs[:, 0]
    return out
