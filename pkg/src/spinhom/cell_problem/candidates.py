"""Explicit feasible fields built from smaller cell minimizers, with the
upper bounds their construction guarantees.

Both bounds charge every bond that is not internal to a copied block to
its source node, at most ``kernel.bound`` per bond and ``|xi-set|`` bonds
per node.  That per-node constant is ``node_constant(kernel, m)``.
"""
from __future__ import annotations

import numpy as np

from ..energy import total_energy
from ..errors import BadCount, DimensionMismatch, InvalidParams
from ..kernels import InteractionKernel
from ..lattice import LatticeDomain, SpinField
from ..sphere_geom import decompose_into_unit_sum

SPHERE_TOL = 1e-12
FLOOR_TOL = 1e-12


def node_constant(kernel: InteractionKernel, m: int) -> float:
    """Largest energy a single node can carry as the source of its bonds."""
    return kernel.bound * len(kernel.xi_set(m))


def _side(f: SpinField) -> int:
    shape = f.domain.shape
    if len(set(shape)) != 1:
        raise DimensionMismatch(f"expected a cube, got shape {shape}")
    return shape[0]


def _fill(residual_sum: np.ndarray, count: int, z: np.ndarray) -> np.ndarray:
    """``count`` unit vectors summing to ``residual_sum``."""
    N = len(z)
    if count == 0:
        return np.zeros((0, N))
    zn = float(np.linalg.norm(z))
    if zn >= 1.0 - SPHERE_TOL:
        return np.tile(z / zn, (count, 1))
    if count == 1:
        rn = float(np.linalg.norm(residual_sum))
        if abs(rn - 1.0) > 1e-9:
            raise BadCount("a single filler node cannot absorb a residual of norm " f"{rn!r}")
        return (residual_sum / rn)[None, :]
    return decompose_into_unit_sum(residual_sum, count)


def _blocks(values: np.ndarray, side: int, m: int, N: int):
    return values.reshape((side,) * m + (N,))


def tiled_candidate(u_t: SpinField, s: int, z=None) -> SpinField:
    """Tile floor(s/t)^m copies of u_t into Q_s and fill the rest so the average is exactly z."""
    t = _side(u_t)
    m, N = u_t.domain.m, u_t.N
    if s <= t:
        raise InvalidParams(f"need s > t, got s = {s}, t = {t}")
    z = u_t.average() if z is None else np.asarray(z, dtype=float).reshape(-1)
    if len(z) != N:
        raise DimensionMismatch(f"target has dimension {len(z)}, field has N = {N}")
    q = s // t
    grid = np.zeros((s,) * m + (N,))
    mask = np.zeros((s,) * m, dtype=bool)
    block = _blocks(u_t.values, t, m, N)
    covered = tuple(slice(0, q * t) for _ in range(m))
    grid[covered] = np.tile(block, (q,) * m + (1,))
    mask[covered] = True

    flat = grid.reshape(-1, N)
    free = np.flatnonzero(~mask.ravel())
    residual_sum = s ** m * z - flat[mask.ravel()].sum(axis=0)
    flat[free] = _fill(residual_sum, len(free), z)
    return SpinField(LatticeDomain.cube(s, m), flat)


def tiling_bound(kernel: InteractionKernel, density_t: float, t: int, s: int, m: int) -> float:
    """Right-hand side of the near-subadditivity estimate for ``tiled_candidate``."""
    q = s // t
    R = float(kernel.range_R)
    boundary = s ** m - q ** m * t ** m + q ** m * ((t + R) ** m - max(t - R, 0.0) ** m)
    return (q * t / s) ** m * density_t + node_constant(kernel, m) * boundary / s ** m


def mixing_candidate(u1: SpinField, u2: SpinField, t: float, h: int) -> SpinField:
    """Stripes of u1 (bottom) and u2 (top) tiles along the last axis of Q_h.

    floor((h/k)t) layers of u1 and floor((h/k)(1-t)) layers of u2; the layers
    in between are filled so the average is exactly t z1 + (1-t) z2.
    """
    k = _side(u1)
    if _side(u2) != k or u1.domain.m != u2.domain.m or u1.N != u2.N:
        raise DimensionMismatch("u1 and u2 must live on the same cube with the same N")
    if not 0.0 <= t <= 1.0:
        raise InvalidParams(f"t must lie in [0, 1], got {t}")
    if h % k:
        raise InvalidParams(f"h = {h} is not a multiple of k = {k}")
    m, N = u1.domain.m, u1.N
    r = h // k
    a, b = mixing_layers(t, h, k)
    z = t * u1.average() + (1.0 - t) * u2.average()

    grid = np.zeros((h,) * m + (N,))
    mask = np.zeros((h,) * m, dtype=bool)
    lead = tuple(slice(None) for _ in range(m - 1))
    for u, lo, hi in ((u1, 0, a * k), (u2, h - b * k, h)):
        if hi > lo:
            block = _blocks(u.values, k, m, N)
            grid[lead + (slice(lo, hi),)] = np.tile(block, (r,) * (m - 1) + ((hi - lo) // k, 1))
            mask[lead + (slice(lo, hi),)] = True

    flat = grid.reshape(-1, N)
    free = np.flatnonzero(~mask.ravel())
    residual_sum = h ** m * z - flat[mask.ravel()].sum(axis=0)
    flat[free] = _fill(residual_sum, len(free), z)
    return SpinField(LatticeDomain.cube(h, m), flat)


def mixing_layers(t: float, h: int, k: int) -> tuple[int, int]:
    r = h // k
    return int(np.floor(r * t + FLOOR_TOL)), int(np.floor(r * (1.0 - t) + FLOOR_TOL))


def mixing_bound(kernel: InteractionKernel, density1: float, density2: float,
                 t: float, k: int, h: int, m: int) -> float:
    """Upper bound on the energy density of ``mixing_candidate``.

    The copied layers contribute exactly (a k/h) density1 + (b k/h) density2,
    which is at most t density1 + (1-t) density2 for nonnegative densities.
    """
    a, b = mixing_layers(t, h, k)
    r = h // k
    R = float(kernel.range_R)
    tiles = (a + b) * r ** (m - 1)
    filler = h ** m - tiles * k ** m
    boundary = filler + tiles * ((k + R) ** m - max(k - R, 0.0) ** m)
    bulk = (a * k / h) * density1 + (b * k / h) * density2
    return bulk + node_constant(kernel, m) * boundary / h ** m


def density(f: SpinField, kernel: InteractionKernel) -> float:
    return total_energy(f, kernel).total / float(f.domain.n_nodes)
