"""Constructive geometry on the unit sphere S^{N-1}.

Any vector of the ball of radius k (k >= 2) is a sum of exactly k unit
vectors.  The construction here is deterministic: peel off unit vectors
aligned with the remainder until two are left, then split the remainder
with the circle-intersection formula.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BadCount, DimensionTooSmall, OutOfBall

UNIT_TOL = 1e-12
PARALLEL_TOL = 1e-9


def _as_vector(u) -> np.ndarray:
    v = np.asarray(u, dtype=float).reshape(-1)
    if v.size < 2:
        raise DimensionTooSmall(f"need N >= 2, got N = {v.size}")
    return v


def canonical_orthogonal(u) -> np.ndarray:
    """Unit vector orthogonal to u built from the lowest-index axis not parallel to u."""
    u = _as_vector(u)
    n = math.hypot(*u)
    if n == 0.0:
        e = np.zeros(u.size)
        e[0] = 1.0
        return e
    uhat = u / n
    for i in range(u.size):
        if abs(uhat[i]) < 1.0 - PARALLEL_TOL:
            e = -uhat[i] * uhat
            e[i] += 1.0
            return e / np.linalg.norm(e)
    raise AssertionError("unreachable: a unit vector is parallel to at most one axis")


def unit_pair_summing_to(u) -> tuple[np.ndarray, np.ndarray]:
    """Return unit vectors (v1, v2) with v1 + v2 = u, for |u| <= 2.

    >>> v1, v2 = unit_pair_summing_to([1.2, 0.0])
    >>> np.round(v1, 12).tolist(), np.round(v2, 12).tolist()
    ([0.6, 0.8], [0.6, -0.8])
    """
    u = _as_vector(u)
    n = math.hypot(*u)
    if n > 2.0 + UNIT_TOL:
        raise OutOfBall(f"|u| = {n!r} exceeds 2")
    if n == 0.0:
        e = np.zeros(u.size)
        e[0] = 1.0
        return e, -e
    perp = canonical_orthogonal(u)
    h = math.sqrt(max(0.0, 1.0 - n * n / 4.0))
    half = 0.5 * u
    return half + h * perp, half - h * perp


def decompose_into_unit_sum(u, k: int) -> np.ndarray:
    """Write u (|u| <= k) as a sum of k unit vectors; returns a (k, N) array.

    Dividing by k gives the equivalent statement that every point of the
    closed unit ball is the average of k unit vectors.
    """
    u = _as_vector(u)
    k = int(k)
    if k < 2:
        raise BadCount(f"need k >= 2, got k = {k}")
    norm = math.hypot(*u)
    if norm > k * (1.0 + UNIT_TOL):
        raise OutOfBall(f"|u| = {norm!r} exceeds k = {k}")
    if k == 2:
        return np.array(unit_pair_summing_to(u))

    if norm > 0.0:
        d = u / norm
    else:
        d = np.zeros(u.size)
        d[0] = 1.0
    # Every peeled vector is +-d, so the remainder stays on the line R*d and
    # only its signed length s needs tracking.
    s = norm
    signs = np.empty(k - 2)
    for i in range(k - 2):
        w = 1.0 if s >= 0.0 else -1.0
        signs[i] = w
        s -= w
    rest = u - signs.sum() * d
    rn = math.hypot(*rest)
    if rn > 2.0:
        # rounding only; the line construction guarantees |rest| <= 2
        rest *= 2.0 / rn
    v1, v2 = unit_pair_summing_to(rest)
    out = np.empty((k, u.size))
    out[: k - 2] = signs[:, None] * d
    out[k - 2] = v1
    out[k - 1] = v2
    return out


def random_unit(N: int, seed: int) -> np.ndarray:
    """Uniform sample on S^{N-1}, deterministic in seed."""
    return random_units(1, N, np.random.default_rng(seed))[0]


def random_units(count: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """(count, N) array of independent uniform samples on S^{N-1}."""
    if N < 2:
        raise DimensionTooSmall(f"need N >= 2, got N = {N}")
    g = rng.standard_normal((count, N))
    norms = np.linalg.norm(g, axis=1)
    # a zero draw has probability zero; redraw defensively anyway
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), N))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)
