"""Shared generators for tests."""
import math

import numpy as np

from spinhom.average_correction import CorrectionParams
from spinhom.sphere_geom import canonical_orthogonal, decompose_into_unit_sum, random_units


def random_ball_vector(rng, N, radius):
    """Random direction with modulus uniform in [0, radius]."""
    return random_units(1, N, rng)[0] * radius * rng.random()


def exact_average_field(rng, n, z):
    """n unit vectors with average z: mirrored pairs z +- h w (w orthogonal to z), shuffled."""
    N = len(z)
    h = math.sqrt(max(0.0, 1.0 - float(z @ z)))
    rows = []
    if n % 2:
        rows.extend(decompose_into_unit_sum(3 * z, 3))
        n -= 3
    for _ in range(n // 2):
        w = rng.standard_normal(N)
        zn = float(np.linalg.norm(z))
        w -= (w @ z) * z / zn**2 if zn > 0 else 0.0
        wn = float(np.linalg.norm(w))
        w = w / wn if wn > 1e-8 else canonical_orthogonal(z)
        rows.append(z + h * w)
        rows.append(z - h * w)
    U = np.array(rows)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    return U[rng.permutation(len(U))]


def in_regime_field(rng, m, N, z):
    """A field whose average defect is small enough for the sparse correction.

    Node count is log-uniform in [10^2, 10^4] (a square side for m = 2).  A few
    spins of an exact-average field are rotated; the rotation size is halved
    until 2P fits in a quarter of the nodes.
    """
    if m == 1:
        n = int(round(10 ** rng.uniform(2, 4)))
    else:
        n = int(rng.integers(10, 101)) ** 2
    U0 = exact_average_field(rng, n, z)
    idx = rng.choice(n, size=max(1, n // int(rng.integers(5, 50))), replace=False)
    kick = rng.standard_normal((len(idx), N))
    scale = 1.0
    while True:
        U = U0.copy()
        V = U[idx] + scale * kick
        U[idx] = V / np.linalg.norm(V, axis=1, keepdims=True)
        avg = U.mean(axis=0)
        eta = float(np.linalg.norm(avg - z))
        params = CorrectionParams.auto(float(np.linalg.norm(avg)), float(np.linalg.norm(z)))
        if 2 * (math.floor(eta * n / params.c) + 1) <= n // 4:
            return U
        scale *= 0.5
