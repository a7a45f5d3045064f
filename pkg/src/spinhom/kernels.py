"""Interaction energy densities G(alpha, alpha + xi, u, v).

A kernel is bounded, periodic in alpha with some period l, and has a finite
range R: only bond vectors xi with 0 < |xi| <= R are ever summed.  Kernels
evaluate in batches: ``alpha`` is an (n, m) integer array, ``U`` and ``V``
are (n, N) arrays of unit vectors, and the result is an (n,) array.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError

Density = Callable[[np.ndarray, tuple, np.ndarray, np.ndarray], np.ndarray]
Gradient = Callable[[np.ndarray, tuple, np.ndarray, np.ndarray], tuple]

EXACT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class InteractionKernel:
    name: str
    period: int
    range_R: float
    bound: float
    density: Density
    gradient: Gradient | None = None
    nonnegative: bool = True
    spec: dict = field(default_factory=dict)
    # special spin values (e.g. the only zero-energy state) that random-walk
    # proposals would never hit exactly; maps N to a (K, N) array
    anchors: Callable[[int], np.ndarray] | None = None

    @property
    def smooth(self) -> bool:
        return self.gradient is not None

    def xi_set(self, m: int) -> list[tuple[int, ...]]:
        return xi_set(self.range_R, m)

    def evaluate_batch(self, alpha, xi, U, V) -> np.ndarray:
        xi = tuple(int(c) for c in xi)
        U = np.atleast_2d(np.asarray(U, dtype=float))
        V = np.atleast_2d(np.asarray(V, dtype=float))
        if math.hypot(*xi) > self.range_R or not any(xi):
            return np.zeros(U.shape[0])
        alpha = np.mod(np.atleast_2d(np.asarray(alpha, dtype=np.int64)), self.period)
        return self.density(alpha, xi, U, V)

    def evaluate(self, alpha, xi, u, v) -> float:
        return float(self.evaluate_batch(np.atleast_2d(alpha), xi, u, v)[0])

    def gradient_batch(self, alpha, xi, U, V) -> tuple[np.ndarray, np.ndarray]:
        if self.gradient is None:
            raise TypeError(f"kernel {self.name!r} is not flagged smooth")
        xi = tuple(int(c) for c in xi)
        if math.hypot(*xi) > self.range_R or not any(xi):
            return np.zeros_like(U), np.zeros_like(V)
        alpha = np.mod(np.atleast_2d(np.asarray(alpha, dtype=np.int64)), self.period)
        return self.gradient(alpha, xi, U, V)


def xi_set(range_R: float, m: int) -> list[tuple[int, ...]]:
    """Integer vectors 0 < |xi| <= R in lexicographic order."""
    r = int(math.floor(range_R))
    out = []
    for xi in itertools.product(range(-r, r + 1), repeat=m):
        if any(xi) and math.hypot(*xi) <= range_R:
            out.append(xi)
    return out


def _is_unit_axis(xi) -> bool:
    return sum(abs(c) for c in xi) == 1


def ferromagnetic_xy() -> InteractionKernel:
    """G = 1 - (u, v) on the 2m nearest-neighbour bonds +-e_i."""

    def density(alpha, xi, U, V):
        if not _is_unit_axis(xi):
            return np.zeros(U.shape[0])
        return 1.0 - np.einsum("ij,ij->i", U, V)

    def gradient(alpha, xi, U, V):
        if not _is_unit_axis(xi):
            return np.zeros_like(U), np.zeros_like(V)
        return -V, -U

    return InteractionKernel(
        "ferromagnetic_xy", 1, 1.0, 2.0, density, gradient,
        spec={"name": "ferromagnetic_xy", "params": {}},
    )


def dirac_alignment() -> InteractionKernel:
    """Nearest-neighbour kernel: 0 on the bond (e1, e1), 1 on every other bond.

    Lower semicontinuous but discontinuous, so it carries no gradient.
    """

    def density(alpha, xi, U, V):
        if not _is_unit_axis(xi):
            return np.zeros(U.shape[0])
        e1 = np.zeros(U.shape[1])
        e1[0] = 1.0
        hit = np.all(np.abs(U - e1) <= EXACT_TOL, axis=1) & np.all(
            np.abs(V - e1) <= EXACT_TOL, axis=1
        )
        return np.where(hit, 0.0, 1.0)

    return InteractionKernel(
        "dirac_alignment", 1, 1.0, 1.0, density, None,
        spec={"name": "dirac_alignment", "params": {}},
        anchors=lambda N: np.eye(N)[:1],
    )


def orientational_toy(c1: float = 1.0, c2: float = 0.0) -> InteractionKernel:
    """Head-tail symmetric nearest-neighbour toy:
    c1 (1 - (u,v)^2) + c2 ((u, xi/|xi|)^2 + (v, xi/|xi|)^2).

    The bond direction is embedded in R^N by padding (or truncating) with zeros.
    """
    c1, c2 = float(c1), float(c2)

    def _dir(xi, N):
        x = np.zeros(N)
        k = min(len(xi), N)
        x[:k] = np.asarray(xi[:k], dtype=float)
        return x / math.hypot(*xi)

    def density(alpha, xi, U, V):
        if not _is_unit_axis(xi):
            return np.zeros(U.shape[0])
        x = _dir(xi, U.shape[1])
        uv = np.einsum("ij,ij->i", U, V)
        return c1 * (1.0 - uv**2) + c2 * ((U @ x) ** 2 + (V @ x) ** 2)

    def gradient(alpha, xi, U, V):
        if not _is_unit_axis(xi):
            return np.zeros_like(U), np.zeros_like(V)
        x = _dir(xi, U.shape[1])
        uv = np.einsum("ij,ij->i", U, V)[:, None]
        gu = -2.0 * c1 * uv * V + 2.0 * c2 * (U @ x)[:, None] * x
        gv = -2.0 * c1 * uv * U + 2.0 * c2 * (V @ x)[:, None] * x
        return gu, gv

    return InteractionKernel(
        "orientational_toy", 1, 1.0, abs(c1) + 2.0 * abs(c2), density, gradient,
        nonnegative=c1 >= 0 and c2 >= 0,
        spec={"name": "orientational_toy", "params": {"c1": c1, "c2": c2}},
    )


def periodic_mixture(l: int, kernel_a: InteractionKernel, kernel_b: InteractionKernel) -> InteractionKernel:
    """kernel_a on sites with sum(alpha) = 0 mod l, kernel_b elsewhere."""
    l = int(l)
    if l < 2:
        raise ValueError("periodic_mixture needs l >= 2")
    period = math.lcm(l, kernel_a.period, kernel_b.period)

    def _split(alpha):
        return np.mod(alpha.sum(axis=1), l) == 0

    def density(alpha, xi, U, V):
        on_a = _split(alpha)
        out = np.empty(U.shape[0])
        out[on_a] = kernel_a.evaluate_batch(alpha[on_a], xi, U[on_a], V[on_a])
        out[~on_a] = kernel_b.evaluate_batch(alpha[~on_a], xi, U[~on_a], V[~on_a])
        return out

    gradient = None
    if kernel_a.smooth and kernel_b.smooth:

        def gradient(alpha, xi, U, V):
            on_a = _split(alpha)
            gu, gv = np.empty_like(U), np.empty_like(V)
            gu[on_a], gv[on_a] = kernel_a.gradient_batch(alpha[on_a], xi, U[on_a], V[on_a])
            gu[~on_a], gv[~on_a] = kernel_b.gradient_batch(alpha[~on_a], xi, U[~on_a], V[~on_a])
            return gu, gv

    return InteractionKernel(
        "periodic_mixture", period, max(kernel_a.range_R, kernel_b.range_R),
        max(kernel_a.bound, kernel_b.bound), density, gradient,
        nonnegative=kernel_a.nonnegative and kernel_b.nonnegative,
        spec={"name": "periodic_mixture",
              "params": {"l": l, "a": kernel_a.spec, "b": kernel_b.spec}},
        anchors=_merge_anchors(kernel_a.anchors, kernel_b.anchors),
    )


def _merge_anchors(a, b):
    if a is None or b is None:
        return a or b
    return lambda N: np.vstack([a(N), b(N)])


def tabulated(directions, table: dict, period: int = 1) -> InteractionKernel:
    """Kernel defined on a grid of sphere directions with nearest-direction lookup.

    ``table`` maps ``(alpha_mod, xi)`` (tuples of ints) to a (K, K) array of
    values for (u, v) snapped to the K ``directions``.  Missing keys give 0.
    """
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    tab = {(tuple(a), tuple(x)): np.asarray(vals, dtype=float) for (a, x), vals in table.items()}
    for vals in tab.values():
        if vals.shape != (len(dirs), len(dirs)):
            raise ConfigError(f"kernel.params.table: expected {len(dirs)}x{len(dirs)} blocks")
    range_R = max((math.hypot(*x) for _, x in tab), default=1.0)
    bound = max((float(np.max(np.abs(v))) for v in tab.values()), default=0.0)

    def density(alpha, xi, U, V):
        iu = np.argmax(U @ dirs.T, axis=1)
        iv = np.argmax(V @ dirs.T, axis=1)
        out = np.zeros(U.shape[0])
        for a in {tuple(r) for r in alpha.tolist()}:
            vals = tab.get((a, xi))
            if vals is None:
                continue
            rows = np.all(alpha == np.asarray(a), axis=1)
            out[rows] = vals[iu[rows], iv[rows]]
        return out

    return InteractionKernel(
        "tabulated", int(period), range_R, bound, density, None,
        nonnegative=all(np.all(v >= 0) for v in tab.values()),
        anchors=lambda N: dirs,
    )


def load_tabulated_csv(path, directions, period: int = 1) -> InteractionKernel:
    """Read a tabulated kernel: header ``a1..am,xi1..xim,i,j,value``."""
    path = Path(path)
    K = len(directions)
    table: dict = {}
    with path.open(newline="") as fh:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        header = next(reader)
        m = (len(header) - 3) // 2
        if len(header) != 2 * m + 3 or m < 1:
            raise ConfigError(f"kernel.params.table: malformed header in {path}")
        for row in reader:
            a = tuple(int(c) for c in row[:m])
            xi = tuple(int(c) for c in row[m : 2 * m])
            i, j = int(row[2 * m]), int(row[2 * m + 1])
            table.setdefault((a, xi), np.zeros((K, K)))[i, j] = float(row[2 * m + 2])
    kern = tabulated(directions, table, period)
    object.__setattr__(
        kern, "spec",
        {"name": "tabulated", "params": {"table": str(path), "directions": np.asarray(directions).tolist(), "period": period}},
    )
    return kern


def _build_mixture(l, a, b, base_dir=None):
    return periodic_mixture(l, kernel_from_config(a, base_dir), kernel_from_config(b, base_dir))


def _build_tabulated(table, directions, period=1, base_dir=None):
    p = Path(table)
    if base_dir is not None and not p.is_absolute():
        p = Path(base_dir) / p
    return load_tabulated_csv(p, directions, period)


REGISTRY: dict[str, Callable[..., InteractionKernel]] = {
    "ferromagnetic_xy": ferromagnetic_xy,
    "dirac_alignment": dirac_alignment,
    "orientational_toy": orientational_toy,
    "periodic_mixture": _build_mixture,
    "tabulated": _build_tabulated,
}


def kernel_from_config(cfg: dict, base_dir=None) -> InteractionKernel:
    """Build a kernel from ``{"name": ..., "params": {...}}``."""
    if not isinstance(cfg, dict) or "name" not in cfg:
        raise ConfigError("kernel.name: missing")
    name = cfg["name"]
    if name not in REGISTRY:
        raise ConfigError(f"kernel.name: unknown kernel {name!r}")
    params = dict(cfg.get("params", {}))
    if name in ("periodic_mixture", "tabulated"):
        params["base_dir"] = base_dir
    try:
        return REGISTRY[name](**params)
    except TypeError as exc:
        raise ConfigError(f"kernel.params: {exc}") from None
