"""Cubic-lattice bookkeeping for axis-aligned boxes.

Nodes are the points alpha of eps*Z^m whose half-open cell alpha + [0, eps)^m
meets the open box.  They are stored densely in row-major (lexicographic)
order over their integer coordinates alpha / eps.  For Q_T = (0, T)^m with
eps = 1 this gives exactly {0, ..., T-1}^m.

Two membership rules exist for interaction pairs:

* ``"nodes"`` (default, used by all energies): both endpoints are nodes.
* ``"open"``: both endpoints lie strictly inside the open box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DimensionMismatch, EmptyRegion, OutsideDomain

SNAP_TOL = 1e-9
UNIT_TOL = 1e-10


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) < SNAP_TOL else x


@dataclass(frozen=True)
class LatticeDomain:
    origin: tuple[float, ...]
    sides: tuple[float, ...]
    epsilon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(a) for a in self.origin))
        object.__setattr__(self, "sides", tuple(float(s) for s in self.sides))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if len(self.origin) != len(self.sides) or not self.origin:
            raise DimensionMismatch("origin and sides must have the same positive length")
        if any(s <= 0 for s in self.sides) or self.epsilon <= 0:
            raise ValueError("box sides and epsilon must be positive")

    @classmethod
    def cube(cls, T: int, m: int, offset=0) -> "LatticeDomain":
        """Q_T = offset + (0, T)^m at unit spacing."""
        off = np.broadcast_to(np.asarray(offset, dtype=float), (m,))
        return cls(tuple(off), (float(T),) * m, 1.0)

    @classmethod
    def from_index_box(cls, lo, shape, epsilon: float = 1.0) -> "LatticeDomain":
        """Domain whose nodes are exactly lo + {0..shape-1} (integer coordinates)."""
        lo = np.asarray(lo, dtype=float)
        shape = np.asarray(shape, dtype=float)
        return cls(tuple(lo * epsilon), tuple(shape * epsilon), epsilon)

    @property
    def m(self) -> int:
        return len(self.origin)

    @cached_property
    def lo(self) -> tuple[int, ...]:
        return tuple(
            math.floor(_snap(a / self.epsilon - 1.0)) + 1 for a in self.origin
        )

    @cached_property
    def shape(self) -> tuple[int, ...]:
        hi = tuple(
            math.ceil(_snap((a + s) / self.epsilon)) - 1
            for a, s in zip(self.origin, self.sides)
        )
        return tuple(h - l + 1 for h, l in zip(hi, self.lo))

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def indices(self) -> np.ndarray:
        """(n, m) integer coordinates alpha/eps in lexicographic order."""
        return _index_grid(self.lo, self.shape)

    def nodes(self) -> np.ndarray:
        """(n, m) node coordinates alpha in lexicographic order."""
        return self.epsilon * self.indices()

    def flat_index(self, index) -> int:
        j = np.asarray(index, dtype=np.int64) - np.asarray(self.lo)
        if j.shape != (self.m,) or np.any(j < 0) or np.any(j >= np.asarray(self.shape)):
            raise OutsideDomain(f"index {tuple(np.asarray(index).tolist())} not in domain")
        return int(np.ravel_multi_index(tuple(j), self.shape))

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.origin)
        return bool(np.all(x > a) and np.all(x < a + np.asarray(self.sides)))


@lru_cache(maxsize=64)
def _index_grid(lo: tuple[int, ...], shape: tuple[int, ...]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(l, l + s) for l, s in zip(lo, shape)], indexing="ij")
    out = np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)
    out.setflags(write=False)
    return out


def nodes(d: LatticeDomain) -> np.ndarray:
    return d.nodes()


@lru_cache(maxsize=256)
def pair_index_arrays(shape: tuple[int, ...], xi: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Flat (src, dst) arrays of node pairs (j, j + xi) with both ends in the grid."""
    shape_a = np.asarray(shape)
    xi_a = np.asarray(xi, dtype=np.int64)
    idx = _index_grid((0,) * len(shape), shape)
    tgt = idx + xi_a
    ok = np.all((tgt >= 0) & (tgt < shape_a), axis=1)
    src = np.flatnonzero(ok)
    dst = np.ravel_multi_index(tuple(tgt[ok].T), shape) if src.size else np.empty(0, np.int64)
    src.setflags(write=False)
    dst = np.asarray(dst, dtype=np.int64)
    dst.setflags(write=False)
    return src, dst


def interaction_pairs(d: LatticeDomain, xi, membership: str = "nodes") -> list[tuple[tuple, tuple]]:
    """Pairs (alpha, alpha + eps*xi) of node coordinates.

    ``membership="nodes"`` keeps pairs whose two endpoints are nodes;
    ``membership="open"`` keeps pairs whose endpoints lie in the open box.
    """
    xi = tuple(int(v) for v in xi)
    if len(xi) != d.m:
        raise DimensionMismatch(f"xi has dimension {len(xi)}, domain has m = {d.m}")
    src, dst = pair_index_arrays(d.shape, xi)
    pts = d.nodes()
    a, b = pts[src], pts[dst]
    if membership == "open":
        lo = np.asarray(d.origin)
        hi = lo + np.asarray(d.sides)
        keep = np.all((a > lo) & (a < hi) & (b > lo) & (b < hi), axis=1)
        a, b = a[keep], b[keep]
    elif membership != "nodes":
        raise ValueError(f"unknown membership rule {membership!r}")
    return [(tuple(p.tolist()), tuple(q.tolist())) for p, q in zip(a, b)]


@dataclass(frozen=True, eq=False)
class SpinField:
    """Unit vectors attached to every node of a domain, rows in lexicographic node order."""

    domain: LatticeDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.domain.n_nodes:
            raise DimensionMismatch(
                f"values must have shape ({self.domain.n_nodes}, N), got {v.shape}"
            )
        if v.shape[1] < 2:
            raise DimensionMismatch("spin dimension N must be >= 2")
        err = np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))
        if err > UNIT_TOL:
            raise ValueError(f"field values are not unit vectors (max norm error {err:.3g})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, domain: LatticeDomain, z) -> "SpinField":
        z = np.asarray(z, dtype=float)
        return cls(domain, np.tile(z, (domain.n_nodes, 1)))

    @property
    def N(self) -> int:
        return self.values.shape[1]

    def value_at(self, index) -> np.ndarray:
        return self.values[self.domain.flat_index(index)]

    def with_values(self, values: np.ndarray) -> "SpinField":
        return SpinField(self.domain, values)

    def average(self) -> np.ndarray:
        return self.values.mean(axis=0)


def discrete_average(f: SpinField, sub_box=None) -> np.ndarray:
    """Mean of f over the nodes of Z_eps(sub_box) that belong to f's domain.

    sub_box is ``(origin, sides)`` at the field's spacing; None means the whole domain.
    """
    if sub_box is None:
        return f.values.mean(axis=0)
    origin, sides = sub_box
    sub = LatticeDomain(tuple(origin), tuple(sides), f.domain.epsilon)
    lo = np.maximum(np.asarray(sub.lo), np.asarray(f.domain.lo))
    hi = np.minimum(
        np.asarray(sub.lo) + np.asarray(sub.shape),
        np.asarray(f.domain.lo) + np.asarray(f.domain.shape),
    )
    if np.any(hi <= lo):
        raise EmptyRegion("sub-box contains no node of the domain")
    grid = f.values.reshape(*f.domain.shape, f.N)
    base = np.asarray(f.domain.lo)
    sl = tuple(slice(int(a - o), int(b - o)) for a, b, o in zip(lo, hi, base))
    return grid[sl].reshape(-1, f.N).mean(axis=0)


def piecewise_constant_eval(f: SpinField, x) -> np.ndarray:
    """Value of the piecewise-constant extension at point x (half-open cells)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != f.domain.m:
        raise DimensionMismatch(f"point has dimension {x.size}, domain has m = {f.domain.m}")
    j = [math.floor(_snap(c / f.domain.epsilon)) for c in x]
    return f.value_at(j)
