"""Lattice energies E_eps(u; Omega) = sum_xi sum_alpha eps^m G^xi(alpha/eps, u(alpha), u(alpha + eps xi)).

The bond set for a bond vector xi is every node pair (alpha, alpha + eps xi)
with both ends in the domain; xi = 0 is never summed.  ``EnergyModel``
precomputes these bonds once per (domain, kernel) and also serves the
incremental and gradient evaluations the solvers need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch
from .kernels import InteractionKernel
from .lattice import LatticeDomain, SpinField, pair_index_arrays


@dataclass
class EnergyBreakdown:
    total: float
    per_xi: dict[tuple[int, ...], float]
    pair_count: dict[tuple[int, ...], int]

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "per_xi": [
                {"xi": list(xi), "energy": e, "pairs": self.pair_count[xi]}
                for xi, e in self.per_xi.items()
            ],
        }


@lru_cache(maxsize=64)
def _neighbour_tables(shape: tuple[int, ...], xis: tuple[tuple[int, ...], ...]):
    """fwd[k, i] = index of node i + xi_k (or -1); bwd[k, i] = index of node i - xi_k (or -1)."""
    n = int(np.prod(shape))
    fwd = np.full((len(xis), n), -1, dtype=np.int64)
    bwd = np.full((len(xis), n), -1, dtype=np.int64)
    for k, xi in enumerate(xis):
        src, dst = pair_index_arrays(shape, xi)
        fwd[k, src] = dst
        bwd[k, dst] = src
    fwd.setflags(write=False)
    bwd.setflags(write=False)
    return fwd, bwd


class EnergyModel:
    """Energy of spin configurations on a fixed domain for a fixed kernel."""

    def __init__(self, domain: LatticeDomain, kernel: InteractionKernel):
        self.domain = domain
        self.kernel = kernel
        self.scale = domain.epsilon ** domain.m
        self.xis = tuple(kernel.xi_set(domain.m))
        self.bonds = [pair_index_arrays(domain.shape, xi) for xi in self.xis]
        self.alpha = np.mod(domain.indices(), kernel.period)
        self._fwd, self._bwd = _neighbour_tables(domain.shape, self.xis)

    @property
    def bond_count(self) -> int:
        return sum(len(src) for src, _ in self.bonds)

    def _check(self, U: np.ndarray):
        if U.shape[0] != self.domain.n_nodes:
            raise DimensionMismatch(f"expected {self.domain.n_nodes} rows, got {U.shape[0]}")

    def bond_energies(self, U: np.ndarray) -> list[np.ndarray]:
        self._check(U)
        return [
            self.kernel.evaluate_batch(self.alpha[src], xi, U[src], U[dst])
            for xi, (src, dst) in zip(self.xis, self.bonds)
        ]

    def total(self, U: np.ndarray) -> float:
        """Fast total used inside search loops (pairwise numpy summation)."""
        return self.scale * float(sum(float(np.sum(e)) for e in self.bond_energies(U)))

    def breakdown(self, U: np.ndarray) -> EnergyBreakdown:
        """Correctly rounded per-xi sums, combined in fixed xi order."""
        per_xi, counts = {}, {}
        for xi, e in zip(self.xis, self.bond_energies(U)):
            per_xi[xi] = self.scale * math.fsum(e.tolist())
            counts[xi] = int(e.size)
        return EnergyBreakdown(math.fsum(per_xi.values()), per_xi, counts)

    def local(self, U: np.ndarray, nodes: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Energy of all bonds touching each node in ``nodes`` when it holds X.

        Nodes in one call must not interact with each other.
        """
        out = np.zeros(len(nodes))
        for k, xi in enumerate(self.xis):
            f = self._fwd[k, nodes]
            ok = f >= 0
            if ok.any():
                out[ok] += self.kernel.evaluate_batch(self.alpha[nodes[ok]], xi, X[ok], U[f[ok]])
            b = self._bwd[k, nodes]
            ok = b >= 0
            if ok.any():
                out[ok] += self.kernel.evaluate_batch(self.alpha[b[ok]], xi, U[b[ok]], X[ok])
        return self.scale * out

    def delta(self, U: np.ndarray, nodes: np.ndarray, X: np.ndarray) -> np.ndarray:
        """Energy change from setting U[nodes] = X, for mutually non-interacting nodes."""
        return self.local(U, nodes, X) - self.local(U, nodes, U[nodes])

    def gradient(self, U: np.ndarray) -> np.ndarray:
        """Euclidean gradient of the total energy with respect to every spin (smooth kernels)."""
        G = np.zeros_like(U)
        for xi, (src, dst) in zip(self.xis, self.bonds):
            gu, gv = self.kernel.gradient_batch(self.alpha[src], xi, U[src], U[dst])
            np.add.at(G, src, gu)
            np.add.at(G, dst, gv)
        return self.scale * G

    def colour_classes(self) -> list[np.ndarray]:
        """Partition of the nodes into classes with no bond inside a class."""
        r = int(math.floor(self.kernel.range_R)) + 1
        idx = self.domain.indices() - np.asarray(self.domain.lo)
        key = np.ravel_multi_index(tuple((idx % r).T), (r,) * self.domain.m)
        return [np.flatnonzero(key == c) for c in range(r ** self.domain.m) if np.any(key == c)]


def _model(f: SpinField, k: InteractionKernel) -> EnergyModel:
    return EnergyModel(f.domain, k)


def total_energy(f: SpinField, k: InteractionKernel) -> EnergyBreakdown:
    return _model(f, k).breakdown(f.values)


def energy_density(f: SpinField, k: InteractionKernel, T: float | None = None) -> float:
    """total_energy / T^m on Q_T (unit spacing); T defaults to the domain side."""
    if f.domain.epsilon != 1.0:
        raise ValueError("energy_density expects a unit-spacing domain")
    if T is None:
        T = f.domain.sides[0]
    return total_energy(f, k).total / float(T) ** f.domain.m


def delta_energy(f: SpinField, k: InteractionKernel, node, new_value) -> float:
    """total_energy(f with node := new_value) - total_energy(f), visiting only incident bonds."""
    model = _model(f, k)
    i = f.domain.flat_index(node)
    x = np.asarray(new_value, dtype=float).reshape(1, -1)
    if x.shape[1] != f.N:
        raise DimensionMismatch(f"new value has dimension {x.shape[1]}, field has N = {f.N}")
    return float(model.delta(f.values, np.array([i]), x)[0])


def bond_count(domain: LatticeDomain, k: InteractionKernel) -> int:
    return EnergyModel(domain, k).bond_count

