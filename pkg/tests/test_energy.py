import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinhom.energy import EnergyModel, bond_count, delta_energy, energy_density, total_energy
from spinhom.errors import DimensionMismatch, OutsideDomain
from spinhom.kernels import dirac_alignment, ferromagnetic_xy, orientational_toy, periodic_mixture
from spinhom.lattice import LatticeDomain, SpinField
from spinhom.sphere_geom import random_units


def naive_energy(f, k):
    """Double loop over xi and node pairs, straight from the definition."""
    d = f.domain
    idx = [tuple(r) for r in d.indices()]
    where = {a: i for i, a in enumerate(idx)}
    total = 0.0
    for xi in itertools.product(range(-3, 4), repeat=d.m):
        if not any(xi) or np.sqrt(np.sum(np.square(xi))) > k.range_R:
            continue
        for a in idx:
            b = tuple(x + y for x, y in zip(a, xi))
            if b in where:
                total += d.epsilon ** d.m * k.evaluate(np.mod(a, k.period), xi, f.values[where[a]], f.values[where[b]])
    return total


KERNELS = [ferromagnetic_xy(), dirac_alignment(), orientational_toy(1.0, 0.3),
           periodic_mixture(2, ferromagnetic_xy(), orientational_toy(0.5, 0.5))]


@pytest.mark.parametrize("k", KERNELS, ids=lambda k: k.name)
@pytest.mark.parametrize("shape", [(7,), (5, 4), (3, 3, 2)])
def test_matches_naive_oracle(k, shape):
    rng = np.random.default_rng(len(shape))
    d = LatticeDomain.from_index_box((1,) * len(shape), shape, 0.5)
    f = SpinField(d, random_units(d.n_nodes, 3, rng))
    bd = total_energy(f, k)
    assert bd.total == pytest.approx(naive_energy(f, k), abs=1e-12)
    assert bd.total == pytest.approx(sum(bd.per_xi.values()), rel=1e-9)


def test_trivial_values():
    d = LatticeDomain.cube(6, 2)
    assert total_energy(SpinField.constant(d, [0.6, 0.8]), ferromagnetic_xy()).total == 0.0
    k = dirac_alignment()
    assert total_energy(SpinField.constant(d, [0.0, 1.0]), k).total == bond_count(d, k) == 4 * 6 * 5
    assert energy_density(SpinField.constant(d, [1.0, 0.0]), k) == 0.0
    two = SpinField(LatticeDomain.cube(2, 1), [[1.0, 0.0], [-1.0, 0.0]])
    bd = total_energy(two, ferromagnetic_xy())
    assert bd.total == 4.0 and bd.pair_count == {(-1,): 1, (1,): 1}


def test_density_bound():
    rng = np.random.default_rng(4)
    for k in KERNELS:
        d = LatticeDomain.cube(5, 2)
        f = SpinField(d, random_units(25, 2, rng))
        assert energy_density(f, k) <= k.bound * bond_count(d, k) / 25


def test_invariances():
    rng = np.random.default_rng(5)
    vals = random_units(20, 2, rng)
    k = ferromagnetic_xy()
    base = total_energy(SpinField(LatticeDomain.from_index_box((0, 0), (4, 5)), vals), k).total
    moved = total_energy(SpinField(LatticeDomain.from_index_box((3, -7), (4, 5)), vals), k).total
    assert moved == pytest.approx(base, abs=1e-9)
    kp = periodic_mixture(3, ferromagnetic_xy(), orientational_toy(2.0, 0.1))
    base = total_energy(SpinField(LatticeDomain.from_index_box((1, 0), (4, 5)), vals), kp).total
    moved = total_energy(SpinField(LatticeDomain.from_index_box((4, -3), (4, 5)), vals), kp).total
    assert moved == pytest.approx(base, abs=1e-9)
    # changing eps keeps the node structure and rescales by eps^m
    scaled = total_energy(SpinField(LatticeDomain.from_index_box((0, 0), (4, 5), 0.25), vals), k).total
    assert scaled == pytest.approx(total_energy(SpinField(LatticeDomain.from_index_box((0, 0), (4, 5)), vals), k).total / 16, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(KERNELS))
def test_delta_matches_full_recomputation(seed, k):
    rng = np.random.default_rng(seed)
    d = LatticeDomain.cube(5, 2)
    f = SpinField(d, random_units(25, 2, rng))
    E0 = total_energy(f, k).total
    for _ in range(20):
        node = tuple(rng.integers(0, 5, size=2))
        new = random_units(1, 2, rng)[0]
        vals = f.values.copy()
        vals[d.flat_index(node)] = new
        full = total_energy(f.with_values(vals), k).total - E0
        assert delta_energy(f, k, node, new) == pytest.approx(full, abs=1e-9)
    assert delta_energy(f, k, (0, 0), f.value_at((0, 0))) == 0.0


def test_delta_edge_cases():
    k = ferromagnetic_xy()
    single = SpinField(LatticeDomain((0.0,), (0.5,)), [[1.0, 0.0]])
    assert delta_energy(single, k, (0,), [0.0, 1.0]) == 0.0
    with pytest.raises(OutsideDomain):
        delta_energy(single, k, (3,), [0.0, 1.0])
    with pytest.raises(DimensionMismatch):
        delta_energy(single, k, (0,), [0.0, 0.0, 1.0])


def test_model_gradient_and_colours():
    rng = np.random.default_rng(6)
    d = LatticeDomain.cube(4, 2)
    k = orientational_toy(1.0, 0.4)
    model = EnergyModel(d, k)
    U = random_units(16, 3, rng)
    G = model.gradient(U)
    h = 1e-6
    for i in (0, 5, 15):
        for j in range(3):
            P = U.copy(); P[i, j] += h
            M = U.copy(); M[i, j] -= h
            assert G[i, j] == pytest.approx((model.total(P) - model.total(M)) / (2 * h), abs=1e-6)
    classes = model.colour_classes()
    assert sorted(np.concatenate(classes).tolist()) == list(range(16))
    for c in classes:
        members = set(c.tolist())
        for src, dst in model.bonds:
            assert not any(s in members and t in members for s, t in zip(src, dst))
