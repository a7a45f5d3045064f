import json

import numpy as np
import pytest

from spinhom.errors import ConfigError
from spinhom.kernels import (
    dirac_alignment,
    ferromagnetic_xy,
    kernel_from_config,
    load_tabulated_csv,
    orientational_toy,
    periodic_mixture,
    xi_set,
)
from spinhom.sphere_geom import random_units

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


def builtins():
    return [
        ferromagnetic_xy(),
        dirac_alignment(),
        orientational_toy(1.0, 0.5),
        orientational_toy(-0.5, 0.25),
        periodic_mixture(2, ferromagnetic_xy(), orientational_toy(2.0, 0.0)),
        periodic_mixture(3, dirac_alignment(), ferromagnetic_xy()),
    ]


def test_ferro_values():
    k = ferromagnetic_xy()
    assert k.evaluate([0], (1,), E1, E1) == 0.0
    assert k.evaluate([0], (1,), E1, -E1) == 2.0
    assert k.evaluate([0], (-1,), E1, E2) == 1.0
    assert k.xi_set(2) == [(-1, 0), (0, -1), (0, 1), (1, 0)]


def test_dirac_values():
    k = dirac_alignment()
    assert k.evaluate([0], (1,), E1, E1) == 0.0
    assert k.evaluate([0], (1,), E1, E2) == 1.0
    assert k.evaluate([0], (1,), -E1, -E1) == 1.0
    assert not k.smooth


def test_orientational_toy():
    k = orientational_toy(1.0, 0.0)
    assert k.evaluate([0], (1,), E1, E1) == 0.0
    assert k.evaluate([0], (1,), E1, E2) == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(0)
    U, V = random_units(50, 3, rng), random_units(50, 3, rng)
    k = orientational_toy(0.7, 0.3)
    a = np.zeros((50, 1), dtype=int)
    np.testing.assert_array_equal(k.evaluate_batch(a, (1,), U, V), k.evaluate_batch(a, (1,), -U, -V))


def test_periodic_mixture():
    f = ferromagnetic_xy()
    same = periodic_mixture(2, f, f)
    rng = np.random.default_rng(1)
    U, V = random_units(20, 2, rng), random_units(20, 2, rng)
    a = rng.integers(-5, 5, size=(20, 2))
    np.testing.assert_array_equal(same.evaluate_batch(a, (0, 1), U, V), f.evaluate_batch(a, (0, 1), U, V))
    mix = periodic_mixture(2, f, orientational_toy(2.0, 0.0))
    u, v = random_units(2, 2, rng)
    assert mix.evaluate([0, 0], (1, 0), u, v) == f.evaluate([0, 0], (1, 0), u, v)
    assert mix.evaluate([1, 0], (1, 0), u, v) == orientational_toy(2.0, 0.0).evaluate([0, 0], (1, 0), u, v)
    assert mix.bound == 2.0 and mix.period == 2


@pytest.mark.parametrize("k", builtins(), ids=lambda k: k.name)
def test_bounded_periodic_and_ranged(k):
    rng = np.random.default_rng(7)
    n = 100_000
    U, V = random_units(n, 2, rng), random_units(n, 2, rng)
    # include exact e1 pairs so the alignment kernel's zero is sampled
    U[:100] = V[:100] = E1
    a = rng.integers(-20, 20, size=(n, 2))
    for xi in k.xi_set(2):
        vals = k.evaluate_batch(a, xi, U, V)
        assert np.all(np.abs(vals) <= k.bound)
        for i in range(2):
            shifted = a.copy()
            shifted[:, i] += k.period
            np.testing.assert_array_equal(k.evaluate_batch(shifted, xi, U, V), vals)
    assert not np.any(k.evaluate_batch(a[:10], (2, 2), U[:10], V[:10]))
    assert not np.any(k.evaluate_batch(a[:10], (0, 0), U[:10], V[:10]))


def test_xi_set_range():
    assert xi_set(1.5, 2) == [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    assert xi_set(1.0, 1) == [(-1,), (1,)]


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for k in (ferromagnetic_xy(), orientational_toy(0.8, 0.4)):
        U, V = random_units(5, 3, rng), random_units(5, 3, rng)
        a = np.zeros((5, 1), dtype=int)
        gu, gv = k.gradient_batch(a, (1,), U, V)
        h = 1e-6
        for j in range(3):
            dU = np.zeros_like(U)
            dU[:, j] = h
            fd = (k.evaluate_batch(a, (1,), U + dU, V) - k.evaluate_batch(a, (1,), U - dU, V)) / (2 * h)
            np.testing.assert_allclose(gu[:, j], fd, atol=1e-7)
            fd = (k.evaluate_batch(a, (1,), U, V + dU) - k.evaluate_batch(a, (1,), U, V - dU)) / (2 * h)
            np.testing.assert_allclose(gv[:, j], fd, atol=1e-7)


def test_registry_and_errors(tmp_path):
    assert kernel_from_config({"name": "orientational_toy", "params": {"c1": 2, "c2": 1}}).bound == 4.0
    k = kernel_from_config({"name": "periodic_mixture",
                            "params": {"l": 2, "a": {"name": "ferromagnetic_xy"}, "b": {"name": "dirac_alignment"}}})
    assert k.period == 2
    with pytest.raises(ConfigError, match="kernel.name"):
        kernel_from_config({"name": "nope"})
    with pytest.raises(ConfigError, match="kernel.params"):
        kernel_from_config({"name": "ferromagnetic_xy", "params": {"bogus": 1}})


def test_tabulated_kernel(tmp_path):
    dirs = [[1, 0], [0, 1], [-1, 0], [0, -1]]
    rows = ["a1,xi1,i,j,value"]
    for xi in (1, -1):
        for i in range(4):
            for j in range(4):
                rows.append(f"0,{xi},{i},{j},{0.0 if i == j else 1.0}")
    p = tmp_path / "table.csv"
    p.write_text("# four-direction clock model\n" + "\n".join(rows) + "\n")
    k = load_tabulated_csv(p, dirs)
    assert k.evaluate([0], (1,), [0.99, 0.141], [1.0, 0.0]) == 0.0
    assert k.evaluate([0], (-1,), [0.0, 1.0], [1.0, 0.0]) == 1.0
    assert k.bound == 1.0 and k.range_R == 1.0
    cfg = {"name": "tabulated", "params": {"table": "table.csv", "directions": dirs}}
    (tmp_path / "k.json").write_text(json.dumps(cfg))
    k2 = kernel_from_config(cfg, base_dir=tmp_path)
    assert k2.evaluate([0], (1,), [0.0, -1.0], [0.0, -1.0]) == 0.0
