import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinhom.errors import BadCount, DimensionTooSmall, OutOfBall
from spinhom.sphere_geom import (
    canonical_orthogonal,
    decompose_into_unit_sum,
    random_unit,
    unit_pair_summing_to,
)


def test_pair_circle_intersection():
    v1, v2 = unit_pair_summing_to([1.2, 0.0])
    np.testing.assert_allclose(v1, [0.6, 0.8], atol=1e-12)
    np.testing.assert_allclose(v2, [0.6, -0.8], atol=1e-12)


def test_pair_zero_is_antipodal():
    v1, v2 = unit_pair_summing_to([0.0, 0.0])
    assert v1.tolist() == [1.0, 0.0] and v2.tolist() == [-1.0, 0.0]


def test_pair_boundary_doubles():
    v1, v2 = unit_pair_summing_to([2.0, 0.0, 0.0])
    np.testing.assert_allclose(v1, [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(v2, [1, 0, 0], atol=1e-12)


def test_pair_errors():
    with pytest.raises(DimensionTooSmall):
        unit_pair_summing_to([0.5])
    with pytest.raises(OutOfBall):
        unit_pair_summing_to([2.1, 0.0])


def test_canonical_orthogonal_skips_parallel_axis():
    e = canonical_orthogonal([1.0, 0.0, 0.0])
    assert e.tolist() == [0.0, 1.0, 0.0]
    u = np.array([0.3, -0.4, 1.2])
    e = canonical_orthogonal(u)
    assert abs(e @ u) < 1e-12 and abs(np.linalg.norm(e) - 1) < 1e-12


def test_extremal_case_forces_alignment():
    for k in (2, 3, 7):
        vs = decompose_into_unit_sum([float(k), 0.0], k)
        np.testing.assert_allclose(vs, np.tile([1.0, 0.0], (k, 1)), atol=1e-12)


def test_zero_into_four():
    vs = decompose_into_unit_sum([0.0, 0.0], 4)
    assert vs.shape == (4, 2)
    np.testing.assert_allclose(vs.sum(axis=0), 0.0, atol=1e-12)


def test_decompose_errors():
    with pytest.raises(BadCount):
        decompose_into_unit_sum([0.1, 0.0], 1)
    with pytest.raises(OutOfBall):
        decompose_into_unit_sum([3.5, 0.0], 3)
    with pytest.raises(DimensionTooSmall):
        decompose_into_unit_sum([0.5], 3)


vectors = st.integers(2, 5).flatmap(
    lambda N: st.tuples(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=N, max_size=N),
        st.floats(0, 1),
        st.integers(2, 60),
    )
)


@settings(max_examples=300, deadline=None)
@given(vectors)
def test_decomposition_property(case):
    direction, frac, k = case
    d = np.asarray(direction)
    n = np.linalg.norm(d)
    u = d / n * frac * k if n > 1e-6 else np.zeros(len(d))
    vs = decompose_into_unit_sum(u, k)
    assert vs.shape == (k, len(u))
    assert np.max(np.abs(np.linalg.norm(vs, axis=1) - 1)) <= 1e-12
    assert np.max(np.abs(vs.sum(axis=0) - u)) <= k * 1e-12 + 1e-12
    # averaged form
    np.testing.assert_allclose(vs.mean(axis=0), u / k, atol=1e-12)
    # one more summand is always possible, and the construction is deterministic
    assert decompose_into_unit_sum(u, k + 1).shape == (k + 1, len(u))
    assert np.array_equal(decompose_into_unit_sum(u, k), vs)


def test_random_unit_deterministic_and_isotropic():
    assert np.array_equal(random_unit(2, 5), random_unit(2, 5))
    assert abs(np.linalg.norm(random_unit(3, 9)) - 1) <= 1e-12
    rng = np.random.default_rng(0)
    from spinhom.sphere_geom import random_units

    mean = random_units(100_000, 3, rng).mean(axis=0)
    assert np.linalg.norm(mean) <= 0.02
    with pytest.raises(DimensionTooSmall):
        random_unit(1, 0)
