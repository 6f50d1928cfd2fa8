import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enskog_series.errors import DegenerateGeometryError, InvalidDirectionError
from enskog_series.kernel import (
    PhasePoint,
    contact_normal,
    elastic_reflect,
    is_incoming,
)

finite = st.floats(-50, 50, allow_nan=False)
vectors = st.tuples(finite, finite, finite).map(np.array)
directions = vectors.filter(lambda u: np.linalg.norm(u) > 1e-3).map(lambda u: u / np.linalg.norm(u))


def test_head_on_exchange():
    v, v1 = elastic_reflect([1, 0, 0], [-1, 0, 0], [1, 0, 0])
    assert np.allclose(v, [-1, 0, 0]) and np.allclose(v1, [1, 0, 0])


def test_grazing_leaves_velocities():
    v, v1 = elastic_reflect([1, 0, 0], [0, 0, 0], [0, 1, 0])
    assert np.array_equal(v, [1, 0, 0]) and np.array_equal(v1, [0, 0, 0])


def test_non_unit_direction_rejected():
    with pytest.raises(InvalidDirectionError):
        elastic_reflect([1, 0, 0], [0, 0, 0], [2, 0, 0])


@settings(max_examples=300, deadline=None)
@given(vectors, vectors, directions)
def test_conservation_and_involution(v, v1, omega):
    w, w1 = elastic_reflect(v, v1, omega)
    scale = 1.0 + np.abs(v).max() + np.abs(v1).max()
    assert np.allclose(w + w1, v + v1, rtol=0, atol=1e-12 * scale)
    assert abs((w @ w + w1 @ w1) - (v @ v + v1 @ v1)) <= 1e-12 * scale ** 2
    u, u1 = elastic_reflect(w, w1, omega)
    assert np.allclose(u, v, rtol=0, atol=1e-12 * scale)
    assert np.allclose(u1, v1, rtol=0, atol=1e-12 * scale)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, directions)
def test_reflection_flips_hemisphere(v, v1, omega):
    w, w1 = elastic_reflect(v, v1, omega)
    assert np.isclose((w - w1) @ omega, -((v - v1) @ omega), atol=1e-9 * (1 + np.abs(v - v1).max()))


def test_is_incoming():
    assert is_incoming([1, 0, 0], [0, 0, 0], [1, 0, 0])
    assert not is_incoming([0, 0, 0], [1, 0, 0], [1, 0, 0])
    assert is_incoming([0, 1, 0], [0, 0, 0], [1, 0, 0])  # boundary belongs to the hemisphere


def test_contact_normal():
    assert np.allclose(contact_normal([0, 0, 0], [2, 0, 0]), [1, 0, 0])
    assert np.allclose(contact_normal([0, 0, 0], [0, 0, -3]), [0, 0, -1])
    with pytest.raises(DegenerateGeometryError):
        contact_normal([1, 1, 1], [1, 1, 1])


@settings(max_examples=200, deadline=None)
@given(vectors, vectors)
def test_contact_normal_is_unit(x, y):
    if np.linalg.norm(x - y) < 1e-6:
        return
    assert abs(np.linalg.norm(contact_normal(x, y)) - 1.0) <= 1e-12


def test_phase_point_round_trip():
    p = PhasePoint([1, 2, 3], [4, 5, 6])
    assert PhasePoint.from_dict(p.to_dict()) == p
    assert PhasePoint.from_sequence(p.as_tuple()) == p
    assert np.allclose(p.free(2.0).x, [9, 12, 15])
    with pytest.raises(ValueError):
        PhasePoint([np.nan, 0, 0], [0, 0, 0])
