import math

import numpy as np
import pytest
from conftest import config, random_config
from hypothesis import given, settings
from hypothesis import strategies as st

from enskog_series.dynamics import (
    HardSphereConfig,
    advance,
    marginal_support,
    reverse,
    time_to_contact,
)
from enskog_series.errors import (
    InvalidArgumentError,
    InvalidConfigurationError,
    PathologyError,
)
from enskog_series.kernel import PhasePoint


def test_time_to_contact_examples():
    zi = PhasePoint([0, 0, 0], [1, 0, 0])
    assert time_to_contact(zi, PhasePoint([3, 0, 0], [0, 0, 0]), 1.0) == pytest.approx(2.0)
    assert time_to_contact(zi, PhasePoint([3, 1, 0], [1, 0, 0]), 1.0) is None
    assert time_to_contact(zi, PhasePoint([3, 0, 0], [2, 0, 0]), 1.0) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000))
def test_time_to_contact_root(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-3, 3, 3)
    v = rng.normal(size=3)
    if np.linalg.norm(x) < 1.1:
        return
    s = time_to_contact(PhasePoint([0, 0, 0], [0, 0, 0]), PhasePoint(x, v), 1.0)
    if s is None:
        # no approach, or the closest distance stays above a
        b = x @ v
        closest = np.linalg.norm(x - v * (b / (v @ v))) if b < 0 else np.inf
        assert closest >= 1.0 - 1e-9
        return
    d = x + v * s
    assert abs(d @ d - 1.0) <= 1e-9
    # bisection oracle: the pair stays apart before s
    grid = np.linspace(0, s, 50)[:-1]
    assert np.all(np.linalg.norm(x + np.outer(grid, v), axis=1) >= 1.0 - 1e-9)


def test_single_sphere_free_flight():
    cfg = config([[1, 2, 3, 0.5, -1, 2]], 0.5)
    final, traj = advance(cfg, 2.0)
    assert traj.collision_count == 0
    assert np.allclose(final.positions()[0], [2, 0, 7])


def test_head_on_exchange():
    cfg = config([[0, 0, 0, 1, 0, 0], [3, 0, 0, -1, 0, 0]], 1.0)
    final, traj = advance(cfg, 3.0)
    assert traj.collision_count == 1
    assert traj.events[0].time == pytest.approx(1.0)
    assert np.allclose(final.velocities(), [[-1, 0, 0], [1, 0, 0]])


def test_reverse():
    cfg = config([[0, 0, 0, 1, 2, 3]], 1.0)
    assert np.allclose(reverse(cfg).velocities(), [[-1, -2, -3]])
    assert reverse(reverse(cfg)).particles == cfg.particles


def test_overlap_rejected():
    with pytest.raises(InvalidConfigurationError):
        advance(config([[0, 0, 0, 0, 0, 0], [0.5, 0, 0, 0, 0, 0]], 1.0), 1.0)
    with pytest.raises(InvalidArgumentError):
        advance(config([[0, 0, 0, 0, 0, 0]], 1.0), -1.0)


def test_simultaneous_collisions_flagged():
    # 1 and 3 hit 2 from both sides at the same instant
    cfg = config([[-2, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 0], [2, 0, 0, -1, 0, 0]], 1.0)
    with pytest.raises(PathologyError) as exc:
        advance(cfg, 3.0)
    assert exc.value.kind == "simultaneous"


def test_grazing_flagged():
    cfg = config([[0, 0, 0, 1, 0, 0], [3, 1, 0, 0, 0, 0]], 1.0)
    with pytest.raises(PathologyError) as exc:
        advance(cfg, 5.0)
    assert exc.value.kind == "grazing"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_conservation_and_reversibility(seed, n):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng, n)
    try:
        final, traj = advance(cfg, 2.0)
        back, _ = advance(reverse(final), 2.0)
    except PathologyError:
        return
    assert abs(final.energy() - cfg.energy()) <= 1e-9 * (1 + cfg.energy())
    assert np.allclose(final.momentum(), cfg.momentum(), atol=1e-9)
    assert np.allclose(back.positions(), cfg.positions(), atol=1e-7)
    assert np.allclose(-back.velocities(), cfg.velocities(), atol=1e-7)
    for e in traj.events:
        i, j = e.pair
        s = traj.state_at(e.time)
        assert abs(np.linalg.norm(s.particles[i - 1].x - s.particles[j - 1].x) - cfg.a) <= 1e-9


def test_energy_against_halved_tolerance():
    rng = np.random.default_rng(3)
    cfg = random_config(rng, 3, a=0.5, box=1.5)
    f1, t1 = advance(cfg, 3.0)
    f2, t2 = advance(cfg, 3.0, delta_sim=0.5e-9)
    assert [e.pair for e in t1.events] == [e.pair for e in t2.events]
    assert np.allclose(f1.positions(), f2.positions(), atol=1e-12)
    assert abs(f1.energy() - cfg.energy()) <= 1e-9


def test_marginal_support():
    cfg = config([[0, 0, 0, 1, 0, 0], [3, 0, 0, 0, 0, 0], [0, 3, 0, 0, 0, 0]], 1.0)
    _, traj = advance(cfg, 1.0)
    one = marginal_support(traj, 1.0, 1)
    assert len(one) == 3 and all(w == pytest.approx(1 / 3) for w, _ in one)
    two = marginal_support(traj, 1.0, 2)
    assert len(two) == 6 and all(w == pytest.approx(1 / 6) for w, _ in two)
    three = marginal_support(traj, 1.0, 3)
    assert len(three) == math.factorial(3)
    assert sum(w for w, _ in three) == pytest.approx(1.0)


def test_config_round_trip():
    cfg = config([[0, 0, 0, 1, 0, 0], [3, 0, 0, 0, 0, 0]], 1.0)
    assert HardSphereConfig.from_dict(cfg.to_dict()).particles == cfg.particles
