import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enskog_series.errors import InvalidArgumentError, ResolutionError
from enskog_series.regular import (
    DensitySpec,
    Grid6,
    convergence_radius,
    cube_overlap_volume,
    h_functional,
    quadrature_order0,
    quadrature_order1_vx2,
    term_norm_bound,
    verify_geometric_decay,
    weak_mc_estimate,
)
from enskog_series.testfunctions import TestFunction

A = 0.8
F0 = DensitySpec.preset("gaussian")
VX2 = TestFunction("product", {"terms": [{"kind": "coordinate", "params": {"index": 3}}] * 2})
PHI = TestFunction("gaussian", {"center": [0.3, 0.1, 0, 0.5, 0, 0], "width": 1.5})
RADIUS = convergence_radius(A, F0.norm)


def test_convergence_radius():
    assert convergence_radius(1, 1) == pytest.approx(1 / 8)
    assert convergence_radius(2, 1) == pytest.approx(1 / 2)
    assert convergence_radius(1, 1 / 8) == pytest.approx(1)
    with pytest.raises(InvalidArgumentError):
        convergence_radius(0, 1)
    with pytest.raises(InvalidArgumentError):
        convergence_radius(1, -1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 12), st.floats(1e-3, 1.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_term_norm_bound(n, frac, a, norm):
    lam = frac * convergence_radius(a, norm) * 2
    b = term_norm_bound(n, lam, a, norm)
    assert b == pytest.approx((8 * lam / a ** 2) ** n * norm ** (n + 1))
    decreasing = term_norm_bound(n + 1, lam, a, norm) < b
    assert decreasing == (8 * lam * norm / a ** 2 < 1)
    assert term_norm_bound(0, lam, a, norm) == pytest.approx(norm)
    assert term_norm_bound(n, 1 / 16, 1, 1) == pytest.approx(0.5 ** n)


def test_density_presets():
    box = DensitySpec.preset("box-maxwellian")
    for f0 in (F0, box):
        assert f0.norm > 0
        assert f0.self_test(seed=1)["passed"]
        assert DensitySpec.from_dict(f0.to_dict()).to_dict() == f0.to_dict()
        rng = np.random.default_rng(0)
        z = f0.sample(rng, 5)
        assert z.shape == (5, 6) and np.all(f0(z[:, :3], z[:, 3:]) >= 0)
    with pytest.raises(InvalidArgumentError):
        DensitySpec("gaussian", {"x_std": [-1, 1, 1]})
    with pytest.raises(InvalidArgumentError):
        DensitySpec("unknown", {})


def test_density_norm_by_quadrature():
    g = Grid6.from_density(F0, [-6, -6, -6, -9, -4.5, -4.5], [6, 6, 6, 9, 4.5, 4.5], (14,) * 6)
    cell = np.prod(g.spacing)
    assert g.values.sum() * cell == pytest.approx(F0.norm, rel=1e-3)


def test_order_zero_against_quadrature():
    est = weak_mc_estimate(F0, VX2, 1.0, 0.1 * RADIUS, A, n_max=0, samples=40000, seed=3)
    q0 = quadrature_order0(F0, VX2, 1.0)
    assert q0 == pytest.approx(F0.norm * 1.5 ** 2)  # closed-form second moment
    assert abs(est.value - q0) <= 3 * est.stderr


def test_time_zero_gives_initial_integral():
    est = weak_mc_estimate(F0, PHI, 0.0, 0.2 * RADIUS, A, n_max=2, samples=20000, seed=1)
    assert all(row["value"] == 0.0 for row in est.per_n[1:])
    assert abs(est.value - quadrature_order0(F0, PHI, 0.0)) <= 3 * est.stderr


def test_zero_rate_leaves_free_transport():
    est = weak_mc_estimate(F0, PHI, 1.0, 0.0, A, n_max=2, samples=4000, seed=1)
    assert all(row["value"] == 0.0 and row["mass"] == 0.0 for row in est.per_n[1:])


def test_first_order_against_quadrature():
    lam = 0.5 * RADIUS
    q1 = quadrature_order1_vx2(F0, 1.0, lam, A)
    est = weak_mc_estimate(F0, VX2, 1.0, lam, A, n_max=1, samples=100000, seed=7)
    row = est.per_n[1]
    assert abs(row["value"] - q1) <= 3 * row["stderr"]


def test_node_mode_agrees_with_zeta_mode():
    lam = 0.5 * RADIUS
    z = weak_mc_estimate(F0, VX2, 1.0, lam, A, n_max=1, samples=60000, seed=2).per_n[1]
    nd = weak_mc_estimate(F0, VX2, 1.0, lam, A, n_max=1, samples=6000, seed=2, mode="nodes").per_n[1]
    assert abs(z["value"] - nd["value"]) <= 3 * math.hypot(z["stderr"], nd["stderr"])


def test_seeded_determinism_and_threads():
    kw = dict(n_max=2, samples=3000, seed=42)
    a = weak_mc_estimate(F0, PHI, 1.0, 0.1 * RADIUS, A, **kw)
    b = weak_mc_estimate(F0, PHI, 1.0, 0.1 * RADIUS, A, threads=4, **kw)
    assert a.to_dict() == b.to_dict()
    c = weak_mc_estimate(F0, PHI, 1.0, 0.1 * RADIUS, A, n_max=2, samples=3000, seed=43)
    assert c.value != a.value


def test_stderr_scaling():
    lo = weak_mc_estimate(F0, VX2, 1.0, 0.1 * RADIUS, A, n_max=0, samples=10000, seed=5)
    hi = weak_mc_estimate(F0, VX2, 1.0, 0.1 * RADIUS, A, n_max=0, samples=40000, seed=6)
    assert hi.stderr / lo.stderr == pytest.approx(0.5, rel=0.3)


def test_gain_minus_loss():
    est = weak_mc_estimate(F0, VX2, 1.0, 0.5 * RADIUS, A, n_max=2, samples=20000, seed=9)
    for row in est.per_n[1:]:
        assert math.isfinite(row["gain"]) and math.isfinite(row["loss"])
        se = math.hypot(row["gain_stderr"], row["loss_stderr"]) + row["stderr"]
        assert abs((row["gain"] - row["loss"]) - row["value"]) <= se + 1e-15


def test_safety_factor():
    with pytest.raises(InvalidArgumentError):
        weak_mc_estimate(F0, PHI, 1.0, RADIUS, A, n_max=1, samples=100)
    est = weak_mc_estimate(F0, PHI, 1.0, RADIUS, A, n_max=1, samples=100, force=True)
    assert est.warnings


def test_geometric_decay():
    rep = verify_geometric_decay(F0, PHI, 1.0, 0.1 * RADIUS, A, n_max=3, samples=20000, seed=0)
    assert rep["passed"] and not rep["offending"]
    assert all(r < 1 for r in rep["ratios"] if r > 0)


def test_uniform_box_h_functional():
    lam, a, n = 1.0, 0.4, 24
    vals = np.full((n, n, n, 2, 2, 2), 1 / 8)  # unit mass on [0,1]^3 x [-1,1]^3
    g = Grid6(vals, (0, 0, 0, -1, -1, -1), (1, 1, 1, 1, 1, 1))
    out = h_functional(g, lam, a)
    assert out["entropy"] == pytest.approx(math.log(1 / 8))
    assert out["pair"] == pytest.approx(0.5 * lam * cube_overlap_volume(1.0, a), rel=0.02)
    assert h_functional(g, 0.0, a)["value"] == pytest.approx(out["entropy"])


def test_cube_overlap_against_monte_carlo():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(size=(2, 400000, 3))
    frac = np.mean(np.sum((x - y) ** 2, axis=1) <= 0.3 ** 2)
    assert cube_overlap_volume(1.0, 0.3) == pytest.approx(frac, rel=0.02)


def test_h_functional_scaling_identity():
    g = Grid6.from_density(F0, [-3, -3, -3, -3, -2, -2], [3, 3, 3, 3, 2, 2], (16, 16, 16, 4, 4, 4))
    c = 1.7
    base = h_functional(g, 0.0, 0.8)["entropy"]
    scaled = h_functional(Grid6(c * g.values, g.lower, g.upper), 0.0, 0.8)["entropy"]
    mass = g.values.sum() * np.prod(g.spacing)
    assert scaled == pytest.approx(c * math.log(c) * mass + c * base)


def test_h_functional_resolution():
    g = Grid6(np.ones((4, 4, 4, 1, 1, 1)), (0, 0, 0, 0, 0, 0), (1, 1, 1, 1, 1, 1))
    with pytest.raises(ResolutionError):
        h_functional(g, 1.0, 0.4)
    with pytest.raises(InvalidArgumentError):
        Grid6(-np.ones((2,) * 6), (0,) * 6, (1,) * 6)
