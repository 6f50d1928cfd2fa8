"""Frozen regression outputs stored with every bundled scenario."""

import pytest

from enskog_series.dynamics import advance
from enskog_series.empirical import EmpiricalMeasure
from enskog_series.harness import cmd_mc, cmd_verify
from enskog_series.scenario import load_corpus

SCENARIOS = {sc.name: sc for sc in load_corpus()}
PARTICLES = sorted(n for n, sc in SCENARIOS.items() if sc.kind == "particles")
DENSITIES = sorted(n for n, sc in SCENARIOS.items() if sc.kind == "density")


@pytest.mark.parametrize("name", PARTICLES)
def test_trajectory_matches_frozen(name):
    sc = SCENARIOS[name]
    exp = sc.expected
    final, traj = advance(sc.config(), sc.t)
    assert traj.collision_count == exp["collisions"]
    assert [list(e.pair) for e in traj.events] == exp["event_pairs"]
    assert [e.time for e in traj.events] == pytest.approx(exp["event_times"], rel=1e-12)
    mu = EmpiricalMeasure.from_config(final)
    refs = [mu.integrate(phi) for phi in sc.test_functions]
    assert refs == pytest.approx(exp["references"], rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("name", PARTICLES)
def test_verify_matches_frozen(name):
    sc = SCENARIOS[name]
    rep = cmd_verify(sc, random_taus=2)
    assert rep.passed == sc.expect_pass
    got = rep.outputs["direct_series"]["totals_by_n"]
    assert got == pytest.approx(sc.expected["direct_totals_by_n"], rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("name", DENSITIES)
def test_mc_matches_frozen(name):
    sc = SCENARIOS[name]
    rep = cmd_mc(sc)
    assert rep.passed
    for entry, frozen in zip(rep.outputs["estimates"], sc.expected["estimates"]):
        for row, ref in zip(entry["estimate"]["per_n"], frozen):
            assert row["value"] == pytest.approx(ref["value"], rel=1e-12, abs=1e-15)
            assert row["stderr"] == pytest.approx(ref["stderr"], rel=1e-12, abs=1e-15)
