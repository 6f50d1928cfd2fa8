import csv
import json

import pytest

from enskog_series.cli import main
from enskog_series.errors import InvalidConfigurationError
from enskog_series.harness import cmd_mc, cmd_simulate, cmd_trees, cmd_verify
from enskog_series.scenario import Scenario, corpus_paths, load_scenario


def write(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


BASE = {"name": "tiny", "a": 1.0, "t": 3.0,
        "particles": [{"x": [0, 0, 0], "v": [1, 0, 0]}, {"x": [3, 0.2, 0], "v": [-1, 0, 0]}]}


def test_corpus_size_and_kinds(corpus):
    names = set(corpus)
    assert len(names) >= 8
    for required in ("n1-free", "n2-headon", "n2-oblique", "n3-chain", "n4-contraction",
                     "n2-oblique-lambda-mismatch", "density-gaussian"):
        assert required in names
    assert any(sc.reversed for sc in corpus.values())


def test_schema_round_trip():
    for path in corpus_paths():
        data = json.loads(path.read_text())
        sc = Scenario.from_dict(data)
        again = Scenario.from_dict(sc.to_dict())
        assert again.to_dict() == sc.to_dict()


@pytest.mark.parametrize("patch", [
    {"a": -1.0},
    {"density": {"kind": "gaussian"}},
    {"particles": [{"x": [0, 0, 0], "v": [0, 0, 0]}, {"x": [0.5, 0, 0], "v": [0, 0, 0]}]},
    {"taus": [5.0]},
    {"unknown_field": 1},
])
def test_schema_rejections(patch):
    with pytest.raises(InvalidConfigurationError):
        Scenario.from_dict({**BASE, **patch})


def test_simulate_examples(corpus):
    free = cmd_simulate(corpus["n1-free"])
    p = corpus["n1-free"].particles[0]
    assert free.outputs["collisions"] == 0
    assert free.outputs["final"]["particles"][0]["x"] == pytest.approx(list(p.x + p.v * corpus["n1-free"].t))
    assert cmd_simulate(corpus["n2-headon"]).outputs["collisions"] == 1
    chain = cmd_simulate(corpus["n3-chain"])
    assert chain.outputs["collisions"] == corpus["n3-chain"].expected["collisions"]
    assert chain.passed


def test_trees_command():
    rep = cmd_trees(4)
    rows = {r["n"]: (r["full"], r["partial"]) for r in rep.outputs["counts"]}
    assert rows[0] == (1, 1) and rows[3] == (6, 5) and rows[4] == (24, 14)
    assert rep.passed


def test_verify_examples(corpus):
    assert cmd_verify(corpus["n2-headon"], random_taus=2).passed
    rep = cmd_verify(corpus["n4-contraction"], random_taus=0)
    assert rep.verdicts["representations"]
    assert not cmd_verify(corpus["n2-oblique-lambda-mismatch"]).passed


def test_mc_zero_rate():
    sc = Scenario.from_dict({"name": "m", "a": 0.8, "t": 1.0, "density": {"kind": "gaussian"},
                             "lambda": 0.0, "mc": {"samples": 2000, "n_max": 2}})
    rep = cmd_mc(sc)
    for entry in rep.outputs["estimates"]:
        assert all(r["value"] == 0.0 for r in entry["estimate"]["per_n"][1:])


def test_mc_time_zero_moment():
    vx2 = {"kind": "product", "params": {"terms": [{"kind": "coordinate", "params": {"index": 3}}] * 2}}
    density = {"kind": "gaussian", "params": {"v_std": [1.5, 0.75, 0.75]}}
    sc = Scenario.from_dict({"name": "m0", "a": 0.8, "t": 0.0, "density": density,
                             "test_functions": [vx2], "mc": {"samples": 20000, "n_max": 1}})
    est = cmd_mc(sc).outputs["estimates"][0]["estimate"]
    assert abs(est["value"] - 1.5 ** 2) <= 3 * est["stderr"]


def test_exit_codes(tmp_path, corpus):
    out = tmp_path / "r.json"
    assert main(["trees", "--n", "3", "--out", str(out), "--no-figures"]) == 0
    assert main(["trees", "--n", "12", "--out", str(out)]) == 1
    assert main(["verify", "--scenario", str(tmp_path / "missing.json")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == 1
    bad = write(tmp_path, {**BASE, "a": "wide"}, "bad.json")
    assert main(["simulate", "--scenario", str(bad)]) == 1
    grazing = write(tmp_path, {**BASE, "particles": [{"x": [0, 0, 0], "v": [1, 0, 0]},
                                                      {"x": [3, 1, 0], "v": [0, 0, 0]}]}, "g.json")
    assert main(["simulate", "--scenario", str(grazing), "--out", str(out)]) == 2
    mismatch = [p for p in corpus_paths() if p.stem == "n2-oblique-lambda-mismatch"][0]
    assert main(["verify", "--scenario", str(mismatch), "--out", str(out), "--no-figures"]) == 3
    assert main(["simulate", "--scenario", str(write(tmp_path, BASE)), "--out", str(out)]) == 0


def test_outputs_and_figures(tmp_path):
    scen = write(tmp_path, BASE)
    out = tmp_path / "run" / "sim.json"
    assert main(["simulate", "--scenario", str(scen), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["command"] == "simulate" and report["scenario"]["name"] == "tiny"
    assert (tmp_path / "run" / "sim_trajectory.png").stat().st_size > 0
    assert "wall_clock_seconds" in json.loads((tmp_path / "run" / "sim_timing.json").read_text())
    vout = tmp_path / "run" / "verify.csv"
    assert main(["verify", "--scenario", str(scen), "--out", str(vout), "--format", "csv",
                 "--epsilon", "0,0.01"]) == 0
    rows = list(csv.DictReader(vout.open()))
    assert rows and "n" in rows[0]
    assert (tmp_path / "run" / "verify_series.png").exists()
    assert (tmp_path / "run" / "verify_intervals.png").exists()


def test_report_reruns_from_echo(tmp_path):
    scen = write(tmp_path, BASE)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    main(["verify", "--scenario", str(scen), "--out", str(out1), "--no-figures"])
    echo = json.loads(out1.read_text())["scenario"]
    main(["verify", "--scenario", str(write(tmp_path, echo, "echo.json")), "--out", str(out2),
          "--no-figures"])
    assert out1.read_bytes() == out2.read_bytes()


def test_load_scenario_missing(tmp_path):
    with pytest.raises(InvalidConfigurationError):
        load_scenario(tmp_path / "nope.json")
