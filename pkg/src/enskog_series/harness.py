"""Report-producing commands shared by the CLI and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__, trees
from .dynamics import advance, reverse
from .empirical import (
    EmpiricalMeasure,
    Expansion,
    compare_representations,
    verify_microscopic,
    verify_semigroup,
)
from .errors import InvalidConfigurationError
from .regular import (
    convergence_radius,
    quadrature_order0,
    verify_geometric_decay,
)
from .scenario import Scenario

TAU_MARGIN = 1e-6


@dataclass
class RunReport:
    command: str
    scenario: dict | None
    outputs: dict
    verdicts: dict = field(default_factory=dict)
    csv_rows: list[dict] = field(default_factory=list, repr=False)
    figures: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return to_jsonable({
            "tool": "enskog-series",
            "version": __version__,
            "command": self.command,
            "scenario": self.scenario,
            "outputs": self.outputs,
            "verdicts": self.verdicts,
            "passed": self.passed,
        })


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _require(sc: Scenario, kind: str):
    if sc.kind != kind:
        raise InvalidConfigurationError(f"scenario {sc.name!r} is a {sc.kind} scenario, need {kind}")


def cmd_simulate(sc: Scenario, *, reversibility: bool = True) -> RunReport:
    _require(sc, "particles")
    cfg = sc.config()
    final, traj = advance(cfg, sc.t)
    outputs = {
        "collisions": traj.collision_count,
        "events": [e.to_dict() for e in traj.events],
        "final": final.to_dict(),
        "energy_drift": final.energy() - cfg.energy(),
        "momentum_drift": (final.momentum() - cfg.momentum()).tolist(),
    }
    verdicts = {}
    if reversibility:
        back, _ = advance(reverse(final), sc.t)
        err = max(
            float(np.max(np.abs(back.positions() - cfg.positions()))),
            float(np.max(np.abs(-back.velocities() - cfg.velocities()))),
        )
        outputs["reversibility_error"] = err
        verdicts["reversibility"] = err <= 1e-7
    if "collisions" in sc.expected and not sc.reversed:
        verdicts["expected_collisions"] = traj.collision_count == sc.expected["collisions"]
    rows = [{"index": i + 1, "i": e.pair[0], "j": e.pair[1], "time": repr(e.time)}
            for i, e in enumerate(traj.events)]
    return RunReport("simulate", sc.to_dict(), outputs, verdicts, rows,
                     {"trajectory": (cfg, traj)})


def cmd_trees(n: int, cap: int = trees.DEFAULT_CAP) -> RunReport:
    rows = []
    for m in range(n + 1):
        full, partial = trees.count_bound_check(m, cap)
        rows.append({"n": m, "full": full, "partial": partial, "bound": 4 ** m,
                     "class_sizes_sum": sum(r["class_size"] for r in trees.class_table(m, cap))})
    table = trees.class_table(n, cap)
    outputs = {"counts": rows, "partial_trees": table}
    verdicts = {
        "catalan": all(r["partial"] == math.comb(2 * r["n"], r["n"]) // (r["n"] + 1) for r in rows),
        "factorial": all(r["full"] == math.factorial(r["n"]) for r in rows),
        "partition": all(r["class_sizes_sum"] == r["full"] for r in rows),
        "bound": all(r["partial"] < r["bound"] for r in rows if r["n"] > 0),
    }
    return RunReport("trees", {"n": n, "cap": cap}, outputs, verdicts, rows, {"counts": rows})


def _random_taus(cfg, t: float, count: int, seed: int) -> list[float]:
    if count <= 0:
        return []
    _, traj = advance(cfg, t)
    times = [e.time for e in traj.events]
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        s = float(rng.uniform(0.0, t))
        if s <= TAU_MARGIN * t or s >= (1 - TAU_MARGIN) * t:
            continue
        if any(abs(s - u) <= TAU_MARGIN * t for u in times):
            continue
        out.append(s)
    return out


def cmd_verify(sc: Scenario, *, n_max: int | None = None, epsilon: list[float] | None = None,
               seed: int | None = None, random_taus: int | None = None) -> RunReport:
    _require(sc, "particles")
    cfg = sc.config()
    lam = sc.rate()
    t = sc.t
    n_max = sc.n_max if n_max is None else n_max
    seed = sc.seed if seed is None else seed
    epsilon = sc.epsilon if epsilon is None else epsilon
    count = sc.random_taus if random_taus is None else random_taus
    outputs: dict = {"lambda": lam, "N": cfg.n}
    verdicts: dict = {}
    microscopic = []
    for i, phi in enumerate(sc.test_functions):
        rep = verify_microscopic(cfg, t, phi, lam=lam, n_max=n_max)
        microscopic.append(rep.to_dict())
        verdicts[f"microscopic[{i}]"] = rep.passed
    outputs["microscopic"] = microscopic
    taus = list(sc.taus) + _random_taus(cfg, t, count, seed)
    semigroup = []
    for j, tau in enumerate(taus):
        rep = verify_semigroup(cfg, tau, t, sc.test_functions[0], lam=lam, n_max=n_max)
        semigroup.append(rep.to_dict())
        verdicts[f"semigroup[{j}]"] = rep.passed
    outputs["semigroup"] = semigroup
    if sc.representations:
        rep = compare_representations(cfg, t, sc.test_functions[0], n_max=n_max)
        outputs["representations"] = rep.to_dict()
        verdicts["representations"] = rep.passed
    expansion = Expansion(EmpiricalMeasure.from_config(cfg), t, n_max, lam)
    direct = expansion.report(sc.test_functions[0])
    outputs["direct_series"] = direct.to_dict(include_terms=False)
    outputs["outcome_counts"] = expansion.outcome_counts()
    if epsilon:
        outputs["epsilon_scan"] = [
            {"epsilon": eps,
             "total": Expansion(EmpiricalMeasure.from_config(cfg), t, n_max, lam, eps)
             .report(sc.test_functions[0]).total}
            for eps in epsilon
        ]
    figures = {"series": direct, "microscopic": microscopic}
    return RunReport("verify", sc.to_dict(), outputs, verdicts, direct.csv_rows(), figures)


def cmd_mc(sc: Scenario, *, n_max: int | None = None, seed: int | None = None,
           threads: int = 1) -> RunReport:
    _require(sc, "density")
    f0 = sc.density
    mc = dict(sc.mc)
    seed = sc.seed if seed is None else seed
    nm = mc.get("n_max", 4) if n_max is None else n_max
    if sc.lam is not None:
        lam = sc.rate()
    else:
        lam = mc.get("lambda_fraction", 0.1) * convergence_radius(sc.a, f0.norm)
    outputs: dict = {"lambda": lam, "convergence_radius": convergence_radius(sc.a, f0.norm)}
    verdicts: dict = {}
    outputs["sampler"] = f0.self_test(seed=seed)
    verdicts["sampler"] = outputs["sampler"]["passed"]
    estimates = []
    rows = []
    for i, phi in enumerate(sc.test_functions):
        decay = verify_geometric_decay(
            f0, phi, sc.t, lam, sc.a, nm, mc.get("samples", 20000), seed,
            mode=mc.get("mode", "zeta"), streams=mc.get("streams", 8), threads=threads,
            force=mc.get("force", False),
        )
        entry = {"phi": phi.to_dict(), "estimate": decay["estimate"], "decay": {
            k: decay[k] for k in ("passed", "offending", "rows", "ratios")}}
        verdicts[f"decay[{i}]"] = decay["passed"]
        if f0.kind == "gaussian":
            q0 = quadrature_order0(f0, phi, sc.t)
            row0 = decay["estimate"]["per_n"][0]
            entry["quadrature_order0"] = q0
            entry["order0_within_3sigma"] = abs(row0["value"] - q0) <= 3 * row0["stderr"] + 1e-12
            verdicts[f"quadrature0[{i}]"] = entry["order0_within_3sigma"]
        estimates.append(entry)
        for row in decay["estimate"]["per_n"]:
            rows.append({"phi": i, **{k: row[k] for k in ("n", "value", "stderr", "mass",
                                                          "mass_stderr", "gain", "loss", "bound")}})
    outputs["estimates"] = estimates
    return RunReport("mc", sc.to_dict(), outputs, verdicts, rows, {"mc": estimates})

