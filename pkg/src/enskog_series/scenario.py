"""Scenario files: JSON schema, parsing and the bundled regression corpus.

Lengths and times are dimensionless; the diameter ``a`` sets the length scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .dynamics import HardSphereConfig, advance, reverse
from .errors import InvalidConfigurationError
from .kernel import PhasePoint
from .regular import DensitySpec
from .testfunctions import TestFunction

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "a", "t"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "a": {"type": "number", "exclusiveMinimum": 0},
        "t": {"type": "number", "minimum": 0},
        "particles": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["x", "v"],
                "additionalProperties": False,
                "properties": {"x": _vec3, "v": _vec3},
            },
        },
        "density": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["gaussian", "box-maxwellian"]},
                "params": {"type": "object"},
            },
        },
        "lambda": {"type": ["number", "null"], "minimum": 0},
        "lambda_factor": {"type": "number", "exclusiveMinimum": 0},
        "reversed": {"type": "boolean"},
        "test_functions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind"],
                "properties": {"kind": {"type": "string"}, "params": {"type": "object"}},
            },
        },
        "n_max": {"type": ["integer", "null"], "minimum": 0},
        "epsilon": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "seed": {"type": "integer", "minimum": 0},
        "taus": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "random_taus": {"type": "integer", "minimum": 0},
        "representations": {"type": "boolean"},
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 2},
                "n_max": {"type": "integer", "minimum": 0},
                "mode": {"enum": ["zeta", "nodes"]},
                "streams": {"type": "integer", "minimum": 1},
                "force": {"type": "boolean"},
                "lambda_fraction": {"type": "number", "minimum": 0},
            },
        },
        "expect_pass": {"type": "boolean"},
        "expected": {"type": "object"},
    },
    "oneOf": [
        {"required": ["particles"], "not": {"required": ["density"]}},
        {"required": ["density"], "not": {"required": ["particles"]}},
    ],
}

DEFAULT_TEST_FUNCTIONS = (
    {"kind": "gaussian", "params": {"center": [0.0, 0.0, 0.0, 0.5, 0.0, 0.0], "width": 1.5}},
    {"kind": "coordinate", "params": {"index": 3}},
)


@dataclass
class Scenario:
    name: str
    a: float
    t: float
    particles: list[PhasePoint] | None = None
    density: DensitySpec | None = None
    lam: float | None = None
    lambda_factor: float = 1.0
    reversed: bool = False
    test_functions: list[TestFunction] = field(default_factory=list)
    n_max: int | None = None
    epsilon: list[float] = field(default_factory=list)
    seed: int = 0
    taus: list[float] = field(default_factory=list)
    random_taus: int = 0
    representations: bool = False
    mc: dict = field(default_factory=dict)
    description: str = ""
    expect_pass: bool | None = None
    expected: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def kind(self) -> str:
        return "particles" if self.particles is not None else "density"

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            raise InvalidConfigurationError(f"scenario schema violation: {exc.message}") from exc
        tfs = data.get("test_functions") or list(DEFAULT_TEST_FUNCTIONS)
        sc = cls(
            name=data["name"],
            a=float(data["a"]),
            t=float(data["t"]),
            particles=[PhasePoint(p["x"], p["v"]) for p in data["particles"]]
            if "particles" in data else None,
            density=DensitySpec.from_dict(data["density"]) if "density" in data else None,
            lam=data.get("lambda"),
            lambda_factor=float(data.get("lambda_factor", 1.0)),
            reversed=bool(data.get("reversed", False)),
            test_functions=[TestFunction.from_dict(tf) for tf in tfs],
            n_max=data.get("n_max"),
            epsilon=[float(e) for e in data.get("epsilon", [])],
            seed=int(data.get("seed", 0)),
            taus=[float(s) for s in data.get("taus", [])],
            random_taus=int(data.get("random_taus", 0)),
            representations=bool(data.get("representations", False)),
            mc=dict(data.get("mc", {})),
            description=data.get("description", ""),
            expect_pass=data.get("expect_pass"),
            expected=dict(data.get("expected", {})),
            raw=json.loads(json.dumps(data)),
        )
        if sc.particles is not None:
            HardSphereConfig(tuple(sc.particles), sc.a).check_physical()
        for s in sc.taus:
            if not s < sc.t:
                raise InvalidConfigurationError("composition times must lie inside (0, t)")
        return sc

    def to_dict(self) -> dict:
        out: dict = {"name": self.name}
        if self.description:
            out["description"] = self.description
        out["a"] = self.a
        out["t"] = self.t
        if self.particles is not None:
            out["particles"] = [p.to_dict() for p in self.particles]
        if self.density is not None:
            out["density"] = self.density.to_dict()
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.lambda_factor != 1.0:
            out["lambda_factor"] = self.lambda_factor
        if self.reversed:
            out["reversed"] = True
        out["test_functions"] = [tf.to_dict() for tf in self.test_functions]
        if self.n_max is not None:
            out["n_max"] = self.n_max
        if self.epsilon:
            out["epsilon"] = self.epsilon
        out["seed"] = self.seed
        if self.taus:
            out["taus"] = self.taus
        if self.random_taus:
            out["random_taus"] = self.random_taus
        if self.representations:
            out["representations"] = True
        if self.mc:
            out["mc"] = self.mc
        if self.expect_pass is not None:
            out["expect_pass"] = self.expect_pass
        if self.expected:
            out["expected"] = self.expected
        return out

    def base_config(self) -> HardSphereConfig:
        if self.particles is None:
            raise InvalidConfigurationError(f"scenario {self.name!r} has no particles")
        return HardSphereConfig(tuple(self.particles), self.a)

    def config(self) -> HardSphereConfig:
        """Initial configuration; for reversed scenarios the velocity-flipped final state."""
        cfg = self.base_config()
        if self.reversed:
            final, _ = advance(cfg, self.t)
            cfg = reverse(final)
        return cfg

    def rate(self) -> float:
        """The collision-rate parameter lambda."""
        if self.lam is not None:
            return float(self.lam) * self.lambda_factor
        n = len(self.particles) if self.particles is not None else 1
        return n * self.a ** 2 * self.lambda_factor


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    return Scenario.from_dict(data)


def corpus_dir() -> Path:
    return Path(str(resources.files("enskog_series") / "corpus"))


def corpus_paths() -> list[Path]:
    return sorted(corpus_dir().glob("*.json"))


def load_corpus() -> list[Scenario]:
    return [load_scenario(p) for p in corpus_paths()]
