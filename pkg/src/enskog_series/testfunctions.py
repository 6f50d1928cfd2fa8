"""Bounded test functions on phase space, serialisable by name and parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

KINDS = ("coordinate", "gaussian", "bump", "product", "sum", "constant")


@dataclass(frozen=True)
class TestFunction:
    """A test function phi(x, v) on R^6.

    ``kind`` selects the family:

    * ``coordinate``: ``z[index]`` with ``index`` in 0..5 (x then v);
      bounded on compacts, which is all the exact checks need.
    * ``gaussian``: ``amplitude * exp(-|z - center|^2 / (2 width^2))``.
    * ``bump``: ``exp(-1 / (1 - |z - center|^2 / radius^2))`` inside the ball.
    * ``product``/``sum``: of ``terms`` (``sum`` takes ``coefficients``).
    * ``constant``: ``value``.
    """

    __test__ = False  # keep pytest from collecting this class

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown test function kind {self.kind!r}")
        if self.kind in ("product", "sum"):
            terms = tuple(
                t if isinstance(t, TestFunction) else TestFunction.from_dict(t)
                for t in self.params.get("terms", ())
            )
            params = dict(self.params)
            params["terms"] = terms
            object.__setattr__(self, "params", params)

    def __call__(self, x, v):
        """Evaluate at positions ``x`` and velocities ``v`` (trailing axis 3)."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        z = np.concatenate([x, v], axis=-1)
        return self._eval(z)

    def at(self, point) -> float:
        return float(self(point.x, point.v))

    def _eval(self, z):
        p = self.params
        if self.kind == "coordinate":
            return z[..., int(p["index"])] * 1.0
        if self.kind == "constant":
            return np.full(z.shape[:-1], float(p["value"]))
        if self.kind == "gaussian":
            c = np.asarray(p.get("center", [0.0] * 6), dtype=float)
            w = float(p.get("width", 1.0))
            amp = float(p.get("amplitude", 1.0))
            r2 = np.sum((z - c) ** 2, axis=-1)
            return amp * np.exp(-r2 / (2.0 * w * w))
        if self.kind == "bump":
            c = np.asarray(p.get("center", [0.0] * 6), dtype=float)
            rad = float(p.get("radius", 1.0))
            u = np.sum((z - c) ** 2, axis=-1) / (rad * rad)
            inside = u < 1.0
            out = np.zeros_like(u)
            out[inside] = np.exp(-1.0 / (1.0 - u[inside]))
            return out
        if self.kind == "product":
            out = np.ones(z.shape[:-1])
            for term in p["terms"]:
                out = out * term._eval(z)
            return out
        coeffs = p.get("coefficients", [1.0] * len(p["terms"]))
        out = np.zeros(z.shape[:-1])
        for c, term in zip(coeffs, p["terms"]):
            out = out + float(c) * term._eval(z)
        return out

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "terms" in params:
            params["terms"] = [t.to_dict() for t in params["terms"]]
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data: dict) -> TestFunction:
        return cls(data["kind"], dict(data.get("params", {})))


def default_test_functions() -> list[TestFunction]:
    """A small battery used when a scenario does not name its own."""
    return [
        TestFunction("coordinate", {"index": 0}),
        TestFunction("coordinate", {"index": 3}),
        TestFunction("gaussian", {"center": [0.3, -0.2, 0.1, 0.5, 0.0, -0.4], "width": 1.7}),
    ]
