"""Elastic hard-sphere collision law and contact geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidDirectionError

UNIT_TOL = 1e-9


def vec3(values) -> np.ndarray:
    """Coerce ``values`` into a finite float64 array of shape (3,)."""
    arr = np.asarray(values, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector component in {values!r}")
    return arr


@dataclass(frozen=True)
class PhasePoint:
    """Position and velocity of one sphere."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", vec3(self.x))
        object.__setattr__(self, "v", vec3(self.v))

    def as_tuple(self) -> tuple[float, ...]:
        return (*self.x.tolist(), *self.v.tolist())

    @classmethod
    def from_sequence(cls, values) -> PhasePoint:
        values = list(values)
        return cls(values[:3], values[3:6])

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "v": self.v.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> PhasePoint:
        return cls(data["x"], data["v"])

    def free(self, s: float) -> PhasePoint:
        """State after free flight for a duration ``s``."""
        return PhasePoint(self.x + self.v * s, self.v)

    def __eq__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash(self.as_tuple())


def _check_unit(omega: np.ndarray) -> None:
    norm = float(np.sqrt(omega @ omega))
    if abs(norm - 1.0) > UNIT_TOL:
        raise InvalidDirectionError(f"direction has norm {norm!r}, expected 1")


def elastic_reflect(v, v1, omega):
    """Return the velocity pair after an elastic collision with normal ``omega``.

    The normal components of ``v`` and ``v1`` along ``omega`` are exchanged;
    the map is an involution for fixed ``omega``.
    """
    v = vec3(v)
    v1 = vec3(v1)
    omega = vec3(omega)
    _check_unit(omega)
    exchange = omega * (omega @ (v - v1))
    return v - exchange, v1 + exchange


def is_incoming(v, v1, omega) -> bool:
    """True iff ``(v - v1) . omega >= 0`` (the closed hemisphere)."""
    v = vec3(v)
    v1 = vec3(v1)
    omega = vec3(omega)
    _check_unit(omega)
    return bool((v - v1) @ omega >= 0.0)


def contact_normal(x_first, x_second) -> np.ndarray:
    """Unit vector pointing from the first centre to the second."""
    d = vec3(x_second) - vec3(x_first)
    norm = float(np.sqrt(d @ d))
    if norm == 0.0:
        raise DegenerateGeometryError("coincident sphere centres")
    return d / norm
