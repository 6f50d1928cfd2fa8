"""Event-driven dynamics of N hard spheres in free space."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EventCascadeError,
    InvalidArgumentError,
    InvalidConfigurationError,
    PathologyError,
)
from .kernel import PhasePoint, elastic_reflect

DELTA_SIM = 1e-9
DELTA_GRAZE = 1e-9
OVERLAP_TOL = 1e-9
MAX_EVENTS = 10**6


@dataclass(frozen=True)
class HardSphereConfig:
    particles: tuple[PhasePoint, ...]
    a: float
    clock: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        if len(self.particles) < 1:
            raise InvalidConfigurationError("need at least one particle")
        if not self.a > 0:
            raise InvalidConfigurationError(f"diameter must be positive, got {self.a}")
        if self.clock < 0:
            raise InvalidConfigurationError("clock must be non-negative")

    @property
    def n(self) -> int:
        return len(self.particles)

    def positions(self) -> np.ndarray:
        return np.array([p.x for p in self.particles])

    def velocities(self) -> np.ndarray:
        return np.array([p.v for p in self.particles])

    def min_distance(self) -> float:
        xs = self.positions()
        best = math.inf
        for i, j in itertools.combinations(range(self.n), 2):
            best = min(best, float(np.linalg.norm(xs[i] - xs[j])))
        return best

    def check_physical(self) -> None:
        """Raise if any pair of centres is closer than the diameter."""
        limit = self.a * (1.0 - OVERLAP_TOL)
        xs = self.positions()
        for i, j in itertools.combinations(range(self.n), 2):
            dist = float(np.linalg.norm(xs[i] - xs[j]))
            if dist < limit:
                raise InvalidConfigurationError(
                    f"particles {i + 1} and {j + 1} overlap (distance {dist:.6g} < a={self.a})"
                )

    def momentum(self) -> np.ndarray:
        return self.velocities().sum(axis=0)

    def energy(self) -> float:
        v = self.velocities()
        return float(0.5 * np.sum(v * v))

    def subset(self, labels) -> HardSphereConfig:
        """Configuration restricted to the given 0-based particle indices."""
        return HardSphereConfig(tuple(self.particles[i] for i in labels), self.a, self.clock)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "clock": self.clock,
            "particles": [p.to_dict() for p in self.particles],
        }

    @classmethod
    def from_dict(cls, data: dict) -> HardSphereConfig:
        return cls(
            tuple(PhasePoint.from_dict(p) for p in data["particles"]),
            float(data["a"]),
            float(data.get("clock", 0.0)),
        )


@dataclass(frozen=True)
class CollisionEvent:
    pair: tuple[int, int]
    time: float
    normal: np.ndarray

    def to_dict(self) -> dict:
        return {"pair": list(self.pair), "time": self.time, "normal": self.normal.tolist()}


@dataclass(frozen=True)
class Trajectory:
    initial: HardSphereConfig
    events: tuple[CollisionEvent, ...]
    horizon: float
    final: HardSphereConfig = field(repr=False)

    @property
    def collision_count(self) -> int:
        return len(self.events)

    def state_at(self, s: float) -> HardSphereConfig:
        if not 0.0 <= s <= self.horizon:
            raise InvalidArgumentError(f"time {s} outside [0, {self.horizon}]")
        return advance(self.initial, s)[0]

    def to_dict(self) -> dict:
        return {
            "initial": self.initial.to_dict(),
            "horizon": self.horizon,
            "events": [e.to_dict() for e in self.events],
            "final": self.final.to_dict(),
        }


def _contact_root(dx, dv, a):
    """Smaller root of |dx + dv s|^2 = a^2 for an approaching pair, else None."""
    b = float(dx @ dv)
    if b >= 0.0:
        return None
    vv = float(dv @ dv)
    c = float(dx @ dx) - a * a
    disc = b * b - vv * c
    if disc < 0.0:
        return None
    # product-of-roots form avoids cancellation when the pair barely touches
    return c / (-b + math.sqrt(disc))


def time_to_contact(zi: PhasePoint, zj: PhasePoint, a: float):
    """Time until two free spheres reach centre distance ``a`` while approaching.

    Returns ``None`` when they never touch moving forward in time.
    """
    dx = zj.x - zi.x
    dv = zj.v - zi.v
    if float(dx @ dx) < (a * (1.0 - OVERLAP_TOL)) ** 2:
        raise InvalidConfigurationError("overlapping spheres passed to time_to_contact")
    s = _contact_root(dx, dv, a)
    if s is None:
        return None
    return max(s, 0.0)


def reverse(config: HardSphereConfig) -> HardSphereConfig:
    """Same positions, negated velocities."""
    return HardSphereConfig(
        tuple(PhasePoint(p.x, -p.v) for p in config.particles), config.a, config.clock
    )


def advance(config: HardSphereConfig, t: float, *, max_events: int = MAX_EVENTS,
            delta_sim: float = DELTA_SIM, delta_graze: float = DELTA_GRAZE):
    """Evolve ``config`` for a duration ``t``.

    Returns ``(final_config, trajectory)``; event times in the trajectory are
    measured from the start of the call.
    """
    if t < 0:
        raise InvalidArgumentError("duration must be non-negative")
    config.check_physical()
    n = config.n
    a = config.a
    xs = [p.x.copy() for p in config.particles]
    vs = [p.v.copy() for p in config.particles]
    tl = [0.0] * n  # time at which xs[i] is valid
    counts = [0] * n
    heap: list = []
    seq = itertools.count()
    sim_gap = delta_sim * t

    def schedule(i, j, now):
        dx = (xs[j] + vs[j] * (now - tl[j])) - (xs[i] + vs[i] * (now - tl[i]))
        s = _contact_root(dx, vs[j] - vs[i], a)
        if s is None:
            return
        s = max(s, 0.0)
        when = now + s
        if when <= t:
            heapq.heappush(heap, (when, next(seq), i, j, counts[i], counts[j]))

    for i, j in itertools.combinations(range(n), 2):
        schedule(i, j, 0.0)

    events: list[CollisionEvent] = []
    last_time = -math.inf
    while heap:
        when, _, i, j, ci, cj = heapq.heappop(heap)
        if counts[i] != ci or counts[j] != cj:
            continue
        if when - last_time <= sim_gap:
            prev = events[-1].pair
            raise PathologyError(
                "simultaneous",
                f"collisions {prev} and {(i + 1, j + 1)} within {when - last_time:.3g}",
                time=when, pair=(i + 1, j + 1),
            )
        if len(events) >= max_events:
            raise EventCascadeError(f"more than {max_events} collisions before t={t}")
        for k in (i, j):
            xs[k] = xs[k] + vs[k] * (when - tl[k])
            tl[k] = when
        dx = xs[j] - xs[i]
        omega = dx / np.linalg.norm(dx)
        dv = vs[j] - vs[i]
        speed = float(np.linalg.norm(dv))
        if abs(float(omega @ dv)) < delta_graze * speed:
            raise PathologyError("grazing", "grazing collision", time=when, pair=(i + 1, j + 1))
        vs[i], vs[j] = elastic_reflect(vs[i], vs[j], omega)
        counts[i] += 1
        counts[j] += 1
        events.append(CollisionEvent((i + 1, j + 1), when, omega))
        last_time = when
        for k in range(n):
            if k != i and k != j:
                schedule(min(i, k), max(i, k), when)
                schedule(min(j, k), max(j, k), when)
        schedule(i, j, when)

    final = HardSphereConfig(
        tuple(PhasePoint(xs[k] + vs[k] * (t - tl[k]), vs[k]) for k in range(n)),
        a,
        config.clock + t,
    )
    traj = Trajectory(config, tuple(events), t, final)
    return final, traj


def marginal_support(traj: Trajectory, t: float, j: int):
    """Atoms of the j-particle empirical marginal at time ``t``.

    Every ordered j-tuple of distinct particles carries weight
    1/(N(N-1)...(N-j+1)).
    """
    n = traj.initial.n
    if j < 1 or j > n:
        raise InvalidArgumentError(f"marginal order {j} outside 1..{n}")
    state = traj.state_at(t)
    weight = 1.0 / math.perm(n, j)
    return [
        (weight, tuple(state.particles[i] for i in combo))
        for combo in itertools.permutations(range(n), j)
    ]
