"""Boltzmann-Enskog backward and forward flows on a partially ordered tree.

Labels follow the K-offset convention of :mod:`enskog_series.trees`: particle
``m >= 2`` is created at node ``m - 1`` (time ``t_{m-1}``, direction
``omega_{m-1}``, velocity ``v_m``, sign ``sigma_{m-1}``) by its parent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import trees
from .dynamics import DELTA_GRAZE, DELTA_SIM
from .errors import InvalidNodesError, PathologyError
from .kernel import PhasePoint, elastic_reflect

UNIT_TOL = 1e-9


def check_signs(signs, n: int) -> tuple[int, ...]:
    signs = tuple(int(s) for s in signs)
    if len(signs) != n or any(s not in (1, -1) for s in signs):
        raise InvalidNodesError(f"sign sequence {signs} is not in {{+1,-1}}^{n}")
    return signs


@dataclass(frozen=True)
class NodeVariables:
    times: tuple[float, ...]
    omegas: np.ndarray
    velocities: np.ndarray  # rows are v_2, ..., v_{n+1}

    def __post_init__(self):
        times = tuple(float(s) for s in self.times)
        n = len(times)
        omegas = np.asarray(self.omegas, dtype=float).reshape(n, 3)
        velocities = np.asarray(self.velocities, dtype=float).reshape(n, 3)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "velocities", velocities)

    @property
    def n(self) -> int:
        return len(self.times)

    def check(self, k, t: float) -> None:
        """Raise unless the times respect the partial order of ``k`` inside (0, t)."""
        if self.n != len(k):
            raise InvalidNodesError("node variables and tree have different orders")
        for s in self.times:
            if not 0.0 < s < t:
                raise InvalidNodesError(f"creation time {s} outside (0, {t})")
        for p, q in trees.creation_order_constraints(k):
            if not self.times[q - 2] < self.times[p - 2]:
                raise InvalidNodesError(
                    f"particle {q} must be created before particle {p} going forward"
                )
        norms = np.linalg.norm(self.omegas, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise InvalidNodesError("impact directions must be unit vectors")

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "omegas": self.omegas.tolist(),
            "velocities": self.velocities.tolist(),
        }


@dataclass
class FlowState:
    """Alive particles at ``clock`` plus the creation/absorption log."""

    alive: dict[int, PhasePoint]
    clock: float
    log: list[dict] = field(default_factory=list)
    # velocity of the parent just after each creation, indexed by node i-1
    parent_velocity: list[np.ndarray] = field(default_factory=list)

    def tuple(self) -> list[PhasePoint]:
        return [self.alive[m] for m in sorted(self.alive)]

    def to_dict(self) -> dict:
        return {
            "clock": self.clock,
            "alive": {str(m): p.to_dict() for m, p in sorted(self.alive.items())},
            "log": self.log,
        }


def backward_flow(root: PhasePoint, k, signs, nodes: NodeVariables, t: float, a: float) -> FlowState:
    """Build the (n+1)-particle configuration at time 0 from node variables."""
    k = tuple(k)
    n = len(k)
    signs = check_signs(signs, n)
    parents = trees.parent_map(k)
    nodes.check(k, t)
    # particle state: label -> [x at time ref, v, ref]
    state: dict[int, list] = {1: [root.x.copy(), root.v.copy(), t]}
    order = sorted(range(2, n + 2), key=lambda m: (-nodes.times[m - 2], m))
    log = []
    eta = [None] * n
    for m in order:
        node = m - 2
        s = nodes.times[node]
        p = parents[m - 2]
        xp, vp, ref = state[p]
        xi = xp + vp * (s - ref)
        omega = nodes.omegas[node]
        vm = nodes.velocities[node]
        if float((vp - vm) @ omega) < 0.0:
            raise InvalidNodesError(f"node {node + 1}: direction not in the incoming hemisphere")
        eta[node] = vp.copy()
        if signs[node] < 0:
            state[m] = [xi + a * omega, vm.copy(), s]
            state[p] = [xi, vp, s]
        else:
            vp_new, vm_new = elastic_reflect(vp, vm, omega)
            state[m] = [xi - a * omega, vm_new, s]
            state[p] = [xi, vp_new, s]
        log.append({"label": m, "time": s, "parent": p, "sigma": signs[node],
                    "omega": omega.tolist()})
    alive = {m: PhasePoint(x - v * ref, v) for m, (x, v, ref) in state.items()}
    return FlowState(alive, 0.0, log, eta)


def jacobian_weight(k, signs, nodes: NodeVariables, trace: FlowState, a: float) -> float:
    """Modulus of the Jacobian determinant of the backward map."""
    n = len(k)
    if n == 0:
        return 1.0
    w = a ** (2 * n)
    for node in range(n):
        w *= abs(float(nodes.omegas[node] @ (nodes.velocities[node] - trace.parent_velocity[node])))
    return w


@dataclass(frozen=True)
class ForwardResult:
    """Outcome of a successful forward flow."""

    z1: PhasePoint
    times: tuple[float, ...]  # absorption time of particle m at index m-2
    omegas: np.ndarray
    velocities: np.ndarray

    def nodes(self) -> NodeVariables:
        return NodeVariables(self.times, self.omegas, self.velocities)


def entering_contact(xp, vp, xc, vc, a):
    """Duration until two free spheres reach distance ``a`` while approaching.

    Positions are taken at a common instant.  Overlapping or receding pairs
    have no future entering contact.
    """
    dx = xc - xp
    dv = vc - vp
    b = float(dx @ dv)
    if b >= 0.0:
        return None
    c = float(dx @ dx) - a * a
    if c < 0.0:
        return None
    vv = float(dv @ dv)
    disc = b * b - vv * c
    if disc < 0.0:
        return None
    return c / (-b + math.sqrt(disc))


def default_tolerance(t: float) -> float:
    return DELTA_SIM * max(t, 0.0)


def forward_flow(zeta0, k, signs, t: float, a: float, *, tol=None,
                 delta_graze: float = DELTA_GRAZE):
    """Run the absorption dynamics; return a :class:`ForwardResult` or ``None``.

    Only designated pairs interact: a parent and the next child in its
    forward queue, once that child has absorbed all of its own children.
    Every other pair is transparent.  A designated contact must happen
    strictly after the previous absorption of either partner (gap larger
    than ``tol``) and strictly before ``t``.
    """
    k = tuple(k)
    n = len(k)
    signs = check_signs(signs, n)
    zeta0 = [z if isinstance(z, PhasePoint) else PhasePoint.from_sequence(z) for z in zeta0]
    if len(zeta0) != n + 1:
        raise InvalidNodesError(f"need {n + 1} particles for a tree of order {n}")
    tol = default_tolerance(t) if tol is None else tol
    kids = trees.children(k)
    queue = {m: list(reversed(cs)) for m, cs in kids.items()}  # forward absorption order
    x = {m: zeta0[m - 1].x.copy() for m in range(1, n + 2)}
    v = {m: zeta0[m - 1].v.copy() for m in range(1, n + 2)}
    ref = {m: 0.0 for m in range(1, n + 2)}
    last = {m: None for m in range(1, n + 2)}  # time of last absorption performed by m
    times = [0.0] * n
    omegas = np.zeros((n, 3))
    velocities = np.zeros((n, 3))
    remaining = n
    while remaining:
        best = None
        for p in sorted(queue):
            if not queue[p]:
                continue
            c = queue[p][0]
            if queue[c]:
                continue
            start = max(last[p] or 0.0, last[c] or 0.0)
            xp = x[p] + v[p] * (start - ref[p])
            xc = x[c] + v[c] * (start - ref[c])
            s = entering_contact(xp, v[p], xc, v[c], a)
            if s is None:
                return None
            when = start + s
            if when <= (last[p] or 0.0) + tol or when <= (last[c] or 0.0) + tol:
                return None
            if abs(when - t) <= tol:
                raise PathologyError("boundary", "designated contact at the final time",
                                     time=when, pair=(p, c))
            if when > t:
                return None
            if best is None or when < best[0]:
                best = (when, p, c)
        if best is None:
            return None
        when, p, c = best
        xp = x[p] + v[p] * (when - ref[p])
        xc = x[c] + v[c] * (when - ref[c])
        dv = v[c] - v[p]
        normal = (xc - xp) / np.linalg.norm(xc - xp)
        if abs(float(normal @ dv)) < delta_graze * float(np.linalg.norm(dv)):
            raise PathologyError("grazing", "grazing designated contact", time=when, pair=(p, c))
        node = c - 2
        times[node] = when
        if signs[node] < 0:
            omegas[node] = normal
            velocities[node] = v[c]
            vp_new = v[p]
        else:
            omega = -normal  # from the child towards the parent
            vp_new, vc_new = elastic_reflect(v[p], v[c], omega)
            omegas[node] = omega
            velocities[node] = vc_new
        x[p], v[p], ref[p] = xp, vp_new, when
        last[p] = when
        queue[p].pop(0)
        del queue[c]
        remaining -= 1
    z1 = PhasePoint(x[1] + v[1] * (t - ref[1]), v[1])
    return ForwardResult(z1, tuple(times), omegas, velocities)


def same_parent_gaps(k, times) -> list[float]:
    """Gaps between consecutive absorption times of children sharing a parent."""
    gaps = []
    for cs in trees.children(k).values():
        ts = sorted(times[c - 2] for c in cs)
        gaps.extend(b - a for a, b in zip(ts, ts[1:]))
    return gaps


def membership(zeta0, k, signs, t: float, a: float, epsilon: float = 0.0, *, tol=None) -> bool:
    """True iff ``zeta0`` lies in A^epsilon for the tree ``(k, signs)`` at time ``t``."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    result = forward_flow(zeta0, k, signs, t, a, tol=tol)
    if result is None:
        return False
    return all(g > epsilon for g in same_parent_gaps(k, result.times))


def interacting_forward_flow(zeta0, r, signs, t: float, a: float, *, tol=None,
                             delta_graze: float = DELTA_GRAZE):
    """Forward flow on a fully ordered tree with genuine collisions among alive particles.

    Particle ``i + 1`` (creation order) is absorbed by ``r_i``; absorptions
    happen in decreasing label order.  Contacts between alive particles that
    are not the designated pair are elastic collisions.  Returns the state
    of particle 1 at ``t`` or ``None``.
    """
    r = tuple(r)
    n = len(r)
    signs = check_signs(signs, n)
    zeta0 = [z if isinstance(z, PhasePoint) else PhasePoint.from_sequence(z) for z in zeta0]
    if len(zeta0) != n + 1:
        raise InvalidNodesError(f"need {n + 1} particles for a tree of order {n}")
    tol = default_tolerance(t) if tol is None else tol
    x = {m: zeta0[m - 1].x.copy() for m in range(1, n + 2)}
    v = {m: zeta0[m - 1].v.copy() for m in range(1, n + 2)}
    now = 0.0
    alive = list(range(1, n + 2))
    last_event = -math.inf
    while True:
        target = alive[-1] if len(alive) > 1 else None
        designated = (r[target - 2], target) if target else None
        best = None
        for idx, i in enumerate(alive):
            for j in alive[idx + 1:]:
                s = entering_contact(x[i], v[i], x[j], v[j], a)
                if s is None:
                    continue
                if best is None or s < best[0]:
                    best = (s, i, j)
        if best is None or now + best[0] > t + tol:
            if designated is not None:
                return None
            break
        s, i, j = best
        when = now + s
        if abs(when - t) <= tol:
            raise PathologyError("boundary", "contact at the final time", time=when, pair=(i, j))
        if when - last_event <= tol:
            raise PathologyError("simultaneous", "coincident contacts in the interacting flow",
                                 time=when, pair=(i, j))
        for m in alive:
            x[m] = x[m] + v[m] * s
        now = when
        last_event = when
        dv = v[j] - v[i]
        normal = (x[j] - x[i]) / np.linalg.norm(x[j] - x[i])
        if abs(float(normal @ dv)) < delta_graze * float(np.linalg.norm(dv)):
            raise PathologyError("grazing", "grazing contact", time=when, pair=(i, j))
        if designated == (i, j) or designated == (j, i):
            p, c = designated
            if signs[c - 2] > 0:
                toward_parent = normal if p == j else -normal
                v[p], _ = elastic_reflect(v[p], v[c], toward_parent)
            alive.remove(c)
        else:
            v[i], v[j] = elastic_reflect(v[i], v[j], normal)
    return PhasePoint(x[1] + v[1] * (t - now), v[1])
