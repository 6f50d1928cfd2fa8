"""Exact evaluation of the regularised weak series for atomic initial measures.

For an atomic measure every integral in the series is a finite sum over
ordered tuples of atoms.  Instead of enumerating ``N**(n+1)`` tuples for each
tree and sign sequence, the sum is organised by subtrees: the forward flow of
a particle depends only on the atoms in its own subtree, and a subtree hands
to its parent nothing but the free line the subtree root follows after its
last absorption.  :class:`Expansion` builds, order by order, every weighted
"outcome" (atom, last absorption time, state, provenance) with all
designated contacts realised; the root outcomes are exactly the non-vanishing
terms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import trees
from .dynamics import DELTA_GRAZE, DELTA_SIM, HardSphereConfig, advance
from .errors import (
    CapExceededError,
    InvalidArgumentError,
    PathologyError,
    RefinementError,
)
from .flows import check_signs, forward_flow, interacting_forward_flow, same_parent_gaps
from .kernel import PhasePoint
from .testfunctions import TestFunction

MERGE_TOL = 1e-9
WEIGHT_TOL = 1e-12
PASS_TOL = 1e-9
MAX_REFINEMENTS = 60
ORDER_CAP = 64


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Atomic measure sum_i w_i delta(z - z_i); uniform weights 1/N by default."""

    atoms: tuple[PhasePoint, ...]
    a: float
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise InvalidArgumentError("an empirical measure needs at least one atom")
        if self.weights is None:
            object.__setattr__(self, "weights", (1.0 / len(self.atoms),) * len(self.atoms))
        else:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            if len(self.weights) != len(self.atoms):
                raise InvalidArgumentError("one weight per atom required")

    @property
    def n(self) -> int:
        return len(self.atoms)

    @classmethod
    def from_config(cls, config: HardSphereConfig) -> EmpiricalMeasure:
        return cls(config.particles, config.a)

    def integrate(self, phi) -> float:
        xs = np.array([p.x for p in self.atoms])
        vs = np.array([p.v for p in self.atoms])
        vals = np.asarray(phi(xs, vs), dtype=float)
        return float(math.fsum(w * f for w, f in zip(self.weights, vals)))

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "atoms": [p.to_dict() for p in self.atoms],
            "weights": list(self.weights),
        }


@dataclass(frozen=True)
class TermRecord:
    n: int
    k: tuple[int, ...]
    sigma: tuple[int, ...]
    atoms: tuple[int, ...]  # atom index of particle 1..n+1
    weight: float  # (lambda/a^2)^n prod(sigma) prod(atom weights)
    final: PhasePoint  # state of particle 1 at the final time
    value: float = 0.0

    def sort_key(self):
        return (self.n, self.k, self.sigma, self.atoms)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": list(self.k),
            "sigma": list(self.sigma),
            "atoms": list(self.atoms),
            "weight": self.weight,
            "value": self.value,
            "final": self.final.to_dict(),
        }


@dataclass
class SeriesReport:
    t: float
    lam: float
    epsilon: float
    n_max: int
    terms: list[TermRecord]
    totals_by_n: list[float]
    total: float
    highest_order: int
    first_zero_order: int | None
    truncated: bool
    pathologies: list[dict] = field(default_factory=list)
    reference: float | None = None
    discrepancy: float | None = None
    passed: bool | None = None
    test_function: dict | None = None
    notes: list[str] = field(default_factory=list)

    def check(self, reference: float, tol: float = PASS_TOL) -> SeriesReport:
        self.reference = float(reference)
        self.discrepancy = self.total - self.reference
        self.passed = abs(self.discrepancy) <= tol * (1.0 + abs(self.reference)) and not self.pathologies
        return self

    def to_dict(self, include_terms: bool = True) -> dict:
        out = {
            "t": self.t,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "n_max": self.n_max,
            "totals_by_n": self.totals_by_n,
            "total": self.total,
            "highest_order": self.highest_order,
            "first_zero_order": self.first_zero_order,
            "truncated": self.truncated,
            "pathologies": self.pathologies,
            "reference": self.reference,
            "discrepancy": self.discrepancy,
            "passed": self.passed,
            "test_function": self.test_function,
            "term_count": len(self.terms),
            "notes": self.notes,
        }
        if include_terms:
            out["terms"] = [r.to_dict() for r in self.terms]
        return out

    def csv_rows(self) -> list[dict]:
        rows = []
        for r in self.terms:
            if r.value == 0.0:
                continue
            rows.append({
                "n": r.n,
                "k": " ".join(map(str, r.k)),
                "sigma": " ".join("+" if s > 0 else "-" for s in r.sigma),
                "atoms": " ".join(str(i + 1) for i in r.atoms),
                "weight": repr(r.weight),
                "value": repr(r.value),
            })
        return rows


def _labelled(prov):
    """Convert a nested provenance into (k, sigma, atoms) in K-offset labelling.

    ``prov = (atom, ((sign, child_prov), ...))`` with children in forward
    absorption order; creation order is the reverse.
    """
    k: list[int] = []
    sigma: list[int] = []
    atoms: list[int] = []
    queue = [(prov, None)]
    head = 0
    while head < len(queue):
        (atom, kids), sign = queue[head]
        head += 1
        atoms.append(atom)
        if sign is not None:
            sigma.append(sign)
        created = list(reversed(kids))
        k.append(len(created))
        queue.extend((child, s) for s, child in created)
    n = len(atoms) - 1
    return tuple(k[:n]), tuple(sigma), tuple(atoms)


class _Outcomes:
    """Column store of subtree outcomes of one order."""

    def __init__(self):
        self.atom: list[int] = []
        self.d: list[float] = []
        self.x: list[np.ndarray] = []
        self.v: list[np.ndarray] = []
        self.w: list[float] = []
        self.has: list[bool] = []
        self.prov: list = []

    def add(self, atom, d, x, v, w, has, prov):
        self.atom.append(atom)
        self.d.append(d)
        self.x.append(x)
        self.v.append(v)
        self.w.append(w)
        self.has.append(has)
        self.prov.append(prov)

    def __len__(self):
        return len(self.atom)

    def freeze(self):
        self.D = np.array(self.d, dtype=float)
        self.X = np.array(self.x, dtype=float).reshape(-1, 3)
        self.V = np.array(self.v, dtype=float).reshape(-1, 3)
        self.W = np.array(self.w, dtype=float)
        self.HAS = np.array(self.has, dtype=bool)
        return self


class Expansion:
    """All non-vanishing terms of the series for an atomic measure up to ``n_max``.

    Order m combines a parent of order p with a child of order m - 1 - p, so
    empty orders K..2K (K >= 1) certify that every higher order is empty too.
    With ``n_max=None`` orders are added until such a certificate appears or
    ``ORDER_CAP`` is reached.
    """

    def __init__(self, mu0: EmpiricalMeasure, t: float, n_max: int | None = None, lam: float | None = None,
                 epsilon: float = 0.0, *, tol: float | None = None,
                 delta_graze: float = DELTA_GRAZE, max_outcomes: int = 2_000_000):
        if t < 0:
            raise InvalidArgumentError("time must be non-negative")
        if n_max is not None and n_max < 0:
            raise InvalidArgumentError("n_max must be non-negative")
        if epsilon < 0:
            raise InvalidArgumentError("epsilon must be non-negative")
        self.mu0 = mu0
        self.t = float(t)
        self.adaptive = n_max is None
        self.n_max = ORDER_CAP if n_max is None else int(n_max)
        self.a = float(mu0.a)
        self.lam = float(mu0.n * self.a ** 2 if lam is None else lam)
        self.rate = self.lam / self.a ** 2
        self.epsilon = float(epsilon)
        self.tol = DELTA_SIM * self.t if tol is None else float(tol)
        self.delta_graze = delta_graze
        self.max_outcomes = max_outcomes
        self.pathologies: list[dict] = []
        self.orders: list[_Outcomes] = []
        self._build()

    def _build(self):
        base = _Outcomes()
        for i, (p, w) in enumerate(zip(self.mu0.atoms, self.mu0.weights)):
            base.add(i, 0.0, p.x.copy(), p.v.copy(), w, False, (i, ()))
        self.orders.append(base.freeze())
        total = len(base)
        for m in range(1, self.n_max + 1):
            out = _Outcomes()
            for mp in range(m):
                mc = m - 1 - mp
                parents, kids = self.orders[mp], self.orders[mc]
                if len(parents) == 0 or len(kids) == 0:
                    continue
                for j in range(len(parents)):
                    self._extend(parents, j, kids, out)
            self.orders.append(out.freeze())
            total += len(out)
            if total > self.max_outcomes:
                raise CapExceededError(f"more than {self.max_outcomes} subtree outcomes; lower n_max")
            if self.adaptive and self.terminated():
                break
        self.n_max = len(self.orders) - 1

    def _extend(self, parents: _Outcomes, j: int, kids: _Outcomes, out: _Outcomes):
        a, t, tol = self.a, self.t, self.tol
        pd, px, pv = parents.D[j], parents.X[j], parents.V[j]
        p_has = parents.HAS[j]
        start = np.maximum(pd, kids.D)
        xp = px + pv * (start - pd)[:, None]
        xc = kids.X + kids.V * (start - kids.D)[:, None]
        dx = xc - xp
        dv = kids.V - pv
        b = np.einsum("ij,ij->i", dx, dv)
        c = np.einsum("ij,ij->i", dx, dx) - a * a
        vv = np.einsum("ij,ij->i", dv, dv)
        disc = b * b - vv * c
        ok = (b < 0.0) & (c >= 0.0) & (disc >= 0.0)
        if not ok.any():
            return
        idx = np.nonzero(ok)[0]
        s = c[idx] / (-b[idx] + np.sqrt(disc[idx]))
        when = start[idx] + s
        gap_p = max(self.epsilon, tol) if p_has else tol
        lower = np.maximum(pd + gap_p, np.where(kids.HAS[idx], kids.D[idx], 0.0) + tol)
        after = when > lower
        boundary = after & (np.abs(when - t) <= tol)
        inside = after & (when < t - tol)
        for q in np.nonzero(boundary)[0]:
            self._pathology("boundary", parents, j, kids, idx[q], when[q])
        if not inside.any():
            return
        sel = idx[inside]
        s_in = s[inside]
        w_in = when[inside]
        xp_c = xp[sel] + pv * s_in[:, None]
        xc_c = xc[sel] + kids.V[sel] * s_in[:, None]
        normal = xc_c - xp_c
        normal /= np.linalg.norm(normal, axis=1)[:, None]
        dv_in = dv[sel]
        normal_speed = np.abs(np.einsum("ij,ij->i", normal, dv_in))
        grazing = normal_speed < self.delta_graze * np.linalg.norm(dv_in, axis=1)
        wp = parents.W[j]
        prov_p = parents.prov[j]
        atom_p = parents.atom[j]
        for q in range(len(sel)):
            cidx = sel[q]
            if grazing[q]:
                self._pathology("grazing", parents, j, kids, cidx, w_in[q])
                continue
            omega = -normal[q]  # child towards parent
            exchange = omega * float(omega @ (pv - kids.V[cidx]))
            child = kids.prov[cidx]
            base_w = wp * self.rate * kids.W[cidx]
            # sigma = -1: parent keeps its line
            out.add(atom_p, w_in[q], xp_c[q], pv, -base_w, True,
                    (prov_p[0], prov_p[1] + ((-1, child),)))
            out.add(atom_p, w_in[q], xp_c[q], pv - exchange, base_w, True,
                    (prov_p[0], prov_p[1] + ((1, child),)))

    def _pathology(self, kind, parents, j, kids, cidx, when):
        self.pathologies.append({
            "kind": kind,
            "time": float(when),
            "parent": _labelled(parents.prov[j]),
            "child": _labelled(kids.prov[cidx]),
        })

    # -- results -------------------------------------------------------------
    def outcome_counts(self) -> list[int]:
        return [len(o) for o in self.orders]

    def highest_order(self) -> int:
        nonzero = [m for m, o in enumerate(self.orders) if len(o)]
        return max(nonzero)

    def first_zero_order(self):
        for m, o in enumerate(self.orders):
            if len(o) == 0:
                return m
        return None

    def terminated(self) -> bool:
        """True when orders K..2K are all empty for some K >= 1."""
        m = len(self.orders) - 1
        run = 0
        while run < m and len(self.orders[m - run]) == 0:
            run += 1
        return run > 0 and m >= 2 * (m - run + 1)

    def truncated(self) -> bool:
        return not self.terminated()

    def final_states(self):
        """Final states at ``t`` and weights of all terms, in canonical order."""
        records = []
        for m, o in enumerate(self.orders):
            for q in range(len(o)):
                k, sigma, atoms = _labelled(o.prov[q])
                x = o.X[q] + o.V[q] * (self.t - o.D[q])
                records.append(TermRecord(m, k, sigma, atoms, float(o.W[q]), PhasePoint(x, o.V[q])))
        records.sort(key=TermRecord.sort_key)
        return records

    def report(self, phi: TestFunction) -> SeriesReport:
        records = self.final_states()
        if records:
            xs = np.array([r.final.x for r in records])
            vs = np.array([r.final.v for r in records])
            vals = np.asarray(phi(xs, vs), dtype=float) * np.array([r.weight for r in records])
        else:
            vals = np.zeros(0)
        terms = [
            TermRecord(r.n, r.k, r.sigma, r.atoms, r.weight, r.final, float(val))
            for r, val in zip(records, vals)
        ]
        totals = [0.0] * (self.n_max + 1)
        total = 0.0
        for r in terms:  # fixed lexicographic order keeps sums bit-reproducible
            totals[r.n] += r.value
            total += r.value
        notes = []
        if self.truncated():
            notes.append(f"truncation: orders up to n_max={self.n_max} do not certify termination")
        return SeriesReport(
            t=self.t, lam=self.lam, epsilon=self.epsilon, n_max=self.n_max, terms=terms,
            totals_by_n=totals, total=total, highest_order=self.highest_order(),
            first_zero_order=self.first_zero_order(), truncated=self.truncated(),
            pathologies=list(self.pathologies),
            test_function=phi.to_dict() if hasattr(phi, "to_dict") else None, notes=notes,
        )

    def pushforward(self, merge_tol: float = MERGE_TOL) -> EmpiricalMeasure:
        """The signed atomic measure at ``t`` defined by the series.

        Final states closer than ``merge_tol`` (relative) are merged and atoms
        whose weights cancel are dropped.
        """
        records = self.final_states()
        pts = np.array([[*r.final.x, *r.final.v] for r in records]).reshape(-1, 6)
        ws = np.array([r.weight for r in records])
        scale = 1.0 + np.max(np.abs(pts)) if len(pts) else 1.0
        used = np.zeros(len(pts), dtype=bool)
        atoms, weights = [], []
        for i in range(len(pts)):
            if used[i]:
                continue
            close = (~used) & (np.max(np.abs(pts - pts[i]), axis=1) <= merge_tol * scale)
            used |= close
            w = math.fsum(ws[close])
            if abs(w) > WEIGHT_TOL:
                atoms.append(PhasePoint.from_sequence(pts[i]))
                weights.append(w)
        if not atoms:
            raise InvalidArgumentError("series measure vanished identically")
        return EmpiricalMeasure(tuple(atoms), self.a, tuple(weights))


def evaluate(mu0: EmpiricalMeasure, t: float, phi: TestFunction, n_max: int | None = None,
             lam: float | None = None, epsilon: float = 0.0) -> SeriesReport:
    """Sum every non-vanishing term of the series up to order ``n_max``."""
    return Expansion(mu0, t, n_max, lam, epsilon).report(phi)


def term_value(mu0: EmpiricalMeasure, k, signs, t: float, phi: TestFunction,
               lam: float | None = None, epsilon: float = 0.0) -> float:
    """One (tree, sign) term by brute force over all ordered tuples of atoms.

    Independent of :class:`Expansion`: every tuple is pushed through
    :func:`enskog_series.flows.forward_flow`.
    """
    k = tuple(k)
    n = len(k)
    signs = check_signs(signs, n)
    lam = mu0.n * mu0.a ** 2 if lam is None else lam
    factor = (lam / mu0.a ** 2) ** n * math.prod(signs)
    acc = []
    for combo in itertools.product(range(mu0.n), repeat=n + 1):
        zeta = [mu0.atoms[i] for i in combo]
        try:
            res = forward_flow(zeta, k, signs, t, mu0.a)
        except PathologyError as exc:
            exc.context = {"tuple": [i + 1 for i in combo], "k": list(k), "sigma": list(signs)}
            raise
        if res is None:
            continue
        if epsilon > 0 and not all(g > epsilon for g in same_parent_gaps(k, res.times)):
            continue
        w = math.prod(mu0.weights[i] for i in combo)
        acc.append(factor * w * phi.at(res.z1))
    return math.fsum(acc)


# -- Checks against the simulator---------------------------------------------------

def _reference(config: HardSphereConfig, phi) -> float:
    return EmpiricalMeasure.from_config(config).integrate(phi)


def _free_subflow(config: HardSphereConfig, drop: int, duration: float) -> bool:
    keep = [i for i in range(config.n) if i != drop]
    if len(keep) < 2:
        return True
    _, traj = advance(config.subset(keep), duration)
    return traj.collision_count == 0


def partition_times(z0: HardSphereConfig, t: float, *, max_refinements: int = MAX_REFINEMENTS):
    """Times 0 = theta_0 < ... < theta_S = t isolating each collision.

    Each open interval holds at most one collision, no collision sits on a
    partition point, and in a colliding interval removing either partner
    leaves a collision-free flow of the remaining spheres.
    """
    _, traj = advance(z0, t)
    taus = [e.time for e in traj.events]
    tol = DELTA_SIM * t
    if taus and abs(taus[-1] - t) <= tol:
        raise PathologyError("boundary", "collision at the final time", time=taus[-1])
    if not taus:
        return [0.0, t]
    cuts = [0.0] + [0.5 * (u + w) for u, w in zip(taus, taus[1:])] + [t]
    thetas = [0.0]
    for idx, (lo, hi) in enumerate(zip(cuts, cuts[1:])):
        tau = taus[idx]
        pair = traj.events[idx].pair
        left, right = lo, hi
        for _ in range(max_refinements):
            state = traj.state_at(left)
            if all(_free_subflow(state, p - 1, right - left) for p in pair):
                break
            h = 0.5 * min(tau - left, right - tau)
            left, right = tau - h, tau + h
        else:
            raise RefinementError(f"could not isolate collision {pair} at {tau}")
        if left > lo:
            thetas.append(left)
        thetas.append(right)
    thetas[-1] = t
    return thetas


@dataclass
class VerificationReport:
    name: str
    passed: bool
    reference: float
    total: float
    discrepancy: float
    details: dict = field(default_factory=dict)
    pathologies: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "reference": self.reference,
            "total": self.total,
            "discrepancy": self.discrepancy,
            "details": self.details,
            "pathologies": self.pathologies,
            "notes": self.notes,
        }


def _close(x: float, ref: float, tol: float = PASS_TOL) -> bool:
    return abs(x - ref) <= tol * (1.0 + abs(ref))


def verify_microscopic(z0: HardSphereConfig, t: float, phi: TestFunction, *,
                       lam: float | None = None, n_max: int | None = None,
                       cross_check: bool = False) -> VerificationReport:
    """Check that the empirical measure of ``z0`` solves the series on [0, t].

    The series is evaluated interval by interval on a collision-isolating
    partition; the atoms at each partition point come from the simulator.
    """
    lam = z0.n * z0.a ** 2 if lam is None else lam
    _, traj = advance(z0, t)
    reference = _reference(traj.final, phi)
    thetas = partition_times(z0, t)
    intervals = []
    pathologies: list[dict] = []
    total = None
    interval_ok = True
    notes = []
    for lo, hi in zip(thetas, thetas[1:]):
        start = traj.state_at(lo)
        end = traj.state_at(hi)
        _, sub = advance(start, hi - lo)
        rep = evaluate(EmpiricalMeasure.from_config(start), hi - lo, phi, n_max, lam)
        ref = _reference(end, phi)
        rep.check(ref)
        interval_ok &= bool(rep.passed) and not rep.truncated
        pathologies.extend(rep.pathologies)
        if rep.truncated:
            notes.extend(rep.notes)
        intervals.append({
            "start": lo, "end": hi, "collisions": sub.collision_count,
            "total": rep.total, "reference": ref, "discrepancy": rep.discrepancy,
            "totals_by_n": rep.totals_by_n, "highest_order": rep.highest_order,
            "first_zero_order": rep.first_zero_order,
        })
        total = rep.total
    discrepancy = total - reference
    passed = _close(total, reference) and interval_ok and not pathologies
    details = {"partition": thetas, "intervals": intervals, "lambda": lam,
               "collisions": traj.collision_count}
    if cross_check:
        direct = evaluate(EmpiricalMeasure.from_config(z0), t, phi,
                          n_max, lam)
        details["direct_total"] = direct.total
        details["direct_discrepancy"] = direct.total - reference
        passed = passed and _close(direct.total, reference)
    return VerificationReport("microscopic", passed, reference, total, discrepancy, details,
                              pathologies, notes)


def verify_semigroup(z0: HardSphereConfig, tau: float, t: float, phi: TestFunction, *,
                     lam: float | None = None, n_max: int | None = None) -> VerificationReport:
    """Three-way comparison on [0, t]: direct series, series composed at ``tau``, simulator.

    The composed route feeds the signed measure produced by the series on
    [0, tau] into the series on [tau, t]; it never consults the simulator.
    """
    if not 0.0 < tau < t:
        raise InvalidArgumentError("need 0 < tau < t")
    lam = z0.n * z0.a ** 2 if lam is None else lam
    _, traj = advance(z0, t)
    for e in traj.events:
        if abs(e.time - tau) <= DELTA_SIM * t:
            raise PathologyError("boundary", "collision at the composition time", time=e.time)
    reference = _reference(traj.final, phi)
    mu0 = EmpiricalMeasure.from_config(z0)
    direct = Expansion(mu0, t, n_max, lam)
    direct_rep = direct.report(phi)
    stage1 = Expansion(mu0, tau, n_max, lam)
    mid = stage1.pushforward()
    stage2 = Expansion(mid, t - tau, n_max, lam)
    composed_rep = stage2.report(phi)
    pathologies = direct.pathologies + stage1.pathologies + stage2.pathologies
    truncated = direct_rep.truncated or stage1.truncated() or composed_rep.truncated
    passed = (_close(direct_rep.total, reference) and _close(composed_rep.total, reference)
              and _close(direct_rep.total, composed_rep.total) and not pathologies
              and not truncated)
    details = {
        "tau": tau,
        "direct_total": direct_rep.total,
        "composed_total": composed_rep.total,
        "direct_totals_by_n": direct_rep.totals_by_n,
        "stage1_totals_by_n": stage1.report(phi).totals_by_n,
        "stage2_totals_by_n": composed_rep.totals_by_n,
        "intermediate_atoms": mid.n,
        "intermediate_weights": list(mid.weights),
        "truncated": truncated,
    }
    discrepancy = max(abs(direct_rep.total - reference), abs(composed_rep.total - reference))
    notes = direct_rep.notes + composed_rep.notes
    return VerificationReport("semigroup", passed, reference, composed_rep.total, discrepancy,
                              details, pathologies, notes)


def be_tuple_term(mu0: EmpiricalMeasure, k, signs, atoms, t: float, phi: TestFunction,
                  lam: float | None = None) -> float:
    """Contribution of one ordered atom tuple to the (k, signs) term."""
    k = tuple(k)
    signs = check_signs(signs, len(k))
    lam = mu0.n * mu0.a ** 2 if lam is None else lam
    res = forward_flow([mu0.atoms[i] for i in atoms], k, signs, t, mu0.a)
    if res is None:
        return 0.0
    w = math.prod(mu0.weights[i] for i in atoms)
    return (lam / mu0.a ** 2) ** len(k) * math.prod(signs) * w * phi.at(res.z1)


def interacting_tuple_term(mu0: EmpiricalMeasure, r, signs, atoms, t: float, phi: TestFunction,
                           lam: float | None = None) -> float:
    """Contribution of one tuple of distinct atoms to the interacting (r, signs) term."""
    r = tuple(r)
    signs = check_signs(signs, len(r))
    if len(set(atoms)) != len(atoms):
        return 0.0  # repeated atoms overlap: outside the physical phase space
    lam = mu0.n * mu0.a ** 2 if lam is None else lam
    z1 = interacting_forward_flow([mu0.atoms[i] for i in atoms], r, signs, t, mu0.a)
    if z1 is None:
        return 0.0
    w = math.prod(mu0.weights[i] for i in atoms)
    return (lam / mu0.a ** 2) ** len(r) * math.prod(signs) * w * phi.at(z1)


def interacting_series(mu0: EmpiricalMeasure, t: float, phi: TestFunction,
                       lam: float | None = None):
    """Per-order totals of the representation built on the interacting forward flow.

    Only tuples of distinct atoms contribute, so orders stop at N - 1.
    """
    totals = []
    terms = []
    pathologies = []
    for n in range(mu0.n):
        acc = []
        for r in trees.enumerate_full(n):
            for signs in itertools.product((-1, 1), repeat=n):
                for atoms in itertools.permutations(range(mu0.n), n + 1):
                    try:
                        val = interacting_tuple_term(mu0, r, signs, atoms, t, phi, lam)
                    except PathologyError as exc:
                        d = exc.as_dict()
                        d["context"] = {"r": list(r), "sigma": list(signs), "atoms": list(atoms)}
                        pathologies.append(d)
                        continue
                    if val != 0.0:
                        acc.append(val)
                        terms.append({"n": n, "r": list(r), "sigma": list(signs),
                                      "atoms": list(atoms), "value": val})
        totals.append(math.fsum(acc))
    return totals, terms, pathologies


def compare_representations(z0: HardSphereConfig, t: float, phi: TestFunction, *,
                            n_max: int | None = None) -> VerificationReport:
    """Boltzmann-Enskog series with contractions versus the interacting-flow series."""
    if z0.n > 5:
        raise InvalidArgumentError("compare_representations is limited to N <= 5")
    mu0 = EmpiricalMeasure.from_config(z0)
    _, traj = advance(z0, t)
    reference = _reference(traj.final, phi)
    be = evaluate(mu0, t, phi, n_max)
    int_totals, int_terms, int_path = interacting_series(mu0, t, phi)
    int_total = math.fsum(int_totals)
    pathologies = be.pathologies + int_path
    passed = (_close(be.total, int_total) and _close(int_total, reference)
              and not be.truncated and not pathologies)
    details = {
        "be_total": be.total,
        "be_totals_by_n": be.totals_by_n,
        "be_truncated": be.truncated,
        "interacting_total": int_total,
        "interacting_totals_by_n": int_totals,
        "interacting_terms": int_terms,
        "difference": be.total - int_total,
    }
    notes = ["interacting representation assumes phi has small support; tuples are pushed "
             "forward explicitly so the local inverse is never needed"]
    return VerificationReport("representations", passed, reference, int_total,
                              be.total - int_total, details, pathologies, notes)
