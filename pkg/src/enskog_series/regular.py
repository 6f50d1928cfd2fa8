"""Monte Carlo evaluation of the series for regular initial densities.

The weak form of the series is estimated order by order.  In the default
mode the (n+1)-tuple at time zero is drawn i.i.d. from ``f0 / |f0|`` and the
absorption dynamics is run for every tree and sign sequence on the whole
batch at once.  The node-variable mode samples creation times, impact
directions and partner velocities instead and pushes them through the
backward flow; it estimates the same quantities and serves as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special, stats

from . import trees
from .dynamics import DELTA_SIM
from .errors import (
    InvalidArgumentError,
    InvalidNodesError,
    ResolutionError,
    SamplerError,
)
from .flows import NodeVariables, backward_flow, check_signs, jacobian_weight
from .kernel import PhasePoint
from .testfunctions import TestFunction

DEFAULT_SAFETY = 0.5
DEFAULT_STREAMS = 8
DENSITY_KINDS = ("gaussian", "box-maxwellian")


@dataclass(frozen=True)
class DensitySpec:
    """Initial density f0 on R^6 given by a named family and its parameters.

    * ``gaussian``: ``mass * N(x; x_mean, diag(x_std^2)) * N(v; v_mean, diag(v_std^2))``.
    * ``box-maxwellian``: ``mass / |box| * 1_box(x) * N(v; v_mean, temperature * I)``
      with ``box = [lower, upper]``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DENSITY_KINDS:
            raise InvalidArgumentError(f"unknown density kind {self.kind!r}")
        p = dict(self.params)
        p.setdefault("mass", 1.0)
        p.setdefault("v_mean", [0.0, 0.0, 0.0])
        if self.kind == "gaussian":
            p.setdefault("x_mean", [0.0, 0.0, 0.0])
            p.setdefault("x_std", [1.0, 1.0, 1.0])
            p.setdefault("v_std", [1.0, 1.0, 1.0])
            vals = [*p["x_std"], *p["v_std"]]
        else:
            p.setdefault("lower", [0.0, 0.0, 0.0])
            p.setdefault("upper", [1.0, 1.0, 1.0])
            p.setdefault("temperature", 1.0)
            vals = [p["temperature"]] + [u - lo for lo, u in zip(p["lower"], p["upper"])]
        if p["mass"] <= 0 or min(vals) <= 0:
            raise InvalidArgumentError("density parameters must be positive")
        object.__setattr__(self, "params", p)

    @classmethod
    def preset(cls, name: str) -> DensitySpec:
        if name == "gaussian":
            return cls("gaussian", {"x_std": [1.0, 1.0, 1.0], "v_std": [1.5, 0.75, 0.75]})
        if name == "box-maxwellian":
            return cls("box-maxwellian", {"lower": [0.0, 0.0, 0.0], "upper": [2.0, 2.0, 2.0]})
        raise InvalidArgumentError(f"unknown density preset {name!r}")

    @property
    def norm(self) -> float:
        """L1 norm, exact for both families."""
        return float(self.params["mass"])

    def _v_std(self) -> np.ndarray:
        if self.kind == "gaussian":
            return np.asarray(self.params["v_std"], dtype=float)
        return np.full(3, math.sqrt(self.params["temperature"]))

    def velocity_density(self, v) -> np.ndarray:
        """Normalised velocity marginal."""
        v = np.asarray(v, dtype=float)
        mean = np.asarray(self.params["v_mean"], dtype=float)
        return np.prod(stats.norm.pdf(v, loc=mean, scale=self._v_std()), axis=-1)

    def sample_velocities(self, rng: np.random.Generator, shape) -> np.ndarray:
        mean = np.asarray(self.params["v_mean"], dtype=float)
        return mean + self._v_std() * rng.standard_normal((*shape, 3))

    def __call__(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "gaussian":
            rho = np.prod(stats.norm.pdf(x, loc=p["x_mean"], scale=p["x_std"]), axis=-1)
        else:
            lo, hi = np.asarray(p["lower"]), np.asarray(p["upper"])
            inside = np.all((x >= lo) & (x <= hi), axis=-1)
            rho = inside / float(np.prod(hi - lo))
        return p["mass"] * rho * self.velocity_density(v)

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Draws from ``f0 / |f0|`` with trailing axis (x, v)."""
        shape = tuple(np.atleast_1d(shape))
        p = self.params
        if self.kind == "gaussian":
            x = np.asarray(p["x_mean"]) + np.asarray(p["x_std"]) * rng.standard_normal((*shape, 3))
        else:
            lo, hi = np.asarray(p["lower"]), np.asarray(p["upper"])
            x = lo + (hi - lo) * rng.random((*shape, 3))
        v = self.sample_velocities(rng, shape)
        out = np.concatenate([x, v], axis=-1)
        if not np.all(np.isfinite(out)):
            raise SamplerError("sampler produced non-finite values")
        return out

    def marginal_cdfs(self):
        p = self.params
        cdfs = []
        if self.kind == "gaussian":
            for m, s in zip(p["x_mean"], p["x_std"]):
                cdfs.append(stats.norm(loc=m, scale=s).cdf)
        else:
            for lo, hi in zip(p["lower"], p["upper"]):
                cdfs.append(stats.uniform(loc=lo, scale=hi - lo).cdf)
        for m, s in zip(p["v_mean"], self._v_std()):
            cdfs.append(stats.norm(loc=m, scale=s).cdf)
        return cdfs

    def self_test(self, samples: int = 4000, seed: int = 0, alpha: float = 1e-3) -> dict:
        """Kolmogorov-Smirnov test of every marginal of the sampler."""
        draws = self.sample(np.random.default_rng(seed), samples)
        pvalues = [float(stats.kstest(draws[:, i], cdf).pvalue)
                   for i, cdf in enumerate(self.marginal_cdfs())]
        # Bonferroni over the six marginals
        passed = min(pvalues) > alpha / 6
        if not passed:
            raise SamplerError(f"sampler failed goodness of fit: p-values {pvalues}")
        return {"pvalues": pvalues, "passed": passed}

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_dict(cls, data: dict) -> DensitySpec:
        return cls(data["kind"], dict(data.get("params", {})))


def convergence_radius(a: float, norm_f0: float) -> float:
    """Largest rate for which the geometric bound on the series converges."""
    if a <= 0 or norm_f0 <= 0:
        raise InvalidArgumentError("a and the norm of f0 must be positive")
    return a * a / (8.0 * norm_f0)


def term_norm_bound(n: int, lam: float, a: float, norm_f0: float) -> float:
    """Bound (8 lambda / a^2)^n |f0|^(n+1) on the L1 mass of the order-n term."""
    if n < 0:
        raise InvalidArgumentError("n must be non-negative")
    return (8.0 * lam / (a * a)) ** n * norm_f0 ** (n + 1)


def batch_forward(Z: np.ndarray, k, signs, t: float, a: float, tol: float | None = None):
    """Vectorised absorption dynamics for a batch of (n+1)-tuples.

    ``Z`` has shape ``(S, n+1, 6)``.  Returns ``(ok, z1)`` with ``ok`` the
    membership mask and ``z1`` the final state of particle 1 (meaningful
    where ``ok``).  Same rules as :func:`enskog_series.flows.forward_flow`;
    boundary and grazing contacts have probability zero and are dropped.
    """
    k = tuple(k)
    n = len(k)
    signs = check_signs(signs, n)
    tol = DELTA_SIM * t if tol is None else tol
    S = Z.shape[0]
    x = Z[:, :, :3].copy()
    v = Z[:, :, 3:].copy()
    d = np.zeros((S, n + 1))
    ok = np.ones(S, dtype=bool)
    kids = trees.children(k)

    def absorb(p: int):
        nonlocal ok
        for c in reversed(kids.get(p, [])):
            absorb(c)
            pi, ci = p - 1, c - 1
            start = np.maximum(d[:, pi], d[:, ci])
            xp = x[:, pi] + v[:, pi] * (start - d[:, pi])[:, None]
            xc = x[:, ci] + v[:, ci] * (start - d[:, ci])[:, None]
            dx = xc - xp
            dv = v[:, ci] - v[:, pi]
            b = np.einsum("ij,ij->i", dx, dv)
            cc = np.einsum("ij,ij->i", dx, dx) - a * a
            vv = np.einsum("ij,ij->i", dv, dv)
            disc = b * b - vv * cc
            good = ok & (b < 0.0) & (cc >= 0.0) & (disc >= 0.0)
            s = np.zeros(S)
            s[good] = cc[good] / (-b[good] + np.sqrt(disc[good]))
            when = start + s
            good &= (when > d[:, pi] + tol) & (when > d[:, ci] + tol) & (when < t - tol)
            ok = good
            xp_new = xp + v[:, pi] * s[:, None]
            if signs[c - 2] > 0:
                omega = xp_new - (xc + v[:, ci] * s[:, None])
                omega /= np.where(good, np.linalg.norm(omega, axis=1), 1.0)[:, None]
                proj = np.einsum("ij,ij->i", omega, v[:, pi] - v[:, ci])
                v[:, pi] = np.where(good[:, None], v[:, pi] - omega * proj[:, None], v[:, pi])
            x[:, pi] = xp_new
            d[:, pi] = when

    absorb(1)
    z1 = np.concatenate([x[:, 0] + v[:, 0] * (t - d[:, 0])[:, None], v[:, 0]], axis=1)
    return ok, z1


def tree_sign_pairs(n: int):
    for k in trees.enumerate_partial(n):
        for signs in itertools.product((-1, 1), repeat=n):
            yield k, signs


def _order_samples_zeta(f0: DensitySpec, phi, t, lam, a, n, rng, size):
    """Per-sample (value, mass, gain, loss) for order n, tuple-space form."""
    Z = f0.sample(rng, (size, n + 1))
    scale = (lam / (a * a)) ** n * f0.norm ** (n + 1)
    value = np.zeros(size)
    mass = np.zeros(size)
    gain = np.zeros(size)
    loss = np.zeros(size)
    if n == 0:
        vals = phi(Z[:, 0, :3] + Z[:, 0, 3:] * t, Z[:, 0, 3:])
        return scale * vals, np.full(size, scale), scale * vals, np.zeros(size)
    if t <= 0.0 or lam == 0.0:
        return value, mass, gain, loss
    for k, signs in tree_sign_pairs(n):
        ok, z1 = batch_forward(Z, k, signs, t, a)
        if not ok.any():
            continue
        f = np.zeros(size)
        f[ok] = phi(z1[ok, :3], z1[ok, 3:])
        sign = math.prod(signs)
        value += sign * f
        mass += ok
        if sign > 0:
            gain += f
        else:
            loss += f
    return scale * value, scale * mass, scale * gain, scale * loss


def _unit_vectors(rng, shape):
    u = rng.standard_normal((*shape, 3))
    return u / np.linalg.norm(u, axis=-1, keepdims=True)


def _order_samples_nodes(f0: DensitySpec, phi, t, lam, a, n, rng, size):
    """Per-sample (value, mass, gain, loss) for order n, node-variable form."""
    y = f0.sample(rng, size)
    root = np.concatenate([y[:, :3] + y[:, 3:] * t, y[:, 3:]], axis=1)
    q_root = f0(y[:, :3], y[:, 3:]) / f0.norm
    value = np.zeros(size)
    mass = np.zeros(size)
    gain = np.zeros(size)
    loss = np.zeros(size)
    phi_root = phi(root[:, :3], root[:, 3:])
    if n == 0:
        scale = f0.norm
        return scale * phi_root, np.full(size, scale), scale * phi_root, np.zeros(size)
    if t <= 0.0 or lam == 0.0:
        return value, mass, gain, loss
    times = t * rng.random((size, n))
    omegas = _unit_vectors(rng, (size, n))
    vels = f0.sample_velocities(rng, (size, n))
    q_nodes = (1.0 / t) ** n * (1.0 / (4.0 * math.pi)) ** n * np.prod(f0.velocity_density(vels), axis=1)
    rate = (lam / (a * a)) ** n
    for s in range(size):
        nodes = NodeVariables(times[s], omegas[s], vels[s])
        z_root = PhasePoint.from_sequence(root[s])
        for k, signs in tree_sign_pairs(n):
            try:
                trace = backward_flow(z_root, k, signs, nodes, t, a)
            except InvalidNodesError:
                continue  # outside chi_k or the incoming hemisphere
            zeta = trace.tuple()
            dens = math.prod(float(f0(p.x, p.v)) for p in zeta)
            w = rate * jacobian_weight(k, signs, nodes, trace, a) * dens / (q_root[s] * q_nodes[s])
            sign = math.prod(signs)
            value[s] += sign * w * phi_root[s]
            mass[s] += w
            if sign > 0:
                gain[s] += w * phi_root[s]
            else:
                loss[s] += w * phi_root[s]
    return value, mass, gain, loss


@dataclass
class MCEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    per_n: list[dict]
    params: dict
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "per_n": self.per_n,
            "params": self.params,
            "warnings": self.warnings,
        }

    def csv_rows(self) -> list[dict]:
        keys = ("n", "value", "stderr", "mass", "mass_stderr", "gain", "loss", "bound")
        return [{key: row[key] for key in keys} for row in self.per_n]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if len(x) < 2:
        return float(np.mean(x)), float("inf")
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def weak_mc_estimate(f0: DensitySpec, phi: TestFunction, t: float, lam: float, a: float,
                     n_max: int = 4, samples: int = 20000, seed: int = 0, *,
                     mode: str = "zeta", streams: int = DEFAULT_STREAMS, threads: int = 1,
                     safety: float = DEFAULT_SAFETY, force: bool = False) -> MCEstimate:
    """Estimate the integral of phi against the series solution at time t.

    ``samples`` i.i.d. draws are used for every order; they are split into
    ``streams`` independently seeded streams (``threads`` only changes how
    they are scheduled, never the result).
    """
    if t < 0 or a <= 0 or lam < 0:
        raise InvalidArgumentError("need t >= 0, a > 0, lambda >= 0")
    if n_max < 0 or samples < 2 or streams < 1:
        raise InvalidArgumentError("need n_max >= 0, samples >= 2, streams >= 1")
    if mode not in ("zeta", "nodes"):
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    radius = convergence_radius(a, f0.norm)
    warnings = []
    if lam > safety * radius:
        msg = f"lambda={lam} exceeds {safety} x convergence radius {radius}"
        if not force:
            raise InvalidArgumentError(msg + " (pass force=True to run anyway)")
        warnings.append(msg + "; convergence not guaranteed")
    sampler = _order_samples_zeta if mode == "zeta" else _order_samples_nodes
    sizes = [samples // streams + (1 if i < samples % streams else 0) for i in range(streams)]
    seqs = np.random.SeedSequence(seed).spawn(streams)

    def run_stream(i):
        rng = np.random.default_rng(seqs[i])
        return [sampler(f0, phi, t, lam, a, n, rng, sizes[i]) for n in range(n_max + 1)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_stream, range(streams)))
    else:
        results = [run_stream(i) for i in range(streams)]
    per_n = []
    total = 0.0
    var = 0.0
    for n in range(n_max + 1):
        cols = [np.concatenate([results[i][n][j] for i in range(streams)]) for j in range(4)]
        val, se = _mean_se(cols[0])
        m, mse = _mean_se(cols[1])
        g, gse = _mean_se(cols[2])
        lo, lse = _mean_se(cols[3])
        per_n.append({
            "n": n, "value": val, "stderr": se, "mass": m, "mass_stderr": mse,
            "gain": g, "gain_stderr": gse, "loss": lo, "loss_stderr": lse,
            "bound": term_norm_bound(n, lam, a, f0.norm),
        })
        total += val
        var += se * se
    params = {"density": f0.to_dict(), "phi": phi.to_dict(), "t": t, "lambda": lam, "a": a,
              "n_max": n_max, "mode": mode, "streams": streams}
    return MCEstimate(total, math.sqrt(var), samples, seed, per_n, params, warnings)


def verify_geometric_decay(f0: DensitySpec, phi: TestFunction, t: float, lam: float, a: float,
                           n_max: int = 3, samples: int = 20000, seed: int = 0, **kwargs) -> dict:
    """Check every order's mass against the geometric bound."""
    est = weak_mc_estimate(f0, phi, t, lam, a, n_max, samples, seed, **kwargs)
    rows = []
    offending = []
    for row in est.per_n:
        rel = row["mass_stderr"] / row["mass"] if row["mass"] > 0 else 0.0
        ok = row["mass"] <= row["bound"] * (1.0 + 3.0 * rel)
        rows.append({"n": row["n"], "mass": row["mass"], "mass_stderr": row["mass_stderr"],
                     "bound": row["bound"], "passed": ok})
        if not ok:
            offending.append(row["n"])
    masses = [r["mass"] for r in rows]
    ratios = [b / m if m > 0 else 0.0 for m, b in zip(masses, masses[1:])]
    return {"passed": not offending, "offending": offending, "rows": rows, "ratios": ratios,
            "estimate": est.to_dict()}


# -- deterministic oracles ------------------------------------------------------

def quadrature_order0(f0: DensitySpec, phi: TestFunction, t: float, points: int = 10) -> float:
    """Tensor Gauss-Hermite quadrature of the free-transport term for the Gaussian family."""
    if f0.kind != "gaussian":
        raise InvalidArgumentError("quadrature oracle needs the gaussian family")
    p = f0.params
    nodes, weights = special.roots_hermitenorm(points)
    weights = weights / math.sqrt(2.0 * math.pi)
    mean = np.array([*p["x_mean"], *p["v_mean"]], dtype=float)
    std = np.array([*p["x_std"], *p["v_std"]], dtype=float)
    grids = np.meshgrid(*([nodes] * 6), indexing="ij")
    z = mean + std * np.stack([g.ravel() for g in grids], axis=1)
    w = np.ones(len(z))
    for wg in np.meshgrid(*([weights] * 6), indexing="ij"):
        w *= wg.ravel()
    vals = phi(z[:, :3] + z[:, 3:] * t, z[:, 3:])
    return float(p["mass"] * np.sum(w * vals))


def quadrature_order1_vx2(f0: DensitySpec, t: float, lam: float, a: float,
                          u_points: int = 16, s_points: int = 12, polar: int = 12,
                          azimuth: int = 16) -> float:
    """Order-one term for phi = v_x^2 and a Gaussian f0, by nested quadrature.

    Uses centre-of-mass and relative coordinates.  The pair integral over
    relative positions that meet within (0, t) is parameterised by the
    contact time s and contact direction n, with ``dr = a^2 |n.u| dn ds``.
    The position centre and the velocity centre are integrated in closed form.
    """
    if f0.kind != "gaussian":
        raise InvalidArgumentError("quadrature oracle needs the gaussian family")
    p = f0.params
    mass = p["mass"]
    sx = np.asarray(p["x_std"], dtype=float)
    sv = np.asarray(p["v_std"], dtype=float)
    mx = float(p["v_mean"][0])
    # u = v2 - v1 ~ N(0, 2 sv^2);  V = (v1 + v2)/2 ~ N(mean, sv^2/2) independent of u
    hn, hw = special.roots_hermitenorm(u_points)
    hw = hw / math.sqrt(2.0 * math.pi)
    ug = np.meshgrid(hn, hn, hn, indexing="ij")
    U = np.stack([g.ravel() for g in ug], axis=1) * (math.sqrt(2.0) * sv)
    WU = np.ones(len(U))
    for g in np.meshgrid(hw, hw, hw, indexing="ij"):
        WU *= g.ravel()
    sn, sw = special.roots_legendre(s_points)
    S = 0.5 * t * (sn + 1.0)
    WS = 0.5 * t * sw
    cn, cw = special.roots_legendre(polar)
    C = 0.5 * (cn + 1.0)  # cos of the angle between n and -u, in (0, 1)
    WC = 0.5 * cw
    PHI = 2.0 * math.pi * (np.arange(azimuth) + 0.5) / azimuth
    WPHI = np.full(azimuth, 2.0 * math.pi / azimuth)
    total = 0.0
    for i in range(len(U)):
        u = U[i]
        speed = float(np.linalg.norm(u))
        if speed == 0.0:
            continue
        e3 = -u / speed
        helper = np.array([1.0, 0.0, 0.0]) if abs(e3[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(e3, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(e3, e1)
        sin = np.sqrt(1.0 - C * C)
        nvec = (C[:, None, None] * e3
                + (sin[:, None] * np.cos(PHI))[:, :, None] * e1
                + (sin[:, None] * np.sin(PHI))[:, :, None] * e2)  # (polar, azimuth, 3)
        ndotu = -speed * C  # n.u < 0 on the whole grid
        # relative position at time zero: r = a n - u s; pair spatial density N(0, 2 sx^2)
        r = a * nvec[None] - u * S[:, None, None, None]
        rho = np.prod(stats.norm.pdf(r, scale=math.sqrt(2.0) * sx), axis=-1)
        # v1 = V - u/2; after the collision v1' = V - u/2 + n (n.u)
        w1 = -0.5 * u[0] + nvec[..., 0] * ndotu[:, None]
        gain = (mx + w1) ** 2 - (mx - 0.5 * u[0]) ** 2  # var(V_x) cancels
        integrand = rho * (np.abs(ndotu)[:, None] * gain)[None]
        val = np.einsum("s,spq,p,q->", WS, integrand, WC, WPHI)
        total += WU[i] * val
    return float(lam * mass * mass * total)


# -- H-functional ---------------------------------------------------------------

@dataclass(frozen=True)
class Grid6:
    """Cell-centred samples of a density on a box in R^6 (axes x, y, z, vx, vy, vz)."""

    values: np.ndarray
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 6:
            raise InvalidArgumentError("grid values must be a 6-dimensional array")
        if np.any(values < 0):
            raise InvalidArgumentError("density values must be non-negative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lower", tuple(float(s) for s in self.lower))
        object.__setattr__(self, "upper", tuple(float(s) for s in self.upper))

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / np.array(self.values.shape)

    def centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return self.lower[axis] + h * (np.arange(self.values.shape[axis]) + 0.5)

    @classmethod
    def from_density(cls, f0: DensitySpec, lower, upper, shape) -> Grid6:
        axes = [lo + (hi - lo) * (np.arange(m) + 0.5) / m for lo, hi, m in zip(lower, upper, shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        x = np.stack(mesh[:3], axis=-1)
        v = np.stack(mesh[3:], axis=-1)
        return cls(f0(x, v), tuple(lower), tuple(upper))


def h_functional(grid: Grid6, lam: float, a: float) -> dict:
    """Entropy plus hard-core pair term by midpoint quadrature; 0 ln 0 is 0."""
    h = grid.spacing
    if np.any(h[:3] > a / 2.0):
        raise ResolutionError(f"spatial spacing {h[:3].tolist()} is coarser than a/2 = {a / 2}")
    cell = float(np.prod(h))
    f = grid.values
    with np.errstate(divide="ignore", invalid="ignore"):
        flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    entropy = float(np.sum(flogf) * cell)
    rho = f.sum(axis=(3, 4, 5)) * float(np.prod(h[3:]))
    reach = [int(math.floor(a / h[i])) for i in range(3)]
    offs = [h[i] * np.arange(-reach[i], reach[i] + 1) for i in range(3)]
    ox, oy, oz = np.meshgrid(*offs, indexing="ij")
    ball = (ox ** 2 + oy ** 2 + oz ** 2 <= a * a).astype(float)
    conv = signal.fftconvolve(rho, ball, mode="same")
    dx = float(np.prod(h[:3]))
    pair = 0.5 * lam * float(np.sum(rho * conv)) * dx * dx
    return {"value": entropy + pair, "entropy": entropy, "pair": pair}


def cube_overlap_volume(side: float, a: float) -> float:
    """Measure of pairs (x, y) in a cube with |x - y| <= a, for a <= side."""
    if a > side:
        raise InvalidArgumentError("formula needs a <= side")
    L = side
    # integral over the ball |r| <= a of (L - |r_x|)(L - |r_y|)(L - |r_z|)
    return (L ** 3 * 4.0 * math.pi * a ** 3 / 3.0 - 3.0 * L * L * math.pi * a ** 4 / 2.0
            + 3.0 * L * 8.0 * a ** 5 / 15.0 - a ** 6 / 6.0)
