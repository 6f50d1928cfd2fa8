"""Static figures written next to CLI reports (Agg backend, PNG)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: Path) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return str(path)


def plot_trajectory(cfg, traj, path: Path) -> str:
    """x-y projection of every centre path, collisions marked."""
    times = [0.0] + [e.time for e in traj.events] + [traj.horizon]
    states = [cfg] + [traj.state_at(s) for s in times[1:]]
    pos = np.array([s.positions() for s in states])  # (time, particle, 3)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    for i in range(cfg.n):
        ax.plot(pos[:, i, 0], pos[:, i, 1], "-", lw=1.2, label=f"{i + 1}")
        ax.plot(pos[0, i, 0], pos[0, i, 1], "o", ms=4, color=ax.lines[-1].get_color())
    for k, e in enumerate(traj.events, start=1):
        for p in e.pair:
            ax.plot(pos[k, p - 1, 0], pos[k, p - 1, 1], "kx", ms=6)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"{cfg.n} spheres, {traj.collision_count} collisions")
    ax.legend(fontsize=7, loc="best")
    return _save(fig, path)


def plot_series(report, path: Path) -> str:
    """Per-order totals and the number of non-vanishing terms."""
    n = np.arange(len(report.totals_by_n))
    counts = np.zeros(len(n))
    for r in report.terms:
        if r.value != 0.0:
            counts[r.n] += 1
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.bar(n, report.totals_by_n, color="tab:blue")
    ax1.axhline(0.0, color="k", lw=0.6)
    ax1.set_xlabel("order n")
    ax1.set_ylabel("sum of terms")
    ax1.set_title(f"total {report.total:.6g}")
    ax2.bar(n, counts, color="tab:gray")
    ax2.set_xlabel("order n")
    ax2.set_ylabel("non-vanishing terms")
    return _save(fig, path)


def plot_intervals(reports: list[dict], path: Path) -> str:
    """Absolute discrepancy on each partition interval, per test function."""
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for i, rep in enumerate(reports):
        ivs = rep["details"]["intervals"]
        mids = [0.5 * (iv["start"] + iv["end"]) for iv in ivs]
        errs = [max(abs(iv["discrepancy"]), 1e-18) for iv in ivs]
        ax.semilogy(mids, errs, "o-", label=f"phi {i}")
    ax.axhline(1e-9, color="r", ls="--", lw=0.8, label="1e-9")
    ax.set_xlabel("interval midpoint")
    ax.set_ylabel("|series - simulator|")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_tree_counts(rows: list[dict], path: Path) -> str:
    n = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.semilogy(n, [r["full"] for r in rows], "o-", label="fully ordered (n!)")
    ax.semilogy(n, [r["partial"] for r in rows], "s-", label="partially ordered")
    ax.semilogy(n, [r["bound"] for r in rows], "k--", label="4^n")
    ax.set_xlabel("n")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_mc(estimates: list[dict], path: Path) -> str:
    """Per-order term mass with 1-sigma bars against the geometric bound."""
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for i, entry in enumerate(estimates):
        rows = entry["estimate"]["per_n"]
        n = np.array([r["n"] for r in rows])
        mass = np.array([r["mass"] for r in rows])
        err = np.array([r["mass_stderr"] for r in rows])
        keep = mass > 0
        ax.errorbar(n[keep] + 0.05 * i, mass[keep], yerr=err[keep], fmt="o", capsize=3,
                    label=f"mass, phi {i}")
        if i == 0:
            ax.semilogy(n, [r["bound"] for r in rows], "k--", label="bound")
    ax.set_yscale("log")
    ax.set_xlabel("order n")
    ax.set_ylabel("term mass")
    ax.legend(fontsize=8)
    return _save(fig, path)
