"""Matplotlib figure rendering for scan and verification reports.

Figures are written to files next to the delimited output; the CSV/JSON
contract does not depend on them.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def sweep_figure(rows: Sequence[Mapping[str, float]], path: str) -> None:
    """Four-panel trend figure: stability time, steps, width, confinement."""
    feas = [r for r in rows if r.get("feasible") and math.isfinite(r.get("t_bar", 0.0))
            and r.get("t_bar", 0.0) > 0.0]
    if not feas:
        return
    x = [r["log10_eps"] for r in feas]
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    axes[0, 0].semilogy(x, [r["t_bar_years"] for r in feas], "o-")
    axes[0, 0].set_ylabel(r"$\bar t$ (y)")
    axes[0, 1].plot(x, [r["m"] for r in feas], "s-")
    axes[0, 1].set_ylabel("best m")
    axes[1, 0].semilogy(x, [r.get("r_rel", float("nan")) for r in feas], "^-")
    axes[1, 0].set_ylabel(r"best $r/\Lambda_{\max}$")
    axes[1, 1].semilogy(x, [r["rf_over_lambda"] for r in feas], "v-")
    axes[1, 1].set_ylabel(r"$R_f(\bar t)/\Lambda_{\max}$")
    for ax in axes.flat:
        ax.set_xlabel(r"$\log_{10}\varepsilon$")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def verify_figure(traj, report, path: str, max_points: int = 4000) -> None:
    """Trajectory against the certified envelopes: action drift and eccentricity."""
    n = traj.times.size
    stride = max(1, n // max_points)
    t = traj.times[::stride]
    L = traj.L[::stride]
    e = traj.e[::stride]
    L_start = float(traj.L[0])
    e_start = float(traj.e[0])
    lf = [report.L_f_at(float(ti)) for ti in t]
    bands = [report.point_band_at(float(ti), L_start, e_start) for ti in t]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 7), sharex=True)
    ax1.plot(t, abs(L - L_start), lw=0.7, label=r"$|L(t)-L(0)|$")
    ax1.plot(t, lf, "r--", label=r"$L_f(t)$")
    ax1.set_yscale("log")
    ax1.set_ylabel("action drift")
    ax1.legend(loc="best")
    ax2.plot(t, e, lw=0.7, label=r"$e(t)$")
    ax2.plot(t, [b[0] for b in bands], "r--", lw=0.8, label="band")
    ax2.plot(t, [b[1] for b in bands], "r--", lw=0.8)
    ax2.set_ylabel("eccentricity")
    ax2.set_xlabel("t (internal units)")
    ax2.legend(loc="best")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def energy_figure(traj, path: str, max_points: int = 4000) -> None:
    n = traj.times.size
    stride = max(1, n // max_points)
    t = traj.times[::stride]
    e0 = traj.energy[0]
    drift = abs(traj.energy[::stride] - e0) / max(abs(e0), 1e-300)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.semilogy(t, drift + 1e-20, lw=0.7)
    ax.set_xlabel("t (internal units)")
    ax.set_ylabel("relative energy drift")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
