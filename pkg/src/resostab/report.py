"""Delimited and JSON report emission.

CSV columns follow the table layouts of the stability sweeps: perturbation
magnitude, iterative steps, stability time, confinement radius and
eccentricity envelopes for the result table; widths for the geometry table.
JSON reports round-trip bit-exactly (floats serialized via repr).
"""
from __future__ import annotations

import csv
import json
import math
from typing import Mapping, Sequence

TABLE1_COLUMNS = ("log10_eps", "m", "t_bar_years", "rf_over_lambda", "e1_bar", "e2_bar")
TABLE2_COLUMNS = ("log10_eps", "r_rel", "s", "abs_one_minus_beta", "xi")
TABLE4_COLUMNS = ("N", "m", "log10_eps", "t_bar_years", "lf_over_l0")
TRAJECTORY_COLUMNS = ("t", "L", "G", "l", "g", "e", "H", "rel_drift")


def write_csv(path: str, rows: Sequence[Mapping[str, object]],
              columns: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _fmt(value: object) -> object:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return value


def write_json(path: str, payload: object) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj: object):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return {k: v for k, v in vars(obj).items() if not k.startswith("_")}
    return repr(obj)


def planetary_report_payload(report, eps: float, seed: int | None = None) -> dict:
    inp = report.inp
    payload = {
        "kind": "planetary",
        "eps": eps,
        "log10_eps": math.log10(eps) if eps > 0 else None,
        "seed": seed,
        "resonance": {
            "p": inp.resonance.p_int, "q": inp.resonance.q_int,
            "Lambda0": list(inp.resonance.Lambda0),
            "omega": list(inp.resonance.omega),
            "T_years": inp.resonance.T,
        },
        "widths": {
            "rho": inp.widths.rho, "r": inp.widths.r, "s": inp.widths.s,
            "xi": inp.widths.xi, "u": inp.widths.u, "beta": inp.widths.beta,
        },
        "bounds": {
            "eta0": inp.bounds.eta0, "gamma0": inp.bounds.gamma0,
            "delta": inp.bounds.delta, "Xi0": inp.bounds.Xi0,
            "Gamma0": inp.bounds.Gamma0, "f0_norm": inp.bounds.f0_norm,
            "g0_norm": inp.bounds.g0_norm,
        },
        "schedule": {"m": inp.schedule.m, "p": inp.schedule.p,
                     "q1": inp.schedule.q1, "q2": inp.schedule.q2},
        "schedule_margins": dict(report.schedule_margins),
        "constants": {"c1": report.c1, "c2": report.c2,
                      "r_tilde": report.r_tilde,
                      "delta_aa": report.delta_aa, "delta_cart": report.delta_cart,
                      "delta_aa_inverse": report.delta_aa,
                      "delta_cart_inverse": report.delta_cart},
        "t_bar_years": report.t_bar,
        "rf_at_tbar": report.rf_at_tbar,
        "n_minus": report.n_minus,
        "e_bar_0": [report.e1_bar_0, report.e2_bar_0],
        "e_bar_at_tbar": [report.e1_bar_at_tbar, report.e2_bar_at_tbar],
        "conditions": {
            "c1_positive": report.flags.c1_positive,
            "c1_margin": report.flags.c1_margin,
            "cart_radius_ok": report.flags.cart_radius_ok,
            "cart_radius_margin": report.flags.cart_radius_margin,
            "momentum_reach_ok": report.flags.momentum_reach_ok,
            "momentum_reach_margin": report.flags.momentum_reach_margin,
            "momentum_reach_rf_ok": report.flags.momentum_reach_rf_ok,
            "momentum_reach_rf_margin": report.flags.momentum_reach_rf_margin,
        },
        "saturated": report.saturated,
    }
    return payload


def restricted_report_payload(report, preliminary_averaging: int,
                              seed: int | None = None) -> dict:
    st = report.setup
    return {
        "kind": "restricted",
        "eps": st.eps,
        "log10_eps": math.log10(st.eps) if st.eps > 0 else None,
        "seed": seed,
        "preliminary_averaging": preliminary_averaging,
        "resonance": {"p": st.p_int, "q": st.q_int, "L0": st.L0, "G0": st.G0,
                      "omega_l": st.omega_l, "omega_g": st.omega_g,
                      "T": st.T, "time_unit_years": st.time_unit_years},
        "widths": {"rho_L": st.widths.rho_L, "rho_G": st.widths.rho_G,
                   "r_L": st.widths.r_L, "r_G": st.widths.r_G,
                   "s_l": st.widths.s_l, "s_g": st.widths.s_g},
        "bounds": {
            "eta0": dict(report.rb.eta0), "gamma0": dict(report.rb.gamma0),
            "delta": report.rb.delta,
            "f0_norm": report.rb.f0_norm, "g0_norm": report.rb.g0_norm,
        },
        "schedule": {"m": report.schedule.m, "p": report.schedule.p,
                     "q": dict(report.schedule.q)},
        "schedule_margins": dict(report.schedule_margins),
        "constants": {"C3": report.C3, "C4": report.C4,
                      "V": report.V, "W": report.W,
                      "pert_sup_d1": report.pert_sup_d1,
                      "pert_sup_real": report.pert_sup_real},
        "L_init": report.L_init, "G_init": report.G_init,
        "t_bar": report.t_bar,
        "t_bar_years": report.t_bar_years,
        "g_condition_ok": report.g_condition_ok,
        "g_condition_margin": report.g_condition_margin,
        "feasible": report.feasible,
    }


def trajectory_rows(traj) -> list[dict]:
    e0 = traj.energy[0]
    rows = []
    for i in range(traj.times.size):
        rows.append({
            "t": float(traj.times[i]), "L": float(traj.L[i]), "G": float(traj.G[i]),
            "l": float(traj.l[i]), "g": float(traj.g[i]), "e": float(traj.e[i]),
            "H": float(traj.energy[i]),
            "rel_drift": float(abs(traj.energy[i] - e0) / max(abs(e0), 1e-300)),
        })
    return rows
