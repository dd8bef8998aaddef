"""Restricted circular planar problem.

Unperturbed Hamiltonian -1/(2L**2) - omega_g G in units with G_N m0 = 1 and
the primary's semi-major axis = 1; per-component bound functions; the
restricted stability theorem (C3, C4, L_f, the G-confinement condition and
the eccentricity band).

The truncated perturbation is a Taylor-Fourier series whose base point is
the resonant torus (L0, G0); harmonic input files store offsets from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import tfseries as tf
from .averaging import (AveragingResult, InvalidScheduleError, NoIterationNeeded,
                        first_order_average)
from .core import (RESTRICTED_COMPONENTS, DomainError, RestrictedFieldBounds,
                   RestrictedSchedule, RestrictedWidthSet, geometric_factor)

G_N_AU_MSUN_YR = 4.0 * math.pi ** 2


@dataclass(frozen=True)
class RestrictedSetup:
    """Physical and geometric data of one resonant restricted configuration."""

    eps: float
    omega_g: float           # primary frequency, positive, normalized units
    L0: float
    G0: float
    p_int: int
    q_int: int
    T: float
    widths: RestrictedWidthSet
    H1: tf.TaylorFourierSeries   # unscaled perturbation shape, base (L0, G0)
    kappa: float
    K: float
    e0: float
    time_unit_years: float = 1.0

    @property
    def omega_l(self) -> float:
        return 1.0 / self.L0 ** 3

    @property
    def omega(self) -> tuple[float, float]:
        """Frequency vector of the integrable flow: (dl/dt, dg/dt)."""
        return (self.omega_l, -self.omega_g)


def build_setup(m0: float, m1: float, a_primary_au: float, p_int: int, q_int: int,
                e0: float, widths: RestrictedWidthSet, h1: tf.TaylorFourierSeries,
                G_N: float = G_N_AU_MSUN_YR) -> RestrictedSetup:
    """Assemble a setup from physical parameters and a loaded harmonic file.

    The primary revolves with mean motion sqrt(1 + eps) in normalized units;
    the resonant action solves 1/L**3 = (p/q) omega_g.  Convexity constants
    come from the nonzero hessian entry 3/L**4 over the real L-interval.
    """
    if not (m0 > 0 and 0 <= m1 < m0 and a_primary_au > 0):
        raise DomainError("need m0 > 0, 0 <= m1 < m0, positive semi-major axis")
    if not (0.0 <= e0 < 1.0):
        raise DomainError("e0 must lie in [0, 1)")
    eps = m1 / m0
    omega_g = math.sqrt(1.0 + eps)
    L0 = (q_int / (p_int * omega_g)) ** (1.0 / 3.0)
    G0 = L0 * math.sqrt(1.0 - e0 ** 2)
    T = 2.0 * math.pi * q_int / omega_g
    reach = widths.rho_L + widths.r_L
    if reach >= L0:
        raise DomainError("L-domain reaches L = 0")
    kappa = 3.0 / (L0 + reach) ** 4
    K = 3.0 / (L0 - reach) ** 4
    h1_centered = tf.TaylorFourierSeries(
        h1.n_actions, (L0, G0), h1.taylor_degree_cap, h1.harmonic_cap, dict(h1.terms))
    time_unit_years = math.sqrt(a_primary_au ** 3 / (G_N * m0))
    return RestrictedSetup(
        eps=eps, omega_g=omega_g, L0=L0, G0=G0, p_int=p_int, q_int=q_int, T=T,
        widths=widths, H1=h1_centered, kappa=kappa, K=K, e0=e0,
        time_unit_years=time_unit_years,
    )


def quadratic_remainder_series(setup: RestrictedSetup, degree: int = 8,
                               harmonic_cap: int | None = None) -> tf.TaylorFourierSeries:
    """Taylor expansion of the order-2 remainder of -1/(2L**2) around L0.

    Coefficients decay like (|I_L|/L0)**n; the default degree keeps the
    truncation far below rounding for the domains in use.
    """
    L0 = setup.L0
    n = setup.H1.n_actions
    terms: dict[tf.Key, complex] = {}
    for k in range(2, degree + 1):
        c = -((-1.0) ** k) * (k + 1) / (2.0 * L0 ** (k + 2))
        alpha = (k,) + (0,) * (n - 1)
        terms[((0,) * n, alpha)] = complex(c)
    return tf.TaylorFourierSeries(
        n, setup.H1.base_point, degree,
        setup.H1.harmonic_cap if harmonic_cap is None else harmonic_cap, terms)


def delta_bound_restricted(setup: RestrictedSetup, domain_scale: float = 3.0,
                           n_angles: int = 4096) -> float:
    """Frequency-detuning sup for the single action, divided by s_l."""
    radius = setup.widths.rho_L + domain_scale * setup.widths.r_L
    L0 = setup.L0
    if radius >= L0:
        raise DomainError("action disk touches L = 0")

    def f(z: np.ndarray) -> np.ndarray:
        return np.abs(1.0 / (L0 + z) ** 3 - 1.0 / L0 ** 3)

    best = float(f(np.array(-radius + 0.0j)))
    prev = None
    for npts in (n_angles, 2 * n_angles):
        ang = 2.0 * math.pi * np.arange(npts) / npts
        m = float(np.max(f(radius * np.exp(1j * ang))))
        if prev is not None:
            m = m + (m - prev) / 3.0
        prev = m
    return max(best, prev) / setup.widths.s_l


# ---------------------------------------------------------------------------
# bounds extraction
# ---------------------------------------------------------------------------

_COMPONENT_DERIV = {
    # field component j -> (derivative kind, variable index) of the series
    "L": ("angle_deriv", 0),   # X^L = -d/dl
    "G": ("angle_deriv", 1),   # X^G = -d/dg
    "l": ("action_deriv", 0),  # X^l = d/dI_L
    "g": ("action_deriv", 1),  # X^g = d/dI_G
}


@dataclass(frozen=True)
class RestrictedBoundsResult:
    """Certified (majorant) and recorded (sampled) bound bundles.

    ``pert_sup_d1`` bounds the full scaled perturbation on the inner domain
    (the energy-conservation budget for the G variable);
    ``pert_sup_real`` bounds it on the real confinement domain.
    """

    bounds: RestrictedFieldBounds
    sampled: RestrictedFieldBounds
    f0: tf.TaylorFourierSeries
    g0_minus_G: tf.TaylorFourierSeries
    pert_sup_d1: float
    pert_sup_real: float
    averaging: AveragingResult | None
    entirely_resonant: bool


def _component_sups(series: tf.TaylorFourierSeries, widths: RestrictedWidthSet,
                    scale: float, n_points: int, seed: int,
                    ) -> tuple[dict[str, float], dict[str, float]]:
    radii = widths.action_radii(scale)
    offs = widths.offset_radii(scale)
    centers = (widths.rho_L, widths.rho_G)
    angle_w = widths.angle_widths(scale)
    major: dict[str, float] = {}
    sampl: dict[str, float] = {}
    for j, (kind, idx) in _COMPONENT_DERIV.items():
        deriv = tf.derivative_angle(series, idx) if kind == "angle_deriv" \
            else tf.derivative_action(series, idx)
        sup_major = tf.majorant_norm(deriv, radii, angle_w)
        sup_sample = tf.sample_norm(deriv, centers, offs, angle_w,
                                    n_points, seed + 13 * idx + (kind == "action_deriv"))
        div = widths.component_width(j)
        major[j] = sup_major / div
        sampl[j] = sup_sample / div
    return major, sampl


def restricted_field_bounds(setup: RestrictedSetup, preliminary_averaging: int = 0,
                            n_points: int = 100_000, seed: int = 2024,
                            averaging_order: int = 2) -> RestrictedBoundsResult:
    """Per-component initial bounds from the truncated perturbation.

    The perturbation is split along the periodic flow first; each component
    of the non-resonant and resonant fields is then bounded without Cauchy
    inequalities, by exact differentiation followed by majorant and sampled
    sup estimates on the 3-scaled domain.  With ``preliminary_averaging=1``
    one numeric averaging step is applied before extraction.
    """
    w = setup.widths
    eps_h1 = tf.scale(setup.H1, setup.eps)
    gcal = quadratic_remainder_series(setup)
    averaging = None
    if preliminary_averaging not in (0, 1):
        raise DomainError("preliminary_averaging must be 0 or 1")
    if preliminary_averaging == 1:
        pert = tf.add(gcal, eps_h1)
        averaging = first_order_average(
            pert, setup.omega, setup.T,
            degree_cap=pert.taylor_degree_cap + 2,
            harmonic_cap=2 * max(setup.H1.harmonic_cap, 1),
            order=averaging_order)
        f0 = averaging.f1
        g0_minus_G = tf.subtract(averaging.g1, gcal)
    else:
        g0_minus_G, f0 = tf.resonant_split(eps_h1, setup.omega, setup.T)
    entirely_resonant = f0.is_zero()

    eta_major, eta_sampled = _component_sups(f0, w, 3.0, n_points, seed)
    gam_major, gam_sampled = _component_sups(g0_minus_G, w, 3.0, n_points, seed + 101)
    delta = delta_bound_restricted(setup)
    radii3 = w.action_radii(3.0)
    angle3 = w.angle_widths(3.0)
    f0_norm = tf.majorant_norm(f0, radii3, angle3)
    g0_norm = tf.majorant_norm(g0_minus_G, radii3, angle3)
    pert_full = tf.add(g0_minus_G, f0)
    pert_sup_d1 = tf.majorant_norm(pert_full, w.action_radii(1.0), w.angle_widths(1.0))
    pert_sup_real = tf.sample_norm(pert_full, (w.rho_L, w.rho_G), w.offset_radii(1.0),
                                   (0.0, 0.0), max(n_points // 10, 1000), seed + 909)
    bounds = RestrictedFieldBounds(eta0=eta_major, gamma0=gam_major, delta=delta,
                                   f0_norm=f0_norm, g0_norm=g0_norm)
    sampled = RestrictedFieldBounds(eta0=eta_sampled, gamma0=gam_sampled, delta=delta,
                                    f0_norm=f0_norm, g0_norm=g0_norm)
    return RestrictedBoundsResult(
        bounds=bounds, sampled=sampled, f0=f0, g0_minus_G=g0_minus_G,
        pert_sup_d1=pert_sup_d1, pert_sup_real=pert_sup_real,
        averaging=averaging, entirely_resonant=entirely_resonant,
    )


# ---------------------------------------------------------------------------
# per-component step functions
# ---------------------------------------------------------------------------

def restricted_chi0(rb: RestrictedFieldBounds) -> float:
    e, g = rb.eta0, rb.gamma0
    return max(e["L"] + g["L"], e["G"] + g["G"],
               e["l"] + g["l"] + rb.delta, e["g"] + g["g"])


def restricted_Theta0(rb: RestrictedFieldBounds, T: float) -> float:
    return 0.5 * T * rb.eta_max()


def upsilon0_component(j: str, x: float, rb: RestrictedFieldBounds,
                       widths: RestrictedWidthSet, T: float) -> float:
    """The per-component step function, evaluated verbatim.

    The cross-ratio widths pair each action with its conjugate angle:
    (s_g/s_l)(r_G/r_L) for the (L, l) pair and its inverse for (G, g).
    """
    e, g, d = rb.eta0, rb.gamma0, rb.delta
    if e[j] == 0.0:
        raise NoIterationNeeded(f"eta0[{j}] = 0")
    chi0 = restricted_chi0(rb)
    Theta0 = restricted_Theta0(rb, T)
    cross_LG = (widths.s_g / widths.s_l) * (widths.r_G / widths.r_L)
    if j == "L":
        return ((T * x) ** 2 * e["l"] / 2.0 * chi0 + 0.5 * T * x * chi0
                + (1.0 + g["L"] / e["L"]) * x * Theta0
                + cross_LG * T * x ** 2 / (2.0 * e["L"])
                * (T * e["g"] * e["G"] * chi0
                   + (e["g"] * (e["G"] + g["G"]) + e["G"] * (e["g"] + g["g"])) * Theta0)
                + 0.5 * T * x ** 2
                * (e["l"] * (1.0 + g["L"] / e["L"]) + e["l"] + g["l"] + d) * Theta0)
    if j == "G":
        return ((T * x) ** 2 * e["g"] / 2.0 * chi0 + 0.5 * T * x * chi0
                + (1.0 + g["G"] / e["G"]) * x * Theta0
                + (1.0 / cross_LG) * T * x ** 2 / (2.0 * e["G"])
                * (T * e["l"] * e["L"] * chi0
                   + (e["l"] * (e["L"] + g["L"]) + e["L"] * (e["l"] + g["l"] + d)) * Theta0)
                + 0.5 * T * x ** 2
                * (e["g"] * (1.0 + g["G"] / e["G"]) + e["g"] + g["g"]) * Theta0)
    if j == "l":
        return ((T * x) ** 2 * e["L"] / 2.0 * chi0 + 0.5 * T * x * chi0
                + (1.0 + g["l"] / e["l"] + d / e["l"]) * x * Theta0
                + cross_LG * T * x ** 2 / (2.0 * e["l"])
                * (T * e["g"] * e["G"] * chi0
                   + (e["g"] * (e["G"] + g["G"]) + e["G"] * (e["g"] + g["g"])) * Theta0)
                + 0.5 * T * x ** 2
                * (e["L"] * (1.0 + g["l"] / e["l"] + d / e["l"]) + e["L"] + g["L"]) * Theta0)
    if j == "g":
        return ((T * x) ** 2 * e["G"] / 2.0 * chi0 + 0.5 * T * x * chi0
                + (1.0 + g["g"] / e["g"]) * x * Theta0
                + (1.0 / cross_LG) * T * x ** 2 / (2.0 * e["g"])
                * (T * e["l"] * e["L"] * chi0
                   + (e["l"] * (e["L"] + g["L"]) + e["L"] * (e["l"] + g["l"] + d)) * Theta0)
                + 0.5 * T * x ** 2
                * (e["G"] * (1.0 + g["g"] / e["g"]) + e["G"] + g["G"]) * Theta0)
    raise DomainError(f"unknown component {j!r}")


def zeta0_restricted(x: float, rb: RestrictedFieldBounds, T: float) -> float:
    return 0.5 * T * x * restricted_chi0(rb)


@dataclass(frozen=True)
class RestrictedScheduleVerdict:
    valid: bool
    margins: dict[str, float]
    failing: tuple[str, ...]


def validate_restricted_schedule(rb: RestrictedFieldBounds, widths: RestrictedWidthSet,
                                 T: float, sched: RestrictedSchedule,
                                 ) -> RestrictedScheduleVerdict:
    degenerate = rb.eta_max() == 0.0 and rb.f0_norm == 0.0
    margins: dict[str, float] = {}
    for j in RESTRICTED_COMPONENTS:
        try:
            margins[f"q_{j}"] = sched.q[j] - 2.0 * upsilon0_component(j, sched.m, rb, widths, T)
        except NoIterationNeeded:
            margins[f"q_{j}"] = sched.q[j]
    margins["p"] = sched.p if degenerate else sched.p - 2.0 * zeta0_restricted(sched.m, rb, T)
    margins["step"] = 1.0 - 0.5 * T * sched.m * rb.eta_max()
    failing = tuple(name for name, m in margins.items() if m <= 0.0)
    return RestrictedScheduleVerdict(valid=not failing, margins=margins, failing=failing)


def max_valid_m_restricted(rb: RestrictedFieldBounds, widths: RestrictedWidthSet,
                           T: float, p: float, q: Mapping[str, float],
                           m_cap: int = 512) -> int:
    def ok(m: int) -> bool:
        return validate_restricted_schedule(
            rb, widths, T, RestrictedSchedule(m=m, p=p, q=dict(q))).valid

    if not ok(1):
        return 0
    lo, hi = 1, m_cap
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class RestrictedNormalForm:
    """Per-component closed forms of the restricted recursion with loop traces."""

    schedule: RestrictedSchedule
    eta_m: Mapping[str, float]
    gamma_m: Mapping[str, float]
    f_norm_m: float
    g_norm_m: float
    delta_nf: Mapping[str, float]     # transformation size per component, norm units
    trace_eta: Mapping[str, tuple[float, ...]]

    def loop_vs_closed_max_rel(self) -> float:
        worst = 0.0
        for j, trace in self.trace_eta.items():
            ref = max(abs(trace[-1]), abs(self.eta_m[j]), 1e-300)
            worst = max(worst, abs(trace[-1] - self.eta_m[j]) / ref)
        return worst


def restricted_nf(rb: RestrictedFieldBounds, widths: RestrictedWidthSet, T: float,
                  sched: RestrictedSchedule) -> RestrictedNormalForm:
    verdict = validate_restricted_schedule(rb, widths, T, sched)
    if not verdict.valid:
        raise InvalidScheduleError(
            f"schedule invalid, failing condition(s): {', '.join(verdict.failing)}")
    m, p = sched.m, sched.p
    eta_m: dict[str, float] = {}
    gamma_m: dict[str, float] = {}
    delta_nf: dict[str, float] = {}
    trace: dict[str, tuple[float, ...]] = {}
    for j in RESTRICTED_COMPONENTS:
        qj = sched.q[j]
        eta_m[j] = qj ** m * rb.eta0[j]
        gamma_m[j] = rb.gamma0[j] + 0.5 * qj * geometric_factor(qj, m) * rb.eta0[j]
        delta_nf[j] = 0.5 * T * rb.eta0[j] * geometric_factor(qj, m)
        seq = [rb.eta0[j]]
        for _ in range(m):
            seq.append(qj * seq[-1])
        trace[j] = tuple(seq)
    return RestrictedNormalForm(
        schedule=sched, eta_m=eta_m, gamma_m=gamma_m,
        f_norm_m=p ** m * rb.f0_norm,
        g_norm_m=rb.g0_norm + 0.5 * p * geometric_factor(p, m) * rb.f0_norm,
        delta_nf=delta_nf, trace_eta=trace,
    )


# ---------------------------------------------------------------------------
# the stability theorem
# ---------------------------------------------------------------------------

def _delta_L(rb: RestrictedFieldBounds, sched: RestrictedSchedule, T: float) -> float:
    return 0.5 * T * rb.eta0["L"] * geometric_factor(sched.q["L"], sched.m)


def _penalty(rb: RestrictedFieldBounds, sched: RestrictedSchedule) -> float:
    coeff = sched.p * geometric_factor(sched.p, sched.m) + 2.0 * sched.p ** sched.m
    return coeff * rb.f0_norm + 2.0 * rb.g0_norm


def c3_c4(setup: RestrictedSetup, rb: RestrictedFieldBounds,
          sched: RestrictedSchedule, L_init: float) -> tuple[float, float]:
    """Energy-budget constant and drift constant of the restricted theorem.

    The pulled-back radius L_tilde = L_init + drift enters the quadratic,
    matching the planetary constant's structure.
    """
    w = setup.widths
    Lt = L_init + _delta_L(rb, sched, setup.T) * w.r_L
    ratio = setup.K / setup.kappa
    quad = (w.rho_L + w.r_L - (ratio + 1.0) * Lt) ** 2 - (ratio * Lt) ** 2
    C3 = 0.5 * setup.kappa * quad - _penalty(rb, sched)
    C4 = (abs(setup.omega_l) * rb.eta0["L"] * w.r_L
          + (sched.q["G"] / sched.q["L"]) ** sched.m
          * abs(setup.omega_g) * rb.eta0["G"] * w.r_G)
    return C3, C4


def restricted_stability_time(setup: RestrictedSetup, rb: RestrictedFieldBounds,
                              sched: RestrictedSchedule, L_init: float) -> float:
    C3, C4 = c3_c4(setup, rb, sched, L_init)
    if C4 == 0.0:
        return math.inf
    if C3 <= 0.0:
        return 0.0
    return (C3 / C4) * sched.q["L"] ** (-sched.m)


def b_of_t(setup: RestrictedSetup, rb: RestrictedFieldBounds,
           sched: RestrictedSchedule, L_init: float, t: float) -> float:
    _, C4 = c3_c4(setup, rb, sched, L_init)
    drift = C4 * sched.q["L"] ** sched.m * abs(t)
    return 2.0 * (_penalty(rb, sched) + drift) / setup.kappa


def l_confinement(setup: RestrictedSetup, rb: RestrictedFieldBounds,
                  sched: RestrictedSchedule, L_init: float, t: float) -> float:
    """Action drift bound L_f(t)."""
    w = setup.widths
    dL = _delta_L(rb, sched, setup.T)
    Lt = L_init + dL * w.r_L
    ratio = setup.K / setup.kappa
    return ratio * Lt + math.sqrt((ratio * Lt) ** 2
                                  + b_of_t(setup, rb, sched, L_init, t)) + dL * w.r_L


def v_reach(setup: RestrictedSetup, rb: RestrictedFieldBounds,
            sched: RestrictedSchedule) -> float:
    """Confined real reach of the L variable inside its domain."""
    w = setup.widths
    return w.rho_L + w.r_L - _delta_L(rb, sched, setup.T) * w.r_L


def w_bound(setup: RestrictedSetup, rb: RestrictedFieldBounds,
            sched: RestrictedSchedule, L_init: float) -> float:
    """Worst-case Kepler-term spread over the confinement domain."""
    V = v_reach(setup, rb, sched)
    L0 = setup.L0
    if V >= L0 or L_init >= L0:
        return math.inf
    return ((L_init + V) * (L_init + 2.0 * L0 + V)
            / (2.0 * (L0 - V) ** 2 * (L0 - L_init) ** 2))


def g_confinement_check(setup: RestrictedSetup, rb: RestrictedFieldBounds,
                        sched: RestrictedSchedule, L_init: float, G_init: float,
                        pert_sup_d1: float) -> tuple[bool, float]:
    """Energy-conservation confinement condition for the G variable."""
    w = setup.widths
    lhs = abs(setup.G0 + G_init) + (w_bound(setup, rb, sched, L_init)
                                    + 2.0 * pert_sup_d1) / setup.omega_g
    dG = 0.5 * setup.T * rb.eta0["G"] * geometric_factor(sched.q["G"], sched.m)
    rhs = w.rho_G + w.r_G - dG * w.r_G
    return lhs <= rhs, rhs - lhs


def kepler_spread_bound(L_center: float, L_init: float, L_f: float) -> float:
    """Max of |1/(2 L_t**2) - 1/(2 L_0**2)| over the confined rectangle."""
    L_min0 = L_center - L_init
    Lt_min = L_min0 - L_f
    if Lt_min <= 0.0:
        return math.inf
    return 0.5 / Lt_min ** 2 - 0.5 / L_min0 ** 2


def eccentricity_band(setup: RestrictedSetup, L_center: float, L_init: float,
                      e0: float, L_f: float, energy_drift: float,
                      ) -> tuple[float, float, bool]:
    """Certified eccentricity interval [e_lo, e_hi] after an L-drift L_f.

    ``energy_drift`` bounds |Delta(1/(2L**2))| + eps |Delta H1| along the
    flow; the angular-momentum drift is that over omega_g.  Semi-major axes
    are reconstructed from L (a = L**2 in normalized units).  Degenerate
    bands are clamped to [0, 1] with a flag.
    """
    if not (0.0 <= e0 < 1.0):
        raise DomainError("e0 must lie in [0, 1)")
    y0 = math.sqrt(1.0 - e0 ** 2)
    c = energy_drift / setup.omega_g
    a0_min = (L_center - L_init) ** 2
    a0_max = (L_center + L_init) ** 2
    at_min = (L_center - L_init - L_f) ** 2
    at_max = (L_center + L_init + L_f) ** 2
    if L_center - L_init - L_f <= 0.0:
        return 0.0, 1.0, True
    A_plus = (math.sqrt(a0_max) * y0 + c) ** 2 / at_min
    A_minus = max(0.0, math.sqrt(a0_min) * y0 - c) ** 2 / at_max
    clamped = A_plus > 1.0 or A_minus > 1.0
    e_lo = math.sqrt(max(0.0, 1.0 - min(A_plus, 1.0)))
    e_hi = math.sqrt(max(0.0, 1.0 - min(A_minus, 1.0)))
    return e_lo, e_hi, clamped


@dataclass(frozen=True)
class RestrictedReport:
    """Evaluated restricted stability certificate."""

    setup: RestrictedSetup
    rb: RestrictedFieldBounds
    schedule: RestrictedSchedule
    L_init: float
    G_init: float
    C3: float
    C4: float
    t_bar: float
    V: float
    W: float
    pert_sup_d1: float
    pert_sup_real: float
    g_condition_ok: bool
    g_condition_margin: float
    schedule_margins: dict[str, float] = field(default_factory=dict)

    @property
    def t_bar_years(self) -> float:
        return self.t_bar * self.setup.time_unit_years

    @property
    def feasible(self) -> bool:
        return (self.C3 > 0.0 and self.g_condition_ok
                and all(m > 0.0 for m in self.schedule_margins.values()))

    def L_f_at(self, t: float) -> float:
        return l_confinement(self.setup, self.rb, self.schedule, self.L_init, t)

    def energy_drift_bound_at(self, t: float) -> float:
        spread = kepler_spread_bound(self.setup.L0, self.L_init, self.L_f_at(t))
        return spread + 2.0 * self.pert_sup_real

    def A_pm_at(self, t: float) -> tuple[float, float]:
        """Bounds on 1 - e**2 over the initial-condition ball (A_minus, A_plus)."""
        e_lo, e_hi, _ = self.band_at(t)
        return 1.0 - e_hi ** 2, 1.0 - e_lo ** 2

    def band_at(self, t: float) -> tuple[float, float, bool]:
        return eccentricity_band(self.setup, self.setup.L0, self.L_init,
                                 self.setup.e0, self.L_f_at(t),
                                 self.energy_drift_bound_at(t))

    def point_band_at(self, t: float, L_start: float, e_start: float,
                      ) -> tuple[float, float, bool]:
        """Band for one concrete initial condition instead of the whole ball."""
        L_f = self.L_f_at(t)
        drift = kepler_spread_bound(L_start, 0.0, L_f) + 2.0 * self.pert_sup_real
        return eccentricity_band(self.setup, L_start, 0.0, e_start, L_f, drift)


def evaluate_restricted(setup: RestrictedSetup, rbres: RestrictedBoundsResult,
                        sched: RestrictedSchedule, L_init: float,
                        G_init: float) -> RestrictedReport:
    rb = rbres.bounds
    verdict = validate_restricted_schedule(rb, setup.widths, setup.T, sched)
    C3, C4 = c3_c4(setup, rb, sched, L_init)
    t_bar = restricted_stability_time(setup, rb, sched, L_init) if verdict.valid else 0.0
    ok, margin = g_confinement_check(setup, rb, sched, L_init, G_init, rbres.pert_sup_d1)
    return RestrictedReport(
        setup=setup, rb=rb, schedule=sched, L_init=L_init, G_init=G_init,
        C3=C3, C4=C4, t_bar=t_bar,
        V=v_reach(setup, rb, sched), W=w_bound(setup, rb, sched, L_init),
        pert_sup_d1=rbres.pert_sup_d1, pert_sup_real=rbres.pert_sup_real,
        g_condition_ok=ok, g_condition_margin=margin,
        schedule_margins=dict(verdict.margins),
    )
