"""Planetary stability theorem evaluation.

Energy-method constants, certified stability time, action-confinement
radius as a function of time, angular-momentum eccentricity envelopes, and
the admissibility conditions.  Infeasible configurations are reported
outcomes with diagnostics, never exceptions, so parameter scans can
traverse them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .averaging import BoundFunctions, validate_schedule
from .core import DomainError, FieldBounds, Schedule, WidthSet, geometric_factor
from .planetary import ConvexityConstants, ResonanceSpec


@dataclass(frozen=True)
class PlanetaryStabilityInput:
    widths: WidthSet
    bounds: FieldBounds
    schedule: Schedule
    convexity: ConvexityConstants
    resonance: ResonanceSpec
    R: float = 0.0
    xi0: float = 0.0

    def __post_init__(self) -> None:
        if self.R < 0.0 or self.xi0 < 0.0:
            raise DomainError("R and xi0 must be nonnegative")

    def bound_functions(self) -> BoundFunctions:
        return BoundFunctions(T=self.resonance.T, bounds=self.bounds,
                              beta=self.widths.beta)


def _penalty(inp: PlanetaryStabilityInput) -> float:
    """Sup-norm penalty entering the energy budget."""
    s = inp.schedule
    coeff = s.p * geometric_factor(s.p, s.m) + 2.0 * s.p ** s.m
    return coeff * inp.bounds.f0_norm + 2.0 * inp.bounds.g0_norm


def delta_aa(inp: PlanetaryStabilityInput) -> float:
    s = inp.schedule
    return 0.5 * inp.resonance.T * inp.bounds.eta0 * geometric_factor(s.q1, s.m)


def delta_cart(inp: PlanetaryStabilityInput) -> float:
    s = inp.schedule
    return 0.5 * inp.resonance.T * inp.bounds.Xi0 * geometric_factor(s.q2, s.m)


def r_tilde(inp: PlanetaryStabilityInput) -> float:
    """Initial-condition radius pulled back through the normalization."""
    return inp.R + delta_aa(inp) * inp.widths.r


def c1(inp: PlanetaryStabilityInput) -> float:
    """Energy-budget constant; may be negative (no stability certified)."""
    cx = inp.convexity
    rt = r_tilde(inp)
    reach = inp.widths.rho + inp.widths.r
    ratio = cx.K / cx.kappa
    quad = (reach - (ratio + 1.0) * rt) ** 2 - (ratio * rt) ** 2
    return 0.5 * cx.kappa * quad - _penalty(inp)


def c2(inp: PlanetaryStabilityInput) -> float:
    w1, w2 = inp.resonance.omega
    return inp.widths.r * abs(w1 + w2) * inp.bounds.eta0


def stability_time(inp: PlanetaryStabilityInput) -> float:
    """Certified time (C1/C2) q1**-m; 0 when C1 <= 0, inf when unperturbed."""
    C1 = c1(inp)
    C2 = c2(inp)
    if C2 == 0.0:
        return math.inf
    if C1 <= 0.0:
        return 0.0
    return (C1 / C2) * inp.schedule.q1 ** (-inp.schedule.m)


def a_of_t(inp: PlanetaryStabilityInput, t: float) -> float:
    s = inp.schedule
    drift = c2(inp) * s.q1 ** s.m * abs(t)
    return 2.0 * (_penalty(inp) + drift) / inp.convexity.kappa


def confinement_radius(inp: PlanetaryStabilityInput, t: float) -> float:
    """Action drift bound R_f(t), including the back-transformation term."""
    ratio = inp.convexity.K / inp.convexity.kappa
    rt = r_tilde(inp)
    return ratio * rt + math.sqrt((ratio * rt) ** 2 + a_of_t(inp, t)) \
        + delta_aa(inp) * inp.widths.r


@dataclass(frozen=True)
class EccentricityEnvelopes:
    e_bar_0: float
    n_minus: float
    saturated: bool


def initial_eccentricity_envelope(inp: PlanetaryStabilityInput) -> EccentricityEnvelopes:
    """Maximal initial eccentricity compatible with the cartesian ball.

    Identical for both bodies by construction; saturates at e = 1 with a
    flag when the radicand leaves [0, 1].
    """
    lam1, lam2 = inp.resonance.Lambda0
    denom = 2.0 * (lam1 - inp.R)
    if denom <= 0.0:
        raise DomainError("R reaches the first resonant action")
    inner = 1.0 - inp.xi0 ** 2 / denom
    rad = 1.0 - inner ** 2
    saturated = rad < 0.0 or abs(inner) > 1.0
    e0 = 1.0 if saturated else math.sqrt(max(rad, 0.0))
    y = math.sqrt(max(1.0 - e0 ** 2, 0.0))
    n_minus = (lam1 - inp.R) * y + (lam2 - inp.R) * y
    return EccentricityEnvelopes(e_bar_0=e0, n_minus=n_minus, saturated=saturated)


def eccentricity_envelope_at(inp: PlanetaryStabilityInput, t: float,
                             body: int) -> tuple[float, bool]:
    """Envelope e_bar_j(t, xi0); returns (value, saturated flag)."""
    env = initial_eccentricity_envelope(inp)
    lam1, lam2 = inp.resonance.Lambda0
    rf = confinement_radius(inp, t)
    own, other = (lam1, lam2) if body == 1 else (lam2, lam1)
    ratio = (env.n_minus - other - rf) / (own + rf)
    rad = 1.0 - ratio ** 2
    if rad < 0.0:
        return 1.0, True
    return math.sqrt(rad), env.saturated


@dataclass(frozen=True)
class ConditionFlags:
    """Admissibility conditions with margins (positive margin = satisfied)."""

    c1_positive: bool
    c1_margin: float
    cart_radius_ok: bool
    cart_radius_margin: float
    momentum_reach_ok: bool
    momentum_reach_margin: float
    momentum_reach_rf_ok: bool
    momentum_reach_rf_margin: float

    @property
    def all_ok(self) -> bool:
        return (self.c1_positive and self.cart_radius_ok
                and self.momentum_reach_ok and self.momentum_reach_rf_ok)


def check_conditions(inp: PlanetaryStabilityInput) -> ConditionFlags:
    """Evaluate every stated admissibility inequality (their union).

    The momentum-reach condition is checked both with the domain reach
    rho + r + drift and with R_f(t_bar); the former is the more
    conservative of the two.
    """
    C1 = c1(inp)
    w = inp.widths
    lhs = w.xi + (1.0 - delta_cart(inp)) * w.u
    env = initial_eccentricity_envelope(inp)
    lam1, lam2 = inp.resonance.Lambda0
    reach = w.rho + w.r + delta_aa(inp) * w.r
    rad_dom = lam1 + lam2 + 2.0 * reach - env.n_minus
    rhs_dom = math.sqrt(max(rad_dom, 0.0))
    t_bar = stability_time(inp)
    rf = confinement_radius(inp, min(t_bar, 1e308))
    rad_rf = lam1 + lam2 + 2.0 * rf - env.n_minus
    rhs_rf = math.sqrt(max(rad_rf, 0.0))
    return ConditionFlags(
        c1_positive=C1 > 0.0, c1_margin=C1,
        cart_radius_ok=lhs > inp.xi0, cart_radius_margin=lhs - inp.xi0,
        momentum_reach_ok=lhs >= rhs_dom, momentum_reach_margin=lhs - rhs_dom,
        momentum_reach_rf_ok=lhs >= rhs_rf, momentum_reach_rf_margin=lhs - rhs_rf,
    )


def minimal_cartesian_domain_radius(inp: PlanetaryStabilityInput) -> float:
    """Smallest xi satisfying the momentum-reach condition (with xi0 fixed)."""
    w = inp.widths
    env = initial_eccentricity_envelope(inp)
    lam1, lam2 = inp.resonance.Lambda0
    reach = w.rho + w.r + delta_aa(inp) * w.r
    rhs = math.sqrt(max(lam1 + lam2 + 2.0 * reach - env.n_minus, 0.0))
    return max(rhs, inp.xi0) - (1.0 - delta_cart(inp)) * w.u


@dataclass(frozen=True)
class StabilityReport:
    """Evaluated planetary stability certificate.

    Time-dependent quantities are exposed as methods; scalar snapshots at
    the certified time are precomputed fields.
    """

    inp: PlanetaryStabilityInput
    c1: float
    c2: float
    t_bar: float
    r_tilde: float
    delta_aa: float
    delta_cart: float
    n_minus: float
    e1_bar_0: float
    e2_bar_0: float
    rf_at_tbar: float
    e1_bar_at_tbar: float
    e2_bar_at_tbar: float
    flags: ConditionFlags
    schedule_margins: dict[str, float] = field(default_factory=dict)
    saturated: bool = False

    def R_f_at(self, t: float) -> float:
        return confinement_radius(self.inp, t)

    def e1_bar_at(self, t: float) -> float:
        return eccentricity_envelope_at(self.inp, t, body=1)[0]

    def e2_bar_at(self, t: float) -> float:
        return eccentricity_envelope_at(self.inp, t, body=2)[0]

    def a_at(self, t: float) -> float:
        return a_of_t(self.inp, t)


def evaluate(inp: PlanetaryStabilityInput) -> StabilityReport:
    """Evaluate the full certificate for one configuration."""
    verdict = validate_schedule(inp.bound_functions(), inp.schedule)
    t_bar = stability_time(inp) if verdict.valid else 0.0
    t_eval = 0.0 if math.isinf(t_bar) else t_bar
    env = initial_eccentricity_envelope(inp)
    e1t, sat1 = eccentricity_envelope_at(inp, t_eval, 1)
    e2t, sat2 = eccentricity_envelope_at(inp, t_eval, 2)
    return StabilityReport(
        inp=inp,
        c1=c1(inp), c2=c2(inp), t_bar=t_bar,
        r_tilde=r_tilde(inp),
        delta_aa=delta_aa(inp), delta_cart=delta_cart(inp),
        n_minus=env.n_minus,
        e1_bar_0=env.e_bar_0, e2_bar_0=env.e_bar_0,
        rf_at_tbar=confinement_radius(inp, t_eval),
        e1_bar_at_tbar=e1t, e2_bar_at_tbar=e2t,
        flags=check_conditions(inp),
        schedule_margins=dict(verdict.margins),
        saturated=env.saturated or sat1 or sat2,
    )
