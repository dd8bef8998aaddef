"""Normal-form engine.

Bound functions of the iteration step, validity conditions, the m-step
bound recursion with its closed forms, the remainder-field matrix assembly,
and the numeric homological solver / first-order averaging acting on
series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tfseries as tf
from .core import DomainError, FieldBounds, Schedule, WidthSet, geometric_factor


class NoIterationNeeded(Exception):
    """The action-angle field bound is zero: nothing to contract."""


class CartesianPartAbsent(Exception):
    """The cartesian field bound is zero: no cartesian contraction to track."""


class InvalidScheduleError(RuntimeError):
    """A schedule failed its validity conditions; the message names them."""


@dataclass(frozen=True)
class BoundFunctions:
    """Field bounds together with the period, feeding the step functions.

    ``chi0`` and ``Theta0`` are recomputed from the bounds on access.
    """

    T: float
    bounds: FieldBounds
    beta: float

    def __post_init__(self) -> None:
        if self.T <= 0.0 or self.beta <= 0.0:
            raise DomainError("period and beta must be positive")

    @property
    def chi0(self) -> float:
        b = self.bounds
        return max(b.Xi0 + b.Gamma0, b.eta0 + b.gamma0 + b.delta)

    @property
    def Theta0(self) -> float:
        b = self.bounds
        return 0.5 * self.T * max(b.Xi0, b.eta0)


def upsilon0(x: float, bf: BoundFunctions) -> float:
    """Step function controlling the action-angle field contraction."""
    b = bf.bounds
    if b.eta0 == 0.0:
        raise NoIterationNeeded("eta0 = 0: the non-resonant field is already absent")
    T, beta = bf.T, bf.beta
    chi0, Theta0 = bf.chi0, bf.Theta0
    return (
        (T * x) ** 2 * b.eta0 * chi0
        + T * x ** 2 * Theta0 * (2.0 * b.eta0 + 2.0 * b.gamma0 + b.delta)
        + 0.5 * T * x * chi0
        + Theta0 * x * (1.0 + b.gamma0 / b.eta0 + b.delta / b.eta0)
        + (T * x * b.Xi0 / beta) ** 2 * chi0 / b.eta0
        + 2.0 * T * x ** 2 * b.Xi0 * Theta0 * (b.Xi0 / b.eta0 + b.Gamma0 / b.eta0) / beta ** 2
    )


def Upsilon0(x: float, bf: BoundFunctions) -> float:
    """Step function controlling the cartesian field contraction."""
    b = bf.bounds
    if b.Xi0 == 0.0:
        raise CartesianPartAbsent("Xi0 = 0: no cartesian part to contract")
    T, beta = bf.T, bf.beta
    chi0, Theta0 = bf.chi0, bf.Theta0
    return (
        beta ** 2 * (T * x * b.eta0) ** 2 * chi0 / b.Xi0
        + beta ** 2 * T * x ** 2 * b.eta0 * Theta0
        * (2.0 * b.eta0 / b.Xi0 + 2.0 * b.gamma0 / b.Xi0 + b.delta / b.Xi0)
        + 0.5 * T * x * chi0
        + Theta0 * x * (1.0 + b.Gamma0 / b.Xi0)
        + (T * x * b.Xi0) ** 2 * chi0 / b.Xi0
        + 2.0 * T * x ** 2 * Theta0 * (b.Xi0 + b.Gamma0)
    )


def zeta0(x: float, bf: BoundFunctions) -> float:
    """Step function controlling the sup-norm contraction of the remainder."""
    b = bf.bounds
    return 0.5 * bf.T * x * max(b.gamma0 + b.delta, b.Gamma0) + bf.Theta0 * x


@dataclass(frozen=True)
class ScheduleVerdict:
    valid: bool
    margins: dict[str, float]
    failing: tuple[str, ...]


def validate_schedule(bf: BoundFunctions, sched: Schedule) -> ScheduleVerdict:
    """Check the m-step validity conditions and report each margin.

    Conditions: 2*upsilon0(m) < q1, 2*Upsilon0(m) < q2, 2*zeta0(m) < p and
    the step condition T*m*eta0/2 < 1.  Degenerate bounds (zero fields)
    satisfy their conditions automatically.
    """
    m = sched.m
    b = bf.bounds
    degenerate = b.eta0 == 0.0 and b.Xi0 == 0.0 and b.f0_norm == 0.0
    margins: dict[str, float] = {}
    try:
        margins["q1"] = sched.q1 - 2.0 * upsilon0(m, bf)
    except NoIterationNeeded:
        margins["q1"] = sched.q1
    try:
        margins["q2"] = sched.q2 - 2.0 * Upsilon0(m, bf)
    except (CartesianPartAbsent, NoIterationNeeded):
        margins["q2"] = sched.q2
    margins["p"] = sched.p if degenerate else sched.p - 2.0 * zeta0(m, bf)
    margins["step"] = 1.0 - 0.5 * bf.T * m * b.eta0
    failing = tuple(name for name, margin in margins.items() if margin <= 0.0)
    return ScheduleVerdict(valid=not failing, margins=margins, failing=failing)


def max_valid_m(bf: BoundFunctions, p: float, q1: float, q2: float,
                m_cap: int = 512) -> int:
    """Largest m for which the schedule (m, p, q1, q2) is valid; 0 if none.

    Validity is monotone in m (the step functions increase in x), so the
    valid set is a prefix of the integers.
    """
    lo, hi = 0, m_cap
    if not validate_schedule(bf, Schedule(m=1, p=p, q1=q1, q2=q2)).valid:
        return 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if validate_schedule(bf, Schedule(m=max(mid, 1), p=p, q1=q1, q2=q2)).valid:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class NormalFormResult:
    """Closed forms and per-step traces of the m-step recursion.

    ``delta_aa``/``delta_cart`` are the transformation sizes in anisotropic
    norm units (multiply by r or u for displacements); the inverse
    transformation carries identical bounds.
    """

    schedule: Schedule
    eta_m: float
    gamma_m: float
    Xi_m: float
    Gamma_m: float
    f_norm_m: float
    g_norm_m: float
    delta_aa: float
    delta_cart: float
    delta_aa_inverse: float
    delta_cart_inverse: float
    trace_eta: tuple[float, ...]
    trace_gamma: tuple[float, ...]
    trace_Xi: tuple[float, ...]
    trace_Gamma: tuple[float, ...]
    trace_f: tuple[float, ...]
    trace_g: tuple[float, ...]
    trace_delta_aa: tuple[float, ...]

    def loop_vs_closed_max_rel(self) -> float:
        """Largest relative disagreement between loop trace and closed forms."""
        pairs = (
            (self.trace_eta[-1], self.eta_m),
            (self.trace_gamma[-1], self.gamma_m),
            (self.trace_Xi[-1], self.Xi_m),
            (self.trace_Gamma[-1], self.Gamma_m),
            (self.trace_f[-1], self.f_norm_m),
            (self.trace_g[-1], self.g_norm_m),
            (self.trace_delta_aa[-1], self.delta_aa),
        )
        worst = 0.0
        for loop, closed in pairs:
            ref = max(abs(loop), abs(closed), 1e-300)
            worst = max(worst, abs(loop - closed) / ref)
        return worst


def nf_recursion(bf: BoundFunctions, sched: Schedule) -> NormalFormResult:
    """Run the explicit step recursion and evaluate the closed forms.

    Refuses invalid schedules, naming the failing condition.  The loop and
    the closed forms must agree to rounding; both are returned.
    """
    verdict = validate_schedule(bf, sched)
    if not verdict.valid:
        raise InvalidScheduleError(
            f"schedule invalid, failing condition(s): {', '.join(verdict.failing)}")
    b = bf.bounds
    m, p, q1, q2 = sched.m, sched.p, sched.q1, sched.q2
    eta = [b.eta0]
    gam = [b.gamma0]
    Xi = [b.Xi0]
    Gam = [b.Gamma0]
    fn = [b.f0_norm]
    gn = [b.g0_norm]
    dlt = [0.0]
    for _ in range(m):
        eta.append(q1 * eta[-1])
        gam.append(gam[-1] + 0.5 * q1 * eta[-2])
        Xi.append(q2 * Xi[-1])
        Gam.append(Gam[-1] + 0.5 * q2 * Xi[-2])
        fn.append(p * fn[-1])
        gn.append(gn[-1] + 0.5 * p * fn[-2])
        dlt.append(dlt[-1] + 0.5 * bf.T * eta[-2])
    geo1 = geometric_factor(q1, m)
    geo2 = geometric_factor(q2, m)
    geop = geometric_factor(p, m)
    d_aa = 0.5 * bf.T * b.eta0 * geo1
    d_cart = 0.5 * bf.T * b.Xi0 * geo2
    return NormalFormResult(
        schedule=sched,
        eta_m=q1 ** m * b.eta0,
        gamma_m=b.gamma0 + 0.5 * q1 * geo1 * b.eta0,
        Xi_m=q2 ** m * b.Xi0,
        Gamma_m=b.Gamma0 + 0.5 * q2 * geo2 * b.Xi0,
        f_norm_m=p ** m * b.f0_norm,
        g_norm_m=b.g0_norm + 0.5 * p * geop * b.f0_norm,
        delta_aa=d_aa, delta_cart=d_cart,
        delta_aa_inverse=d_aa, delta_cart_inverse=d_cart,
        trace_eta=tuple(eta), trace_gamma=tuple(gam),
        trace_Xi=tuple(Xi), trace_Gamma=tuple(Gam),
        trace_f=tuple(fn), trace_g=tuple(gn),
        trace_delta_aa=tuple(dlt),
    )


# ---------------------------------------------------------------------------
# remainder-field matrix assembly
# ---------------------------------------------------------------------------

def remainder_matrix(bf: BoundFunctions, widths: WidthSet, alpha: float) -> np.ndarray:
    """The 8x8 flow-Jacobian bound matrix, component order (I, I, x, x, t, t, y, y)."""
    b = bf.bounds
    if not (0.0 < alpha):
        raise DomainError("alpha must be positive")
    e = 0.5 * bf.T * b.eta0 / alpha
    X = 0.5 * bf.T * b.Xi0 / alpha
    if e >= 1.0 or X >= 1.0:
        raise InvalidScheduleError("step condition violated: T*eta0/(2 alpha) >= 1")
    beta = bf.beta
    rs = math.sqrt(widths.r / widths.s)
    sr = 1.0 / rs
    A = np.array([
        [e + 1, e, rs * X / beta, rs * X / beta],
        [e, e + 1, rs * X / beta, rs * X / beta],
        [beta * sr * e, beta * sr * e, X + 1, X],
        [beta * sr * e, beta * sr * e, X, X + 1],
    ])
    B = np.array([
        [rs ** 2 * e, rs ** 2 * e, rs * X / beta, rs * X / beta],
        [rs ** 2 * e, rs ** 2 * e, rs * X / beta, rs * X / beta],
        [beta * rs * e, beta * rs * e, X, X],
        [beta * rs * e, beta * rs * e, X, X],
    ])
    C = np.array([
        [sr ** 2 * e, sr ** 2 * e, sr * X / beta, sr * X / beta],
        [sr ** 2 * e, sr ** 2 * e, sr * X / beta, sr * X / beta],
        [beta * sr * e, beta * sr * e, X, X],
        [beta * sr * e, beta * sr * e, X, X],
    ])
    D = np.array([
        [e + 1, e, sr * X / beta, sr * X / beta],
        [e, e + 1, sr * X / beta, sr * X / beta],
        [beta * rs * e, beta * rs * e, X + 1, X],
        [beta * rs * e, beta * rs * e, X, X + 1],
    ])
    return np.block([[A, B], [C, D]])


def bracket_bound_vector(bf: BoundFunctions, widths: WidthSet, alpha: float) -> np.ndarray:
    """Componentwise bound on the Lie bracket of the generator with the perturbation."""
    b = bf.bounds
    chi0, Theta0 = bf.chi0, bf.Theta0
    w_I = widths.r * (0.5 * bf.T * b.eta0 * chi0 + Theta0 * (b.eta0 + b.gamma0))
    w_x = widths.u * (0.5 * bf.T * b.Xi0 * chi0 + Theta0 * (b.Xi0 + b.Gamma0))
    w_t = widths.s * (0.5 * bf.T * b.eta0 * chi0 + Theta0 * (b.eta0 + b.gamma0 + b.delta))
    w_y = w_x
    return np.array([w_I, w_I, w_x, w_x, w_t, w_t, w_y, w_y]) / alpha


def appendix_remainder_bound(bf: BoundFunctions, widths: WidthSet,
                             alpha: float) -> np.ndarray:
    """Assembled per-component bound on the remainder field: M_bar @ w_bar."""
    return remainder_matrix(bf, widths, alpha) @ bracket_bound_vector(bf, widths, alpha)


# ---------------------------------------------------------------------------
# series-level operations
# ---------------------------------------------------------------------------

def homological_solve(f0: tf.TaylorFourierSeries, omega: Sequence[float],
                      period: float, tol: float = 1e-9) -> tf.TaylorFourierSeries:
    """Generating function killing the non-resonant part to first order.

    Divides each coefficient by i*k.omega, so {phi, h} = -f0 holds at the
    coefficient level.  Refuses input carrying a resonant harmonic with a
    nonzero coefficient, naming the offending k.
    """
    omega_arr = np.asarray(omega, dtype=float)
    terms: dict[tf.Key, complex] = {}
    for (k, alpha), c in f0.terms.items():
        komega = float(np.dot(k, omega_arr))
        phase = komega * period / (2.0 * math.pi)
        if round(phase) == 0 and abs(phase) <= tol:
            raise DomainError(f"resonant harmonic k={k} has nonzero coefficient {c}")
        terms[(k, alpha)] = c / (1j * komega)
    return tf.TaylorFourierSeries(f0.n_actions, f0.base_point,
                                  f0.taylor_degree_cap, f0.harmonic_cap, terms)


@dataclass(frozen=True)
class AveragingResult:
    """Outcome of one numeric averaging step on series.

    ``tail_estimate`` bounds the dropped Lie-series orders via the measured
    geometric decay of the retained ones; ``cap_overflow`` flags a
    truncation whose discarded mass exceeds the threshold.
    """

    g1: tf.TaylorFourierSeries
    f1: tf.TaylorFourierSeries
    r1: tf.TaylorFourierSeries
    phi1: tf.TaylorFourierSeries
    discarded_mass: float
    tail_estimate: float
    cap_overflow: bool


def first_order_average(h_pert: tf.TaylorFourierSeries, omega: Sequence[float],
                        period: float, degree_cap: int, harmonic_cap: int,
                        order: int = 2, overflow_threshold: float = 1e-10,
                        ) -> AveragingResult:
    """One averaging step: remove the non-resonant part to first order.

    ``h_pert`` is the full perturbation (resonant + non-resonant, including
    any integrable remainder).  The remainder of the transformed hamiltonian
    is computed from the Lie series

        r1 = sum_{n>=1} L^n(g0)/n!  +  sum_{n>=1} n L^n(f0)/(n+1)!

    truncated at bracket ``order``; it is then split along the flow into the
    new resonant and non-resonant parts.
    """
    if order < 1:
        raise DomainError("order must be >= 1")
    g0, f0 = tf.resonant_split(h_pert, omega, period)
    if f0.is_zero():
        z = tf.zero(h_pert.n_actions, h_pert.base_point, degree_cap, harmonic_cap)
        return AveragingResult(g1=g0, f1=z, r1=z, phi1=z,
                               discarded_mass=0.0, tail_estimate=0.0, cap_overflow=False)
    phi1 = homological_solve(f0, omega, period)
    r1 = tf.zero(h_pert.n_actions, h_pert.base_point, degree_cap, harmonic_cap)
    Lg, Lf = g0, f0
    order_masses: list[float] = []
    for n in range(1, order + 1):
        Lg = tf.poisson_bracket(phi1, Lg, degree_cap, harmonic_cap)
        Lf = tf.poisson_bracket(phi1, Lf, degree_cap, harmonic_cap)
        contrib = tf.add(tf.scale(Lg, 1.0 / math.factorial(n)),
                         tf.scale(Lf, n / math.factorial(n + 1)))
        order_masses.append(contrib.coefficient_mass())
        r1 = tf.add(r1, contrib)
    if len(order_masses) >= 2 and order_masses[-2] > 0.0:
        ratio = order_masses[-1] / order_masses[-2]
    else:
        ratio = 0.0
    tail = order_masses[-1] * ratio / (1.0 - ratio) if ratio < 1.0 else math.inf
    r1_res, r1_non = tf.resonant_split(r1, omega, period)
    g1 = tf.add(g0, r1_res)
    f1 = r1_non
    dropped = r1.discarded_mass
    return AveragingResult(
        g1=g1, f1=f1, r1=r1, phi1=phi1,
        discarded_mass=dropped, tail_estimate=tail,
        cap_overflow=(dropped + (0.0 if math.isinf(tail) else tail)) > overflow_threshold
        or math.isinf(tail),
    )
